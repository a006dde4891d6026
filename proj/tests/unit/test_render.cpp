#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "mvedit/hull.hpp"
#include "mvedit/multiview.hpp"
#include "mvedit/render.hpp"

using namespace mvedit;

namespace {

const double kFov = 50.0 * kPi / 180.0;

TriangleMesh triangle(double z, double s = 1.0) {
    TriangleMesh m;
    m.vertices = {{-s, -s, z}, {s, -s, z}, {0, s, z}};
    m.faces = {{0, 1, 2}};
    return m;
}

std::size_t count_id(const std::vector<std::uint32_t>& ids, std::uint32_t id) {
    return static_cast<std::size_t>(std::count(ids.begin(), ids.end(), id));
}

bool near_id_edge(const std::vector<std::uint32_t>& ids, int res, int x, int y) {
    const auto c = ids[static_cast<std::size_t>(y * res + x)];
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= res || ny >= res) continue;
            if (ids[static_cast<std::size_t>(ny * res + nx)] != c) return true;
        }
    return false;
}

}  // namespace

TEST_CASE("camera_pose: position convention") {
    const auto p = camera_pose(0.0, kPi / 4, 2.0, kFov);
    CHECK(std::abs(p.position.x - 0.0) <= 1e-12);
    CHECK(std::abs(p.position.y - std::sqrt(2.0)) <= 1e-12);
    CHECK(std::abs(p.position.z - std::sqrt(2.0)) <= 1e-12);

    for (const double az : {0.0, 0.3, 1.2, 2.5, 4.0, 5.9}) {
        const auto c = camera_pose(az, 0.4, 2.8, kFov);
        CHECK(dot(c.forward(), Vec3{} - c.position) > 0);
        CHECK(length(c.forward() - normalized(Vec3{} - c.position)) <= 1e-12);
        CHECK(length(c.to_view(c.position)) <= 1e-12);
        const Vec3 o = c.to_view({0, 0, 0});
        CHECK(std::abs(o.x) <= 1e-12);
        CHECK(std::abs(o.y) <= 1e-12);
        CHECK(o.z == doctest::Approx(-2.8).epsilon(1e-12));
        // Camera up has a positive world-y component (no roll).
        CHECK(c.rotation.row(1).y > 0);
    }
}

TEST_CASE("camera rig: four poses related by quarter turns about y") {
    CameraRig rig;
    rig.azimuth_offset = 0.3;
    const auto poses = rig.poses();
    for (int i = 0; i < 4; ++i) {
        const auto& a = poses[static_cast<std::size_t>(i)].position;
        const auto& b = poses[static_cast<std::size_t>((i + 1) % 4)].position;
        // Rotating azimuth by +pi/2 maps (x, z) to (z, -x).
        CHECK(length(b - Vec3{a.z, a.y, -a.x}) <= 1e-12);
        CHECK(poses[static_cast<std::size_t>(i)].elevation == kDefaultElevation);
    }
    CHECK(std::abs(rig.azimuth(1) - rig.azimuth(0) - kPi / 2) <= 1e-12);
}

TEST_CASE("camera_pose: errors") {
    CHECK_THROWS_AS(camera_pose(0, 0, 0.0, kFov), std::invalid_argument);
    CHECK_THROWS_AS(camera_pose(0, 0, -1.0, kFov), std::invalid_argument);
    CHECK_THROWS_AS(camera_pose(0, 0, 2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(camera_pose(0, 0, 2.0, kPi), std::invalid_argument);
}

TEST_CASE("rasterize_scene: triangle over the center") {
    const auto tri = triangle(0.0);
    const auto cam = camera_pose(0, 0, 3.0, kFov);
    const std::array<SceneObject, 1> scene{SceneObject{&tri, 5}};
    const auto buf = rasterize_scene(scene, cam, 64);
    CHECK(buf.id_at(32, 32) == 5);
    CHECK(std::isfinite(buf.depth[32 * 64 + 32]));
    CHECK(buf.depth[32 * 64 + 32] == doctest::Approx(3.0).epsilon(1e-9));
    // Background invariants.
    for (std::size_t i = 0; i < buf.ids.size(); ++i) {
        CHECK((buf.ids[i] == kBackgroundId) == std::isinf(buf.depth[i]));
        if (buf.ids[i] == kBackgroundId)
            for (int c = 0; c < 3; ++c) CHECK(buf.color.data[i * 3 + c] == 255);
    }
    CHECK(buf.color.width == 64);
    CHECK(buf.color.height == 64);
}

TEST_CASE("rasterize_scene: nearer surface wins, regardless of draw order") {
    const auto near = triangle(0.5, 0.8), far = triangle(-0.5, 1.5);
    const auto cam = camera_pose(0, 0, 3.0, kFov);
    for (const bool near_first : {true, false}) {
        std::vector<SceneObject> scene{{&near, 1}, {&far, 2}};
        if (!near_first) std::swap(scene[0], scene[1]);
        const auto buf = rasterize_scene(scene, cam, 64);
        const auto only_near = rasterize_scene(std::array<SceneObject, 1>{SceneObject{&near, 1}}, cam, 64);
        for (std::size_t i = 0; i < buf.ids.size(); ++i)
            if (only_near.ids[i] == 1) CHECK(buf.ids[i] == 1);
        CHECK(count_id(buf.ids, 2) > 0);
    }
}

TEST_CASE("rasterize_scene: selection flags record the mask id") {
    const auto cube = fixtures::box({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5});
    std::vector<std::uint8_t> flags(cube.num_faces(), 0);
    flags[2] = flags[3] = 1;  // +z side, facing the camera at azimuth 0
    const auto cam = camera_pose(0, 0, 3.0, kFov);
    const std::array<SceneObject, 1> scene{SceneObject{&cube, kShapeId, flags, kMaskId}};
    const auto buf = rasterize_scene(scene, cam, 64);
    CHECK(buf.id_at(32, 32) == kMaskId);
    CHECK(count_id(buf.ids, kShapeId) == 0);  // only the front face is visible head-on
    const auto side = rasterize_scene(scene, camera_pose(kPi / 2, 0.3, 3.0, kFov), 64);
    CHECK(count_id(side.ids, kMaskId) == 0);
    CHECK(count_id(side.ids, kShapeId) > 0);
}

TEST_CASE("rasterize_scene: resolution floor") {
    const auto tri = triangle(0.0);
    const std::array<SceneObject, 1> scene{SceneObject{&tri, 1}};
    CHECK_THROWS_AS(rasterize_scene(scene, camera_pose(0, 0, 3, kFov), 8), std::invalid_argument);
}

TEST_CASE("rasterize_scene: silhouette shrinks with distance") {
    const auto shape = normalize_mesh(fixtures::corpus_shape(1)).mesh;
    const std::array<SceneObject, 1> scene{SceneObject{&shape, 1}};
    std::size_t prev = SIZE_MAX;
    for (const double d : {1.8, 2.2, 2.8, 3.5, 5.0}) {
        const auto n = count_id(rasterize_scene(scene, camera_pose(0.4, 0.5, d, kFov), 96).ids, 1);
        CHECK(n < prev);
        prev = n;
    }
}

TEST_CASE("raycast_visibility: basics") {
    const auto tri = triangle(0.0);
    const auto cam = camera_pose(0, 0, 3.0, kFov);
    const std::array<SceneObject, 1> scene{SceneObject{&tri, 9}};
    const auto ids = raycast_visibility(scene, cam, 64);
    CHECK(ids[32 * 64 + 32] == 9);  // through the interior
    CHECK(ids[0] == kBackgroundId);  // corner ray misses
    const auto r = rasterize_scene(scene, cam, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            if (r.id_at(x, y) != ids[static_cast<std::size_t>(y * 64 + x)]) CHECK(near_id_edge(ids, 64, x, y));

    const TriangleMesh empty;
    const std::array<SceneObject, 1> nothing{SceneObject{&empty, 3}};
    CHECK(count_id(raycast_visibility(nothing, cam, 32), kBackgroundId) == 32u * 32u);
}

TEST_CASE("rasterizer and ray caster agree on random scenes") {
    Rng rng(77);
    for (int s = 0; s < 10; ++s) {
        const auto a = normalize_mesh(fixtures::corpus_shape(s)).mesh;
        auto b = fixtures::icosphere(2, rng.uniform(0.15, 0.4),
                                     {rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)});
        const std::vector<SceneObject> scene{{&a, 1}, {&b, 2}};
        const auto cam = camera_pose(rng.uniform(0, 2 * kPi), rng.uniform(-0.8, 1.2), rng.uniform(2.0, 3.5), kFov);
        const auto r = rasterize_scene(scene, cam, 64);
        const auto ids = raycast_visibility(scene, cam, 64);
        std::size_t agree = 0;
        for (std::size_t i = 0; i < ids.size(); ++i) agree += r.ids[i] == ids[i];
        CHECK(agree >= ids.size() * 99 / 100);
    }
}

TEST_CASE("grid assembly and splitting") {
    std::array<Image, 4> views;
    for (int q = 0; q < 4; ++q) {
        views[static_cast<std::size_t>(q)] = Image(32, 24, 3);
        for (auto& v : views[static_cast<std::size_t>(q)].data) v = static_cast<std::uint8_t>(40 * q + (&v - &views[static_cast<std::size_t>(q)].data[0]) % 37);
    }
    const auto poses = CameraRig{}.poses();
    const auto g = assemble_grid(views, poses, Modality::Color);
    CHECK(g.image.width == 64);
    CHECK(g.image.height == 48);
    CHECK(g.image.at(10, 10, 1) == views[0].at(10, 10, 1));
    CHECK(g.image.at(32 + 5, 7, 2) == views[1].at(5, 7, 2));
    CHECK(g.image.at(3, 24 + 4, 0) == views[2].at(3, 4, 0));
    CHECK(g.image.at(32 + 31, 24 + 23, 0) == views[3].at(31, 23, 0));

    const auto back = split_grid(g);
    CHECK(back.views == views);
    CHECK(back.poses[3].azimuth == poses[3].azimuth);

    auto bad = views;
    bad[2] = Image(31, 24, 3);
    CHECK_THROWS_AS(assemble_grid(bad, poses, Modality::Color), std::invalid_argument);
    CHECK_THROWS_AS(split_image(Image(1023, 1024, 3)), std::invalid_argument);
    CHECK(split_image(Image(1024, 1024, 3))[0].width == 512);
}

TEST_CASE("pose sidecar round trip") {
    CameraRig rig;
    rig.azimuth_offset = 1.234;
    rig.distance = 3.1;
    const auto poses = rig.poses();
    const auto back = poses_from_json(poses_to_json(poses));
    for (std::size_t q = 0; q < 4; ++q) {
        CHECK(back[q].azimuth == poses[q].azimuth);
        CHECK(back[q].elevation == poses[q].elevation);
        CHECK(back[q].distance == poses[q].distance);
        CHECK(back[q].fov == poses[q].fov);
        CHECK(back[q].position == poses[q].position);
    }
}

TEST_CASE("PNG codec and binary conventions") {
    const auto rgb = fixtures::natural_image(40, 30, 3);
    CHECK(decode_png(encode_png(rgb)) == rgb);
    Image mask(16, 16, 1, 0);
    for (int i = 0; i < 16; ++i) mask.at(i, i) = 1;
    const auto gray = binary_to_gray(mask);
    CHECK(gray.at(3, 3) == 255);
    CHECK(gray.at(3, 4) == 0);
    CHECK(gray_to_binary(decode_png(encode_png(gray))) == mask);
    auto impure = gray;
    impure.at(0, 5) = 128;
    CHECK_THROWS_AS(gray_to_binary(impure), ImageError);
    CHECK(is_binary(mask));
    CHECK_FALSE(is_binary(gray));
    CHECK_THROWS(decode_png(std::vector<std::uint8_t>{1, 2, 3, 4}));
}

TEST_CASE("render_tuple: empty mask") {
    const auto shape = normalize_mesh(fixtures::corpus_shape(0)).mesh;
    RenderConfig cfg;
    cfg.resolution = 64;
    const auto t = render_tuple(shape, MaskGeometry{}, CameraRig{}, cfg);
    CHECK(t.mask.image.width == 128);
    CHECK(std::all_of(t.mask.image.data.begin(), t.mask.image.data.end(), [](auto v) { return v == 0; }));
    CHECK(t.masked.image == t.gt.image);
    CHECK(t.mask.modality == Modality::Binary);
}

TEST_CASE("render_tuple: an enclosing hull hides the whole shape") {
    const auto shape = normalize_mesh(fixtures::corpus_shape(2)).mesh;
    MaskGeometry m;
    m.type = MaskType::TypeI;
    const auto hull = scale_about_centroid(convex_hull3(shape.vertices), 1.2);
    m.shape = HullMask{hull};
    RenderConfig cfg;
    cfg.resolution = 64;
    CameraRig rig;
    const auto t = render_tuple(shape, m, rig, cfg);
    const auto poses = rig.poses();
    const auto masks = split_image(t.mask.image);
    const auto masked = split_image(t.masked.image);
    for (std::size_t v = 0; v < 4; ++v) {
        const std::array<SceneObject, 1> only_hull{SceneObject{&hull, kMaskId}};
        const auto sil = rasterize_scene(only_hull, poses[v], 64).id_mask(kMaskId);
        CHECK(masks[v] == sil);
        // No shape pixel survives: everything is fill or background, both white.
        for (const auto px : masked[v].data) CHECK(px == 255);
    }
}

TEST_CASE("render_tuple: occlusion-aware mask, disjointness and unmasked agreement") {
    const auto shape = normalize_mesh(fixtures::corpus_shape(3)).mesh;
    RenderConfig cfg;
    cfg.resolution = 64;
    CameraRig rig;
    rig.azimuth_offset = 0.4;
    const auto poses = rig.poses();
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        for (const auto type : {MaskType::TypeI, MaskType::TypeII, MaskType::TypeIII}) {
            Rng rng(seed);
            const auto m = generate_mask(type, shape, rng, cfg.resolution);
            const auto t = render_tuple(shape, m, rig, cfg);
            CHECK(is_binary(t.mask.image));
            const auto masks = split_image(t.mask.image);
            for (std::size_t i = 0; i < t.mask.image.data.size(); ++i)
                if (!t.mask.image.data[i])
                    for (int c = 0; c < 3; ++c) CHECK(t.masked.image.data[i * 3 + c] == t.gt.image.data[i * 3 + c]);

            // The frontmost-id oracle: mask pixels are exactly where M wins, and
            // mask pixels never overlap pixels the shape wins.
            std::vector<std::uint8_t> flags;
            std::vector<SceneObject> scene{{&shape, kShapeId}};
            if (const auto* sel = std::get_if<FaceSelection>(&m.shape)) {
                flags.assign(shape.num_faces(), 0);
                for (const auto f : sel->faces) flags[f] = 1;
                scene[0].selected = flags;
            }
            if (const auto* h = std::get_if<HullMask>(&m.shape)) scene.push_back({&h->hull, kMaskId});
            if (const auto* p = std::get_if<PrimitiveSet>(&m.shape)) scene.push_back({&p->tessellation, kMaskId});
            for (std::size_t v = 0; v < 4; ++v) {
                const auto ids = raycast_visibility(scene, poses[v], 64);
                std::size_t agree = 0;
                for (int y = 0; y < 64; ++y)
                    for (int x = 0; x < 64; ++x) {
                        const bool in_mask = masks[v].at(x, y) == 1;
                        const auto id = ids[static_cast<std::size_t>(y * 64 + x)];
                        agree += in_mask == (id == kMaskId);
                        if (in_mask != (id == kMaskId)) CHECK(near_id_edge(ids, 64, x, y));
                    }
                CHECK(agree >= 64u * 64u * 99 / 100);
            }
        }
    }
}

TEST_CASE("render_tuple: quarter-turn offset permutes quadrants exactly") {
    const auto shape = normalize_mesh(fixtures::corpus_shape(4)).mesh;
    Rng rng(5);
    const auto m = gen_mask_type1(shape, rng, {});
    RenderConfig cfg;
    cfg.resolution = 48;
    CameraRig base, turned;
    turned.azimuth_offset = kPi / 2;
    const auto a = render_tuple(shape, m, base, cfg);
    const auto b = render_tuple(shape, m, turned, cfg);
    for (const auto member : {&RenderTuple::gt, &RenderTuple::masked, &RenderTuple::mask}) {
        const auto va = split_image((a.*member).image), vb = split_image((b.*member).image);
        for (std::size_t q = 0; q < 4; ++q) CHECK(vb[q] == va[(q + 1) % 4]);
    }
}

TEST_CASE("render_tuple: purple fill, view masks and supersampling") {
    const auto shape = normalize_mesh(fixtures::corpus_shape(1)).mesh;
    Rng rng(2);
    const auto m = gen_mask_type2(shape, rng, {});
    RenderConfig cfg;
    cfg.resolution = 48;
    cfg.fill = FillMode::Purple;
    const auto t = render_tuple(shape, m, CameraRig{}, cfg);
    bool saw_fill = false;
    for (std::size_t i = 0; i < t.mask.image.data.size(); ++i)
        if (t.mask.image.data[i]) {
            CHECK(t.masked.image.data[i * 3] == 160);
            CHECK(t.masked.image.data[i * 3 + 1] == 32);
            CHECK(t.masked.image.data[i * 3 + 2] == 240);
            saw_fill = true;
        }
    CHECK(saw_fill);

    Rng r2(9);
    const auto views = gen_random2d_masks(r2, 48, {});
    const auto tv = render_tuple(shape, views, CameraRig{}, cfg);
    CHECK(split_image(tv.mask.image)[2] == std::get<ViewMasks>(views.shape).views[2]);
    cfg.resolution = 64;
    CHECK_THROWS_AS(render_tuple(shape, views, CameraRig{}, cfg), std::invalid_argument);

    RenderConfig ss;
    ss.resolution = 48;
    ss.supersample = 2;
    RenderConfig one;
    one.resolution = 48;
    const auto plain = render_tuple(shape, m, CameraRig{}, one);
    const auto smooth = render_tuple(shape, m, CameraRig{}, ss);
    CHECK(smooth.mask.image == plain.mask.image);
    CHECK_FALSE(smooth.gt.image == plain.gt.image);
}

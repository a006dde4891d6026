// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "json.hpp"
#include "mvedit/forge.hpp"
#include "mvedit/hull.hpp"
#include "mvedit/metrics.hpp"
#include "mvedit/sweep.hpp"
#include "oracles.hpp"

using namespace mvedit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> png_set(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && e.path().extension() == ".png")
            out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
    return out;
}

std::vector<std::string> sorted_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    std::sort(lines.begin(), lines.end());
    return lines;
}

bool near_id_edge(const std::vector<std::uint32_t>& ids, int res, int x, int y) {
    const auto c = ids[static_cast<std::size_t>(y * res + x)];
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx >= 0 && ny >= 0 && nx < res && ny < res && ids[static_cast<std::size_t>(ny * res + nx)] != c)
                return true;
        }
    return false;
}

// Objects of the (shape, mask) scene as the forge draws them.
struct MaskScene {
    std::vector<std::uint8_t> flags;
    std::vector<SceneObject> objects;

    MaskScene(const TriangleMesh& shape, const MaskGeometry& m) {
        objects.push_back({&shape, kShapeId});
        if (const auto* sel = std::get_if<FaceSelection>(&m.shape)) {
            flags.assign(shape.num_faces(), 0);
            for (const auto f : sel->faces) flags[f] = 1;
            objects[0].selected = flags;
        }
        if (const auto* h = std::get_if<HullMask>(&m.shape)) objects.push_back({&h->hull, kMaskId});
        if (const auto* p = std::get_if<PrimitiveSet>(&m.shape)) objects.push_back({&p->tessellation, kMaskId});
    }
};

struct ForgeRun {
    fs::path out;
    ForgeResult result;
    double seconds{};
    int workers{};
};

}  // namespace

int main() {
    std::cout << std::boolalpha;
    fixtures::TempDir scratch("acceptance");
    const fs::path corpus = scratch.path() / "corpus";
    fixtures::write_corpus(corpus, 20);
    const unsigned cores = std::max(1u, std::thread::hardware_concurrency());

    ForgeConfig cfg;
    cfg.global_seed = 20240611;
    cfg.render.resolution = 256;
    const auto tasks = plan_tasks(scan_corpus(corpus), load_captions(corpus / "captions.tsv"), cfg);

    auto forge = [&](const std::string& name, int workers) {
        ForgeRun run;
        run.out = scratch.path() / name;
        run.workers = workers;
        auto c = cfg;
        c.workers = workers;
        const auto t0 = Clock::now();
        run.result = run_forge(tasks, run.out, c);
        run.seconds = seconds_since(t0);
        return run;
    };
    const ForgeRun main_run = forge("forge-a", static_cast<int>(std::max(2u, cores)));

    report("dataset_shape", [&]() -> Outcome {
        const auto& m = main_run.result.manifest;
        std::map<std::string, std::array<int, 3>> per_type;
        for (const auto& r : m.records)
            ++per_type[r.shape_id][static_cast<std::size_t>(static_cast<int>(r.type) - static_cast<int>(MaskType::TypeI))];
        bool balanced = per_type.size() == 20;
        for (const auto& [id, c] : per_type) balanced &= c == std::array<int, 3>{10, 10, 10};
        const bool count = m.records.size() == 600 && m.errors.empty();
        const bool formula = expected_record_count(5000) == 150000;
        const bool fast = main_run.seconds < 600.0;
        std::ostringstream d;
        d << m.records.size() << " records, " << m.errors.size() << " errors, 10/10/10 per shape=" << balanced
          << ", 5000 shapes -> " << expected_record_count(5000) << ", 256px forge took " << main_run.seconds << " s on "
          << cores << " core(s) with " << main_run.workers << " workers (budget 600 s on 8 cores)";
        return {count && balanced && formula && fast, d.str()};
    });

    report("mask_validity", [&]() -> Outcome {
        const double eps = 1e-7;
        int hulls = 0, bad_hulls = 0;
        for (int s = 0; s < 20; ++s) {
            const auto mesh = normalize_mesh(fixtures::corpus_shape(s)).mesh;
            const auto mids = face_midpoints(mesh);
            for (std::uint64_t seed = 0; seed < 10; ++seed) {
                Rng rng(mix64(seed * 31 + static_cast<std::uint64_t>(s)));
                const auto m = gen_mask_type1(mesh, rng, {});
                const auto& hull = std::get<HullMask>(m.shape).hull;
                bool ok = !m.provenance.selected_faces.empty();
                for (const auto& f : hull.faces) {
                    const Vec3& a = hull.vertices[f[0]];
                    const Vec3 n = normalized(cross(hull.vertices[f[1]] - a, hull.vertices[f[2]] - a));
                    for (const auto& v : hull.vertices) ok &= dot(v - a, n) <= eps;
                    for (const auto fi : m.provenance.selected_faces) ok &= dot(mids[fi] - a, n) <= eps;
                }
                ++hulls;
                bad_hulls += !ok;
            }
        }

        const auto mesh = normalize_mesh(fixtures::corpus_shape(0)).mesh;
        std::array<int, 4> counts{};
        int draws = 0;
        bool sizes_ok = true;
        for (std::uint64_t seed = 0; draws < 4000; ++seed, ++draws) {
            Rng rng(seed);
            const auto m = gen_mask_type3(mesh, rng, {});
            const auto& cyl = m.provenance.cylinders;
            if (cyl.size() < 3 || cyl.size() > 6) return {false, "cylinder count out of range"};
            ++counts[cyl.size() - 3];
            for (const auto& c : cyl)
                for (const double v : {c.half_height, c.radius_a, c.radius_b}) sizes_ok &= v >= 0.1 && v <= 0.3;
        }
        double chi2 = 0;
        for (const int c : counts) chi2 += (c - draws / 4.0) * (c - draws / 4.0) / (draws / 4.0);
        std::ostringstream d;
        d << hulls - bad_hulls << "/" << hulls << " Type I hulls convex and containing their midpoints (eps 1e-7); "
          << "cylinder counts {" << counts[0] << "," << counts[1] << "," << counts[2] << "," << counts[3]
          << "} over " << draws << " draws, chi2=" << chi2 << " (< 11.345); sizes in [0.1,0.3]=" << sizes_ok;
        return {bad_hulls == 0 && chi2 < 11.345 && sizes_ok, d.str()};
    });

    report("raster_vs_raycast", [&]() -> Outcome {
        Rng rng(4242);
        std::size_t agree = 0, total = 0, off_edge = 0;
        double worst = 1.0;
        for (int s = 0; s < 50; ++s) {
            const auto a = normalize_mesh(fixtures::corpus_shape(s)).mesh;
            TriangleMesh b = normalize_mesh(fixtures::corpus_shape(s + 50)).mesh;
            const double k = rng.uniform(0.3, 0.7);
            const Vec3 shift{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
            for (auto& v : b.vertices) v = v * k + shift;
            const std::vector<SceneObject> scene{{&a, 1}, {&b, 2}};
            const auto cam = camera_pose(rng.uniform(0, 2 * kPi), rng.uniform(-1.0, 1.3), rng.uniform(1.9, 3.5),
                                         rng.uniform(0.6, 1.2));
            const auto r = rasterize_scene(scene, cam, 64);
            const auto ids = raycast_visibility(scene, cam, 64);
            std::size_t here = 0;
            for (int y = 0; y < 64; ++y)
                for (int x = 0; x < 64; ++x) {
                    const auto i = static_cast<std::size_t>(y * 64 + x);
                    if (r.ids[i] == ids[i]) {
                        ++here;
                    } else if (!near_id_edge(ids, 64, x, y) && !near_id_edge(r.ids, 64, x, y)) {
                        ++off_edge;
                    }
                }
            agree += here;
            total += ids.size();
            worst = std::min(worst, static_cast<double>(here) / static_cast<double>(ids.size()));
        }
        const double rate = static_cast<double>(agree) / static_cast<double>(total);
        std::ostringstream d;
        d << "agreement " << agree << "/" << total << " pixels (" << 100 * rate << "%) over 50 scenes at 64x64 (worst scene " << 100 * worst
          << "%), disagreements away from a silhouette edge: " << off_edge;
        return {rate >= 0.99 && off_edge == 0, d.str()};
    });

    report("occlusion_invariants", [&]() -> Outcome {
        const auto& m = main_run.result.manifest;
        const int res = cfg.render.resolution;
        const auto poses = cfg.rig.poses();
        std::map<std::string, TriangleMesh> meshes;
        for (const auto& e : scan_corpus(corpus)) meshes[e.id] = normalize_mesh(load_obj(e.path.string()), cfg.normalize).mesh;
        std::size_t overlap = 0, id_mismatch = 0, unmasked_diff = 0, nonempty_empty = 0;
        for (const auto& r : m.records) {
            const auto& shape = meshes.at(r.shape_id);
            const auto mask = gray_to_binary(read_png((main_run.out / r.mask).string()));
            const auto gt = read_png((main_run.out / r.gt).string());
            const auto masked = read_png((main_run.out / r.masked).string());
            for (std::size_t i = 0; i < mask.data.size(); ++i)
                if (!mask.data[i])
                    for (int c = 0; c < 3; ++c) unmasked_diff += masked.data[i * 3 + c] != gt.data[i * 3 + c];

            Rng rng(r.seed);
            const auto geom = generate_mask(r.type, shape, rng, res, cfg.masks);
            const MaskScene scene(shape, geom);
            const auto views = split_image(mask);
            for (std::size_t v = 0; v < 4; ++v) {
                const auto buf = rasterize_scene(scene.objects, poses[v], res);
                for (int y = 0; y < res; ++y)
                    for (int x = 0; x < res; ++x) {
                        const bool in_mask = views[v].at(x, y) == 1;
                        const auto id = buf.id_at(x, y);
                        overlap += in_mask && id == kShapeId;
                        id_mismatch += in_mask != (id == kMaskId);
                    }
            }
        }
        for (const auto& [id, shape] : meshes) {
            RenderConfig rc = cfg.render;
            const auto t = render_tuple(shape, MaskGeometry{}, cfg.rig, rc);
            for (const auto v : t.mask.image.data) nonempty_empty += v != 0;
            nonempty_empty += !(t.masked.image == t.gt.image);
        }
        std::ostringstream d;
        d << m.records.size() << " records: mask&shape-visible pixels=" << overlap
          << ", mask vs frontmost-mask-id mismatches=" << id_mismatch << ", unmasked masked!=gt values=" << unmasked_diff
          << ", nonzero pixels for empty masks over 20 shapes=" << nonempty_empty;
        return {overlap == 0 && id_mismatch == 0 && unmasked_diff == 0 && nonempty_empty == 0 && !m.records.empty(),
                d.str()};
    });

    report("azimuth_sweep", [&]() -> Outcome {
        const auto offs = sweep_offsets();
        const double last_deg = 360.0 * static_cast<double>(offs.size() - 1) / static_cast<double>(offs.size());
        std::size_t grids = 0, mismatched = 0;
        for (int s = 0; s < 5; ++s)
            for (const auto type : {MaskType::TypeI, MaskType::TypeII, MaskType::TypeIII}) {
                SweepItem item;
                item.id = "s" + std::to_string(s);
                item.mesh = normalize_mesh(fixtures::corpus_shape(s)).mesh;
                Rng rng(static_cast<std::uint64_t>(s) * 3 + static_cast<std::uint64_t>(type));
                item.mask = generate_mask(type, item.mesh, rng, 64);
                SweepConfig sc;
                sc.render.resolution = 64;
                const auto t = render_sweep(item, sc);
                for (const auto member : {&RenderTuple::gt, &RenderTuple::masked, &RenderTuple::mask}) {
                    const auto a = split_image((t[0].*member).image), b = split_image((t[4].*member).image);
                    for (std::size_t q = 0; q < 4; ++q) mismatched += !(b[q] == a[(q + 1) % 4]);
                    ++grids;
                }
            }
        std::ostringstream d;
        d << offs.size() << " offsets, last " << last_deg << " deg (" << offs.back() * 180 / kPi << "); " << grids
          << " offset-90 grids checked, quadrants not matching the cyclic permutation: " << mismatched;
        return {offs.size() == 16 && last_deg == 337.5 && std::abs(offs.back() * 180 / kPi - 337.5) < 1e-12 &&
                    mismatched == 0,
                d.str()};
    });

    report("determinism", [&]() -> Outcome {
        const ForgeRun other = forge("forge-b", 1);
        const auto a = png_set(main_run.out), b = png_set(other.out);
        const auto ma = sorted_lines(slurp(main_run.out / "manifest.jsonl"));
        const auto mb = sorted_lines(slurp(other.out / "manifest.jsonl"));
        std::ostringstream d;
        d << a.size() << " vs " << b.size() << " PNGs (workers " << main_run.workers << " vs 1), byte-identical="
          << (a == b) << ", sorted manifests identical=" << (ma == mb);
        return {a == b && ma == mb && a.size() == 1800, d.str()};
    });

    report("cli_mock_edit", [&]() -> Outcome {
        const auto mesh = scratch.path() / "edit.obj";
        save_obj(fixtures::corpus_shape(3), mesh.string());
        std::ofstream(scratch.path() / "mask.json") << R"({"generate": {"type": "type1", "seed": 11}})";
        const std::string cmd = std::string("\"") + MVEDIT_CLI + "\" edit --mesh \"" + mesh.string() + "\" --mask \"" +
                                (scratch.path() / "mask.json").string() +
                                "\" --prompt \"a red cap\" --seed 5 --backend mock --out \"" +
                                (scratch.path() / "edit-out").string() + "\"";
        const auto t0 = Clock::now();
        FILE* pipe = popen(cmd.c_str(), "r");
        if (!pipe) return {false, "cannot start the CLI"};
        std::string out;
        char buf[4096];
        while (const auto n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
        const int status = pclose(pipe);
        const double secs = seconds_since(t0);
        if (status != 0) return {false, "CLI exited with status " + std::to_string(status) + ": " + out};
        const auto j = nlohmann::json::parse(out);
        const auto& p = j.at("unmasked_preservation");
        const bool exact = p.is_number() && p.get<double>() == 0.0;
        std::ostringstream d;
        d << "wall " << secs << " s (< 5 s), unmasked_preservation=" << p.dump();
        return {secs < 5.0 && exact, d.str()};
    });

    report("ssim", [&]() -> Outcome {
        const auto x = fixtures::natural_image(96, 96, 7);
        const double self = ssim(x, x);
        double worst = 0;
        for (const double amp : {3.0, 20.0, 60.0}) {
            const auto y = fixtures::add_noise(x, amp, 1);
            worst = std::max(worst, std::abs(ssim(x, y) - oracles::ssim_direct(x, y)));
        }
        std::vector<double> curve;
        for (const double amp : {5.0, 15.0, 35.0, 70.0, 120.0}) curve.push_back(ssim(x, fixtures::add_noise(x, amp, 2)));
        bool decreasing = true;
        for (std::size_t i = 1; i < curve.size(); ++i) decreasing &= curve[i] < curve[i - 1];
        std::ostringstream d;
        d << "ssim(x,x)=" << self << ", max |ssim - direct oracle|=" << worst << " (<= 1e-4), noise curve";
        for (const double c : curve) d << ' ' << c;
        return {self == 1.0 && worst <= 1e-4 && decreasing, d.str()};
    });

    std::cout << (failures ? "ACCEPTANCE FAILED: " : "ACCEPTANCE PASSED: ") << failures << " failing criteria"
              << std::endl;
    return failures ? 1 : 0;
}

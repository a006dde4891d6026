#include "mvedit/render.hpp"

#include <array>
#include <limits>
#include <stdexcept>

namespace mvedit {

namespace {

constexpr double kNear = 1e-3;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct ClipVertex {
    Vec3 p;                  // view space
    std::array<double, 3> w;  // barycentrics w.r.t. the source triangle
};

// Sutherland-Hodgman against z <= -kNear.
std::vector<ClipVertex> clip_near(const std::array<ClipVertex, 3>& tri) {
    std::vector<ClipVertex> out;
    for (std::size_t i = 0; i < 3; ++i) {
        const ClipVertex& a = tri[i];
        const ClipVertex& b = tri[(i + 1) % 3];
        const bool a_in = a.p.z <= -kNear;
        const bool b_in = b.p.z <= -kNear;
        if (a_in) out.push_back(a);
        if (a_in != b_in) {
            const double t = (-kNear - a.p.z) / (b.p.z - a.p.z);
            ClipVertex c;
            c.p = a.p + (b.p - a.p) * t;
            for (std::size_t k = 0; k < 3; ++k) c.w[k] = a.w[k] + (b.w[k] - a.w[k]) * t;
            out.push_back(c);
        }
    }
    return out;
}

Vec3 shade_lambert(const Vec3& albedo, const Vec3& normal_view) {
    static const std::array<std::pair<Vec3, double>, 3> lights{{
        {normalized(Vec3{0.35, 0.6, 0.75}), 0.62},
        {normalized(Vec3{-0.7, 0.15, 0.45}), 0.28},
        {normalized(Vec3{0.1, -0.55, 0.35}), 0.14},
    }};
    double intensity = 0.24;
    for (const auto& [dir, weight] : lights) intensity += weight * std::max(0.0, dot(normal_view, dir));
    return albedo * intensity;
}

std::uint8_t quantize(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(c * 255.0 + 0.5));
}

void check_resolution(int res) {
    if (res < 16) throw std::invalid_argument("render resolution must be at least 16");
}

}  // namespace

Image RenderBuffers::id_mask(std::uint32_t id) const {
    Image out(width, height, 1, 0);
    for (std::size_t i = 0; i < ids.size(); ++i) out.data[i] = ids[i] == id ? 1 : 0;
    return out;
}

Rasterizer::Rasterizer(const CameraPose& camera, int width, int height)
    : camera_(camera),
      width_(width),
      height_(height),
      focal_(0.5 * height / std::tan(0.5 * camera.fov)),
      frags_(static_cast<std::size_t>(width) * height, Fragment{kInf, -1, 0, 0.f, 0.f}) {}

void Rasterizer::draw(const SceneObject& object) {
    if (object.mesh == nullptr) throw std::invalid_argument("scene object without mesh");
    const TriangleMesh& mesh = *object.mesh;
    if (!object.selected.empty() && object.selected.size() != mesh.faces.size())
        throw std::invalid_argument("selection flags must have one entry per face");
    const int obj_index = static_cast<int>(objects_.size());
    objects_.push_back(object);

    std::vector<Vec3> view(mesh.vertices.size());
    for (std::size_t i = 0; i < view.size(); ++i) view[i] = camera_.to_view(mesh.vertices[i]);

    const double cx = 0.5 * width_;
    const double cy = 0.5 * height_;

    auto raster = [&](const ClipVertex& c0, const ClipVertex& c1, const ClipVertex& c2, std::uint32_t face) {
        const std::array<const ClipVertex*, 3> cv{&c0, &c1, &c2};
        std::array<double, 3> sx{}, sy{}, iz{};
        for (std::size_t k = 0; k < 3; ++k) {
            iz[k] = 1.0 / -cv[k]->p.z;
            sx[k] = cx + focal_ * cv[k]->p.x * iz[k];
            sy[k] = cy - focal_ * cv[k]->p.y * iz[k];
        }
        const double area = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
        if (area == 0.0 || !std::isfinite(area)) return;

        const double minx = std::min({sx[0], sx[1], sx[2]}), maxx = std::max({sx[0], sx[1], sx[2]});
        const double miny = std::min({sy[0], sy[1], sy[2]}), maxy = std::max({sy[0], sy[1], sy[2]});
        const int x0 = std::max(0, static_cast<int>(std::ceil(minx - 0.5)));
        const int x1 = std::min(width_ - 1, static_cast<int>(std::floor(maxx - 0.5)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(miny - 0.5)));
        const int y1 = std::min(height_ - 1, static_cast<int>(std::floor(maxy - 0.5)));
        const double inv_area = 1.0 / area;

        for (int y = y0; y <= y1; ++y) {
            const double py = y + 0.5;
            for (int x = x0; x <= x1; ++x) {
                const double px = x + 0.5;
                double l0 = (sx[2] - sx[1]) * (py - sy[1]) - (sy[2] - sy[1]) * (px - sx[1]);
                double l1 = (sx[0] - sx[2]) * (py - sy[2]) - (sy[0] - sy[2]) * (px - sx[2]);
                double l2 = (sx[1] - sx[0]) * (py - sy[0]) - (sy[1] - sy[0]) * (px - sx[0]);
                l0 *= inv_area;
                l1 *= inv_area;
                l2 *= inv_area;
                if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;
                const double inv_depth = l0 * iz[0] + l1 * iz[1] + l2 * iz[2];
                const double depth = 1.0 / inv_depth;
                Fragment& frag = frags_[static_cast<std::size_t>(y) * width_ + x];
                if (!(depth < frag.depth)) continue;
                const double q0 = l0 * iz[0] / inv_depth, q1 = l1 * iz[1] / inv_depth, q2 = l2 * iz[2] / inv_depth;
                frag.depth = depth;
                frag.object = obj_index;
                frag.face = face;
                frag.b1 = static_cast<float>(q0 * c0.w[1] + q1 * c1.w[1] + q2 * c2.w[1]);
                frag.b2 = static_cast<float>(q0 * c0.w[2] + q1 * c1.w[2] + q2 * c2.w[2]);
            }
        }
    };

    for (std::uint32_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Face& f = mesh.faces[fi];
        const std::array<ClipVertex, 3> tri{ClipVertex{view[f[0]], {1, 0, 0}}, ClipVertex{view[f[1]], {0, 1, 0}},
                                            ClipVertex{view[f[2]], {0, 0, 1}}};
        const bool all_in = tri[0].p.z <= -kNear && tri[1].p.z <= -kNear && tri[2].p.z <= -kNear;
        if (all_in) {
            raster(tri[0], tri[1], tri[2], fi);
            continue;
        }
        const auto poly = clip_near(tri);
        for (std::size_t k = 1; k + 1 < poly.size(); ++k) raster(poly[0], poly[k], poly[k + 1], fi);
    }
}

RenderBuffers Rasterizer::resolve(const ShadingOptions& shading) const {
    RenderBuffers out;
    out.width = width_;
    out.height = height_;
    out.color = Image(width_, height_, 3);
    out.depth.assign(frags_.size(), kInf);
    out.ids.assign(frags_.size(), kBackgroundId);

    for (std::size_t i = 0; i < frags_.size(); ++i) {
        const Fragment& frag = frags_[i];
        Vec3 rgb = shading.background;
        if (frag.object >= 0) {
            const SceneObject& obj = objects_[static_cast<std::size_t>(frag.object)];
            const TriangleMesh& mesh = *obj.mesh;
            const Face& f = mesh.faces[frag.face];
            const bool flagged = !obj.selected.empty() && obj.selected[frag.face] != 0;
            out.ids[i] = flagged ? obj.selected_id : obj.id;
            out.depth[i] = frag.depth;

            if (obj.flat_color) {
                rgb = *obj.flat_color;
            } else {
                const double b1 = frag.b1, b2 = frag.b2, b0 = 1.0 - b1 - b2;
                Vec3 albedo = shading.default_albedo;
                if (mesh.has_colors())
                    albedo = mesh.colors[f[0]] * b0 + mesh.colors[f[1]] * b1 + mesh.colors[f[2]] * b2;
                if (shading.lit) {
                    const Vec3& a = mesh.vertices[f[0]];
                    const Vec3& b = mesh.vertices[f[1]];
                    const Vec3& c = mesh.vertices[f[2]];
                    Vec3 n = normalized(cross(b - a, c - a));
                    const Vec3 p = a * b0 + b * b1 + c * b2;
                    if (dot(n, camera_.position - p) < 0.0) n = -n;
                    rgb = shade_lambert(albedo, camera_.rotation * n);
                } else {
                    rgb = albedo;
                }
            }
        }
        out.color.data[3 * i + 0] = quantize(rgb.x);
        out.color.data[3 * i + 1] = quantize(rgb.y);
        out.color.data[3 * i + 2] = quantize(rgb.z);
    }
    return out;
}

Image Rasterizer::id_mask(std::uint32_t id) const {
    Image out(width_, height_, 1, 0);
    for (std::size_t i = 0; i < frags_.size(); ++i) {
        const Fragment& frag = frags_[i];
        if (frag.object < 0) continue;
        const SceneObject& obj = objects_[static_cast<std::size_t>(frag.object)];
        const bool flagged = !obj.selected.empty() && obj.selected[frag.face] != 0;
        out.data[i] = (flagged ? obj.selected_id : obj.id) == id ? 1 : 0;
    }
    return out;
}

RenderBuffers rasterize_scene(std::span<const SceneObject> scene, const CameraPose& camera, int resolution,
                              const ShadingOptions& shading) {
    check_resolution(resolution);
    Rasterizer r(camera, resolution, resolution);
    for (const auto& obj : scene) r.draw(obj);
    return r.resolve(shading);
}

Image render_color_supersampled(std::span<const SceneObject> scene, const CameraPose& camera, int resolution,
                                int factor, const ShadingOptions& shading) {
    check_resolution(resolution);
    if (factor <= 1) return rasterize_scene(scene, camera, resolution, shading).color;
    const int hi = resolution * factor;
    Rasterizer r(camera, hi, hi);
    for (const auto& obj : scene) r.draw(obj);
    const Image big = r.resolve(shading).color;

    Image out(resolution, resolution, 3);
    const int n = factor * factor;
    for (int y = 0; y < resolution; ++y)
        for (int x = 0; x < resolution; ++x)
            for (int c = 0; c < 3; ++c) {
                int sum = 0;
                for (int dy = 0; dy < factor; ++dy)
                    for (int dx = 0; dx < factor; ++dx) sum += big.at(x * factor + dx, y * factor + dy, c);
                out.at(x, y, c) = static_cast<std::uint8_t>((sum + n / 2) / n);
            }
    return out;
}

std::vector<std::uint32_t> raycast_visibility(std::span<const SceneObject> scene, const CameraPose& camera,
                                              int resolution) {
    check_resolution(resolution);
    const double focal = 0.5 * resolution / std::tan(0.5 * camera.fov);
    const double half = 0.5 * resolution;
    const Mat3 to_world = camera.rotation.transposed();
    const Vec3 origin = camera.position;

    std::vector<std::uint32_t> ids(static_cast<std::size_t>(resolution) * resolution, kBackgroundId);
    for (int y = 0; y < resolution; ++y) {
        for (int x = 0; x < resolution; ++x) {
            // Unnormalized so that the ray parameter equals view-space depth.
            const Vec3 dir = to_world * Vec3{(x + 0.5 - half) / focal, -(y + 0.5 - half) / focal, -1.0};
            double best_t = kInf;
            std::uint32_t best_id = kBackgroundId;
            for (const auto& obj : scene) {
                const TriangleMesh& mesh = *obj.mesh;
                for (std::uint32_t fi = 0; fi < mesh.faces.size(); ++fi) {
                    const Face& f = mesh.faces[fi];
                    // Moller-Trumbore, two-sided.
                    const Vec3& v0 = mesh.vertices[f[0]];
                    const Vec3 e1 = mesh.vertices[f[1]] - v0;
                    const Vec3 e2 = mesh.vertices[f[2]] - v0;
                    const Vec3 pv = cross(dir, e2);
                    const double det = dot(e1, pv);
                    if (det == 0.0) continue;
                    const double inv_det = 1.0 / det;
                    const Vec3 tv = origin - v0;
                    const double u = dot(tv, pv) * inv_det;
                    if (u < 0.0 || u > 1.0) continue;
                    const Vec3 qv = cross(tv, e1);
                    const double v = dot(dir, qv) * inv_det;
                    if (v < 0.0 || u + v > 1.0) continue;
                    const double t = dot(e2, qv) * inv_det;
                    if (t < kNear || !(t < best_t)) continue;
                    best_t = t;
                    const bool flagged = !obj.selected.empty() && obj.selected[fi] != 0;
                    best_id = flagged ? obj.selected_id : obj.id;
                }
            }
            ids[static_cast<std::size_t>(y) * resolution + x] = best_id;
        }
    }
    return ids;
}

}  // namespace mvedit

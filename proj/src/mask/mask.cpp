#include "mvedit/mask.hpp"

#include <algorithm>

#include "mvedit/hull.hpp"

namespace mvedit {

std::string_view to_string(MaskType t) {
    switch (t) {
        case MaskType::TypeI: return "type1";
        case MaskType::TypeII: return "type2";
        case MaskType::TypeIII: return "type3";
        case MaskType::Random2D: return "random2d";
        case MaskType::User: return "user";
    }
    return "unknown";
}

MaskType mask_type_from_string(std::string_view s) {
    if (s == "type1" || s == "1") return MaskType::TypeI;
    if (s == "type2" || s == "2") return MaskType::TypeII;
    if (s == "type3" || s == "3") return MaskType::TypeIII;
    if (s == "random2d") return MaskType::Random2D;
    if (s == "user") return MaskType::User;
    throw std::invalid_argument("unknown mask type '" + std::string(s) + "'");
}

std::string_view to_string(Primitive::Kind k) {
    switch (k) {
        case Primitive::Kind::Ellipsoid: return "ellipsoid";
        case Primitive::Kind::Box: return "box";
        case Primitive::Kind::Cylinder: return "cylinder";
    }
    return "unknown";
}

Primitive::Kind primitive_kind_from_string(std::string_view s) {
    if (s == "ellipsoid") return Primitive::Kind::Ellipsoid;
    if (s == "box") return Primitive::Kind::Box;
    if (s == "cylinder") return Primitive::Kind::Cylinder;
    throw std::invalid_argument("unknown primitive kind '" + std::string(s) + "'");
}

std::pair<Vec3, Vec3> CylinderSpec::frame() const {
    Vec3 b1, b2;
    orthonormal_basis(axis, b1, b2);
    const double c = std::cos(frame_angle);
    const double s = std::sin(frame_angle);
    return {b1 * c + b2 * s, b2 * c - b1 * s};
}

bool CylinderSpec::contains(const Vec3& q) const {
    const Vec3 d = q - center;
    if (std::abs(dot(d, axis)) > half_height) return false;
    const auto [u, v] = frame();
    const double x = dot(d, u) / radius_a;
    const double y = dot(d, v) / radius_b;
    return x * x + y * y <= 1.0;
}

bool point_in_cylinder_union(const Vec3& q, std::span<const CylinderSpec> cylinders) {
    return std::any_of(cylinders.begin(), cylinders.end(), [&](const CylinderSpec& c) { return c.contains(q); });
}

Plane sample_plane(Rng& rng, const Aabb& bbox) {
    Plane plane;
    plane.point = rng.point_in(bbox);
    plane.normal = rng.unit_vector();
    return plane;
}

FaceSelection faces_above_plane(const TriangleMesh& mesh, const Plane& plane) {
    FaceSelection sel;
    const double threshold = dot(plane.point, plane.normal);
    for (std::uint32_t i = 0; i < mesh.faces.size(); ++i)
        if (dot(face_midpoint(mesh, mesh.faces[i]), plane.normal) >= threshold) sel.faces.push_back(i);
    return sel;
}

namespace {

void drop_degenerate(const TriangleMesh& mesh, std::vector<std::uint32_t>& faces) {
    std::erase_if(faces, [&](std::uint32_t f) { return face_area(mesh, mesh.faces[f]) <= 1e-14; });
}

bool within_bounds(std::size_t selected, std::size_t total, const MaskConfig& cfg) {
    if (selected == 0) return false;
    const double frac = static_cast<double>(selected) / static_cast<double>(total);
    return frac >= cfg.min_face_fraction && frac <= cfg.max_face_fraction;
}

void require_faces(const TriangleMesh& mesh) {
    if (mesh.faces.empty()) throw std::invalid_argument("mask generation needs a mesh with faces");
}

}  // namespace

MaskGeometry gen_mask_type1(const TriangleMesh& mesh, Rng& rng, const MaskConfig& cfg) {
    require_faces(mesh);
    const Aabb box = mesh.bounds();
    std::string last_failure = "selection never met the size bounds";
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        const Plane plane = sample_plane(rng, box);
        auto sel = faces_above_plane(mesh, plane);
        if (cfg.exclude_degenerate_faces) drop_degenerate(mesh, sel.faces);
        if (!within_bounds(sel.faces.size(), mesh.faces.size(), cfg)) continue;

        std::vector<Vec3> mids;
        mids.reserve(sel.faces.size());
        for (const auto f : sel.faces) mids.push_back(face_midpoint(mesh, mesh.faces[f]));
        TriangleMesh hull;
        try {
            hull = convex_hull3(mids);
        } catch (const GeometryError& e) {
            last_failure = std::string("hull degenerate: ") + e.what();
            continue;
        }
        MaskGeometry out;
        out.type = MaskType::TypeI;
        out.shape = HullMask{scale_about_centroid(hull, cfg.hull_scale)};
        out.provenance.plane = plane;
        out.provenance.selected_faces = std::move(sel.faces);
        out.provenance.attempts = attempt;
        return out;
    }
    throw MaskGenerationError("type1: " + last_failure + " after " + std::to_string(cfg.max_attempts) + " attempts",
                              cfg.max_attempts);
}

MaskGeometry gen_mask_type2(const TriangleMesh& mesh, Rng& rng, const MaskConfig& cfg) {
    require_faces(mesh);
    const Aabb box = mesh.bounds();
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        const Plane plane = sample_plane(rng, box);
        auto sel = faces_above_plane(mesh, plane);
        if (cfg.exclude_degenerate_faces) drop_degenerate(mesh, sel.faces);
        if (!within_bounds(sel.faces.size(), mesh.faces.size(), cfg)) continue;
        MaskGeometry out;
        out.type = MaskType::TypeII;
        out.shape = std::move(sel);
        out.provenance.plane = plane;
        out.provenance.attempts = attempt;
        return out;
    }
    throw MaskGenerationError("type2: selection never met the size bounds after " + std::to_string(cfg.max_attempts) +
                                  " attempts",
                              cfg.max_attempts);
}

MaskGeometry gen_mask_type3(const TriangleMesh& mesh, Rng& rng, const MaskConfig& cfg) {
    require_faces(mesh);
    if (mesh.vertices.empty()) throw std::invalid_argument("type3 needs at least one vertex");
    const auto mids = face_midpoints(mesh);
    const auto last_vertex = static_cast<std::int64_t>(mesh.vertices.size()) - 1;

    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        const Vec3 anchor = mesh.vertices[static_cast<std::size_t>(rng.uniform_int(0, last_vertex))];
        const auto count = rng.uniform_int(cfg.min_cylinders, cfg.max_cylinders);
        std::vector<CylinderSpec> cylinders;
        cylinders.reserve(static_cast<std::size_t>(count));
        for (std::int64_t k = 0; k < count; ++k) {
            CylinderSpec c;
            c.center = anchor;
            c.axis = rng.unit_vector();
            c.half_height = rng.uniform(cfg.min_cylinder_size, cfg.max_cylinder_size);
            c.radius_a = rng.uniform(cfg.min_cylinder_size, cfg.max_cylinder_size);
            c.radius_b = rng.uniform(cfg.min_cylinder_size, cfg.max_cylinder_size);
            c.frame_angle = rng.uniform(0.0, 2.0 * kPi);
            cylinders.push_back(c);
        }

        FaceSelection sel;
        for (std::uint32_t i = 0; i < mids.size(); ++i)
            if (point_in_cylinder_union(mids[i], cylinders)) sel.faces.push_back(i);
        if (cfg.exclude_degenerate_faces) drop_degenerate(mesh, sel.faces);
        if (sel.faces.empty()) continue;

        MaskGeometry out;
        out.type = MaskType::TypeIII;
        out.shape = std::move(sel);
        out.provenance.anchor = anchor;
        out.provenance.cylinders = std::move(cylinders);
        out.provenance.attempts = attempt;
        return out;
    }
    throw MaskGenerationError("type3: no face midpoint inside the cylinders after " +
                                  std::to_string(cfg.max_attempts) + " attempts",
                              cfg.max_attempts);
}

namespace {

void fill_rect(Image& img, int x0, int y0, int x1, int y1) {
    for (int y = std::max(0, y0); y < std::min(img.height, y1); ++y)
        for (int x = std::max(0, x0); x < std::min(img.width, x1); ++x) img.at(x, y) = 1;
}

void fill_disc(Image& img, double cx, double cy, double r) {
    const int x0 = static_cast<int>(std::floor(cx - r)), x1 = static_cast<int>(std::ceil(cx + r));
    const int y0 = static_cast<int>(std::floor(cy - r)), y1 = static_cast<int>(std::ceil(cy + r));
    for (int y = std::max(0, y0); y <= std::min(img.height - 1, y1); ++y)
        for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x) {
            const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
            if (dx * dx + dy * dy <= r * r) img.at(x, y) = 1;
        }
}

double coverage(const Image& img) {
    std::size_t on = 0;
    for (const auto v : img.data) on += v;
    return static_cast<double>(on) / static_cast<double>(img.pixel_count());
}

Image draw_random2d(Rng& rng, int res, const Random2DConfig& cfg) {
    Image img(res, res, 1, 0);
    const auto rects = rng.uniform_int(cfg.min_rectangles, cfg.max_rectangles);
    for (std::int64_t i = 0; i < rects; ++i) {
        const double w = rng.uniform(0.1, 0.5) * res;
        const double h = rng.uniform(0.1, 0.5) * res;
        const double x = rng.uniform(0.0, res - w);
        const double y = rng.uniform(0.0, res - h);
        fill_rect(img, static_cast<int>(x), static_cast<int>(y), static_cast<int>(x + w), static_cast<int>(y + h));
    }
    if (cfg.strokes && rng.uniform() < 0.5) {
        double cx = rng.uniform(0.0, res), cy = rng.uniform(0.0, res);
        double heading = rng.uniform(0.0, 2.0 * kPi);
        const double radius = rng.uniform(0.01, 0.04) * res;
        const auto steps = rng.uniform_int(8, 24);
        for (std::int64_t s = 0; s < steps; ++s) {
            heading += rng.uniform(-0.8, 0.8);
            const double step = 0.05 * res;
            for (int k = 0; k < 4; ++k) {
                cx += std::cos(heading) * step / 4;
                cy += std::sin(heading) * step / 4;
                fill_disc(img, cx, cy, radius);
            }
        }
    }
    return img;
}

}  // namespace

MaskGeometry gen_random2d_masks(Rng& rng, int resolution, const MaskConfig& cfg) {
    if (resolution <= 0) throw std::invalid_argument("resolution must be positive");
    ViewMasks masks;
    int attempts = 0;
    for (auto& view : masks.views) {
        bool ok = false;
        for (int attempt = 0; attempt < cfg.max_attempts && !ok; ++attempt) {
            ++attempts;
            view = draw_random2d(rng, resolution, cfg.random2d);
            const double c = coverage(view);
            ok = c >= cfg.random2d.min_coverage && c <= cfg.random2d.max_coverage;
        }
        if (!ok) {
            // Centered square covering the midpoint of the coverage range.
            const double target = 0.5 * (cfg.random2d.min_coverage + cfg.random2d.max_coverage);
            const int side = static_cast<int>(std::lround(std::sqrt(target) * resolution));
            const int off = (resolution - side) / 2;
            view = Image(resolution, resolution, 1, 0);
            fill_rect(view, off, off, off + side, off + side);
        }
    }
    MaskGeometry out;
    out.type = MaskType::Random2D;
    out.shape = std::move(masks);
    out.provenance.attempts = attempts;
    return out;
}

MaskGeometry generate_mask(MaskType type, const TriangleMesh& mesh, Rng& rng, int resolution, const MaskConfig& cfg) {
    switch (type) {
        case MaskType::TypeI: return gen_mask_type1(mesh, rng, cfg);
        case MaskType::TypeII: return gen_mask_type2(mesh, rng, cfg);
        case MaskType::TypeIII: return gen_mask_type3(mesh, rng, cfg);
        case MaskType::Random2D: return gen_random2d_masks(rng, resolution, cfg);
        case MaskType::User: break;
    }
    throw std::invalid_argument("user masks are built from primitives, not sampled");
}

TriangleMesh tessellate(const Primitive& prim, const TessellationOptions& opts) {
    TriangleMesh local;
    auto& V = local.vertices;
    auto& F = local.faces;
    const auto seg = static_cast<std::uint32_t>(std::max(3, opts.segments));

    switch (prim.kind) {
        case Primitive::Kind::Box: {
            for (int i = 0; i < 8; ++i) V.push_back({(i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0});
            F = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                 {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
            break;
        }
        case Primitive::Kind::Ellipsoid: {
            const auto rings = static_cast<std::uint32_t>(std::max(2, opts.rings));
            V.push_back({0, 0, 1});
            for (std::uint32_t r = 1; r < rings; ++r) {
                const double theta = kPi * r / rings;
                for (std::uint32_t s = 0; s < seg; ++s) {
                    const double phi = 2.0 * kPi * s / seg;
                    V.push_back({std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)});
                }
            }
            V.push_back({0, 0, -1});
            const auto south = static_cast<std::uint32_t>(V.size() - 1);
            auto ring = [&](std::uint32_t r, std::uint32_t s) { return 1 + (r - 1) * seg + (s % seg); };
            for (std::uint32_t s = 0; s < seg; ++s) F.push_back({0, ring(1, s), ring(1, s + 1)});
            for (std::uint32_t r = 1; r + 1 < rings; ++r)
                for (std::uint32_t s = 0; s < seg; ++s) {
                    F.push_back({ring(r, s), ring(r + 1, s), ring(r + 1, s + 1)});
                    F.push_back({ring(r, s), ring(r + 1, s + 1), ring(r, s + 1)});
                }
            for (std::uint32_t s = 0; s < seg; ++s) F.push_back({south, ring(rings - 1, s + 1), ring(rings - 1, s)});
            break;
        }
        case Primitive::Kind::Cylinder: {
            for (std::uint32_t s = 0; s < seg; ++s) {
                const double phi = 2.0 * kPi * s / seg;
                V.push_back({std::cos(phi), std::sin(phi), -1.0});
                V.push_back({std::cos(phi), std::sin(phi), 1.0});
            }
            const auto bottom = static_cast<std::uint32_t>(V.size());
            V.push_back({0, 0, -1});
            V.push_back({0, 0, 1});
            const std::uint32_t top = bottom + 1;
            for (std::uint32_t s = 0; s < seg; ++s) {
                const std::uint32_t a0 = 2 * s, a1 = 2 * s + 1;
                const std::uint32_t b0 = 2 * ((s + 1) % seg), b1 = b0 + 1;
                F.push_back({a0, b0, b1});
                F.push_back({a0, b1, a1});
                F.push_back({bottom, b0, a0});
                F.push_back({top, a1, b1});
            }
            break;
        }
    }

    const Mat3 rot = prim.rotation.to_matrix();
    for (auto& v : V) v = prim.center + rot * Vec3{v.x * prim.size.x, v.y * prim.size.y, v.z * prim.size.z};
    return local;
}

MaskGeometry primitives_to_mask(std::span<const Primitive> primitives, const TessellationOptions& opts) {
    if (primitives.empty()) throw std::invalid_argument("primitive list is empty");
    PrimitiveSet set;
    for (std::size_t i = 0; i < primitives.size(); ++i) {
        const auto& p = primitives[i];
        const auto& s = p.size;
        if (!(s.x > 0.0 && s.y > 0.0 && s.z > 0.0) || !std::isfinite(s.x + s.y + s.z))
            throw std::invalid_argument("primitive " + std::to_string(i) + " has a non-positive size");
        if (!std::isfinite(p.center.x + p.center.y + p.center.z))
            throw std::invalid_argument("primitive " + std::to_string(i) + " has a non-finite center");
        const auto& q = p.rotation;
        const double qn = q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
        if (!(qn > 1e-12) || !std::isfinite(qn))
            throw std::invalid_argument("primitive " + std::to_string(i) + " has an invalid rotation");
        set.tessellation.append(tessellate(p, opts));
    }
    set.primitives.assign(primitives.begin(), primitives.end());
    MaskGeometry out;
    out.type = MaskType::User;
    out.shape = std::move(set);
    return out;
}

}  // namespace mvedit

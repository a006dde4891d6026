#include "mvedit/hull.hpp"

#include <unordered_map>

namespace mvedit {

namespace {

struct HullFace {
    std::array<int, 3> v{};
    Vec3 normal;
    double offset{};  // dot(normal, x) == offset on the plane
    std::vector<int> outside;
    bool alive{true};
};

std::uint64_t edge_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

class QuickHull {
public:
    explicit QuickHull(std::span<const Vec3> pts) : pts_(pts) {
        Vec3 maxabs;
        for (const auto& p : pts_) maxabs = component_max(maxabs, {std::abs(p.x), std::abs(p.y), std::abs(p.z)});
        const double scale = maxabs.x + maxabs.y + maxabs.z;
        // Plane distances on sliver faces carry far more than a few ulps of error;
        // a tighter band lets near-coplanar eyes split the visible set.
        tol_ = 1e-11 * scale;
        degenerate_tol_ = 1e-9 * std::max(1.0, scale);
    }

    TriangleMesh run() {
        build_simplex();
        for (std::size_t i = 0; i < faces_.size(); ++i) {
            if (faces_[i].alive && !faces_[i].outside.empty()) add_point(static_cast<int>(i));
        }
        return extract();
    }

private:
    double distance(const HullFace& f, int p) const { return dot(f.normal, pts_[p]) - f.offset; }

    int make_face(int a, int b, int c) {
        HullFace f;
        f.v = {a, b, c};
        const Vec3& pa = pts_[a];
        f.normal = normalized(cross(pts_[b] - pa, pts_[c] - pa));
        f.offset = dot(f.normal, pa);
        const int id = static_cast<int>(faces_.size());
        faces_.push_back(std::move(f));
        edges_[edge_key(a, b)] = id;
        edges_[edge_key(b, c)] = id;
        edges_[edge_key(c, a)] = id;
        return id;
    }

    void kill_face(int id) {
        auto& f = faces_[id];
        f.alive = false;
        for (int k = 0; k < 3; ++k) {
            const auto it = edges_.find(edge_key(f.v[k], f.v[(k + 1) % 3]));
            if (it != edges_.end() && it->second == id) edges_.erase(it);
        }
    }

    void assign(int p, std::span<const int> candidates) {
        int best = -1;
        double best_d = tol_;
        for (const int fid : candidates) {
            const double d = distance(faces_[fid], p);
            if (d > best_d) {
                best_d = d;
                best = fid;
            }
        }
        if (best >= 0) faces_[best].outside.push_back(p);
    }

    void build_simplex() {
        const int n = static_cast<int>(pts_.size());
        if (n < 4) throw GeometryError("convex hull needs at least 4 points");

        // Extreme points along each axis; pick the most distant pair.
        std::array<int, 6> ext{0, 0, 0, 0, 0, 0};
        for (int i = 1; i < n; ++i) {
            for (int ax = 0; ax < 3; ++ax) {
                if (pts_[i][ax] < pts_[ext[2 * ax]][ax]) ext[2 * ax] = i;
                if (pts_[i][ax] > pts_[ext[2 * ax + 1]][ax]) ext[2 * ax + 1] = i;
            }
        }
        int i0 = 0, i1 = 0;
        double best = -1.0;
        for (int a = 0; a < 6; ++a)
            for (int b = a + 1; b < 6; ++b) {
                const double d = length(P(ext[a]) - P(ext[b]));
                if (d > best) {
                    best = d;
                    i0 = ext[a];
                    i1 = ext[b];
                }
            }
        if (best <= degenerate_tol_) throw GeometryError("convex hull input is degenerate (all points coincide)");

        const Vec3 dir = normalized(P(i1) - P(i0));
        int i2 = -1;
        best = degenerate_tol_;
        for (int i = 0; i < n; ++i) {
            const double d = length(cross(P(i) - P(i0), dir));
            if (d > best) {
                best = d;
                i2 = i;
            }
        }
        if (i2 < 0) throw GeometryError("convex hull input is degenerate (collinear)");

        const Vec3 pn = normalized(cross(P(i1) - P(i0), P(i2) - P(i0)));
        int i3 = -1;
        best = degenerate_tol_;
        for (int i = 0; i < n; ++i) {
            const double d = std::abs(dot(P(i) - P(i0), pn));
            if (d > best) {
                best = d;
                i3 = i;
            }
        }
        if (i3 < 0) throw GeometryError("convex hull input is degenerate (coplanar)");

        if (dot(P(i3) - P(i0), pn) > 0.0) std::swap(i1, i2);
        // i3 is now below plane (i0, i1, i2), so these windings face outward.
        const std::array<int, 4> ids{make_face(i0, i1, i2), make_face(i0, i3, i1), make_face(i1, i3, i2),
                                     make_face(i2, i3, i0)};
        for (int i = 0; i < n; ++i) {
            if (i == i0 || i == i1 || i == i2 || i == i3) continue;
            assign(i, ids);
        }
    }

    void add_point(int fid) {
        auto& start = faces_[fid];
        int eye = start.outside.front();
        double far = distance(start, eye);
        for (const int p : start.outside) {
            const double d = distance(start, p);
            if (d > far) {
                far = d;
                eye = p;
            }
        }

        // Flood the set of faces visible from the eye point.
        std::vector<int> visible{fid};
        std::vector<char> mark(faces_.size(), 0);
        mark[fid] = 1;
        std::vector<std::pair<int, int>> horizon;
        for (std::size_t k = 0; k < visible.size(); ++k) {
            const auto& f = faces_[visible[k]];
            for (int e = 0; e < 3; ++e) {
                const int a = f.v[e];
                const int b = f.v[(e + 1) % 3];
                const auto it = edges_.find(edge_key(b, a));
                if (it == edges_.end()) throw GeometryError("convex hull lost manifold adjacency");
                const int nb = it->second;
                if (mark[nb] == 1) continue;
                if (mark[nb] == 0 && distance(faces_[nb], eye) > tol_) {
                    mark[nb] = 1;
                    visible.push_back(nb);
                } else {
                    mark[nb] = 2;
                }
            }
        }
        // Horizon edges: edges of visible faces whose twin face is not visible.
        for (const int v : visible) {
            const auto& f = faces_[v];
            for (int e = 0; e < 3; ++e) {
                const int a = f.v[e];
                const int b = f.v[(e + 1) % 3];
                if (mark[edges_.at(edge_key(b, a))] != 1) horizon.emplace_back(a, b);
            }
        }

        std::vector<int> orphans;
        for (const int v : visible) {
            auto& f = faces_[v];
            for (const int p : f.outside)
                if (p != eye) orphans.push_back(p);
            f.outside.clear();
            f.outside.shrink_to_fit();
        }
        for (const int v : visible) kill_face(v);

        std::vector<int> created;
        created.reserve(horizon.size());
        for (const auto& [a, b] : horizon) created.push_back(make_face(a, b, eye));
        for (const int p : orphans) assign(p, created);
    }

    TriangleMesh extract() const {
        TriangleMesh mesh;
        std::unordered_map<int, std::uint32_t> remap;
        for (const auto& f : faces_) {
            if (!f.alive) continue;
            Face out{};
            for (int k = 0; k < 3; ++k) {
                const int src = f.v[k];
                auto [it, inserted] = remap.try_emplace(src, static_cast<std::uint32_t>(mesh.vertices.size()));
                if (inserted) mesh.vertices.push_back(P(src));
                out[k] = it->second;
            }
            mesh.faces.push_back(out);
        }
        return mesh;
    }

    const Vec3& P(int i) const { return pts_[i]; }

    std::span<const Vec3> pts_;
    double tol_{};
    double degenerate_tol_{};
    std::vector<HullFace> faces_;
    std::unordered_map<std::uint64_t, int> edges_;
};

}  // namespace

TriangleMesh convex_hull3(std::span<const Vec3> points) { return QuickHull(points).run(); }

Vec3 vertex_centroid(const TriangleMesh& mesh) {
    Vec3 c;
    for (const auto& v : mesh.vertices) c += v;
    return mesh.vertices.empty() ? c : c / static_cast<double>(mesh.vertices.size());
}

TriangleMesh scale_about_centroid(const TriangleMesh& mesh, double factor) {
    if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
    TriangleMesh out = mesh;
    const Vec3 c = vertex_centroid(mesh);
    for (auto& v : out.vertices) v = c + (v - c) * factor;
    return out;
}

double max_face_distance(const TriangleMesh& hull, const Vec3& p) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& f : hull.faces) {
        const Vec3& a = hull.vertices[f[0]];
        const Vec3 n = normalized(cross(hull.vertices[f[1]] - a, hull.vertices[f[2]] - a));
        worst = std::max(worst, dot(n, p - a));
    }
    return worst;
}

}  // namespace mvedit

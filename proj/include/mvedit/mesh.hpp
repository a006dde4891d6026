// mesh.hpp - triangle mesh container, OBJ ingestion and normalization.
//
// Conventions:
// - Faces are triangles only; polygons are fan-triangulated on load.
// - Indices are 0-based in memory (OBJ is 1-based; converted in the parser).
// - colors/uvs are either empty or exactly one entry per vertex.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mvedit/geometry.hpp"

namespace mvedit {

using Face = std::array<std::uint32_t, 3>;
using Uv = std::array<double, 2>;

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<Vec3> colors;  // RGB in [0,1]
    std::vector<Uv> uvs;

    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_faces() const { return faces.size(); }
    bool has_colors() const { return !colors.empty(); }

    Aabb bounds() const;

    // Throws std::invalid_argument if any index is out of range or the
    // attribute arrays do not match the vertex count.
    void validate() const;

    // Append another mesh, offsetting its indices. Attributes are kept only if
    // both meshes carry them.
    void append(const TriangleMesh& other);
};

// Oriented plane through `point`; the positive side is where dot(x - point, normal) >= 0.
struct Plane {
    Vec3 point;
    Vec3 normal;

    double signed_distance(const Vec3& x) const { return dot(x, normal) - dot(point, normal); }
};

// Maps source coordinates to normalized ones: x' = (x + translation) * scale.
struct NormalizeTransform {
    Vec3 translation;
    double scale{1.0};

    Vec3 apply(const Vec3& p) const { return (p + translation) * scale; }
    Vec3 invert(const Vec3& p) const { return p / scale - translation; }
};

class ObjParseError : public std::runtime_error {
public:
    ObjParseError(std::size_t line, const std::string& what)
        : std::runtime_error("obj:" + std::to_string(line) + ": " + what), line_(line) {}

    // 1-based line number; 0 when the error is not tied to a line.
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parses the v / vt / vn / f subset of Wavefront OBJ. Extended vertex lines
// "v x y z r g b" supply per-vertex color. Materials, groups and normals are ignored.
TriangleMesh parse_obj(std::string_view text);
TriangleMesh load_obj(const std::string& path);

// Writes vertices with round-trip precision so parse_obj(write_obj(m)) == m.
std::string write_obj(const TriangleMesh& mesh);
void save_obj(const TriangleMesh& mesh, const std::string& path);

struct NormalizeOptions {
    double target_extent{1.0};  // longest bbox side after normalization
};

struct NormalizedMesh {
    TriangleMesh mesh;
    NormalizeTransform transform;
};

// Centers the bbox at the origin and scales its longest side to target_extent.
NormalizedMesh normalize_mesh(const TriangleMesh& mesh, const NormalizeOptions& opts = {});

inline Vec3 face_midpoint(const TriangleMesh& mesh, const Face& f) {
    return (mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0;
}

std::vector<Vec3> face_midpoints(const TriangleMesh& mesh);

double face_area(const TriangleMesh& mesh, const Face& f);

}  // namespace mvedit

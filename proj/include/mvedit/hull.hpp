#pragma once

#include <span>

#include "mvedit/mesh.hpp"

namespace mvedit {

// 3D convex hull (quickhull). The result is a closed triangle mesh with
// outward-facing winding and only the points that lie on the hull as vertices.
// Throws GeometryError for fewer than 4 points or collinear/coplanar input.
TriangleMesh convex_hull3(std::span<const Vec3> points);

// Scales every vertex radially about the vertex centroid.
TriangleMesh scale_about_centroid(const TriangleMesh& mesh, double factor);

Vec3 vertex_centroid(const TriangleMesh& mesh);

// Largest signed distance of `p` to any face plane of `hull` (positive = outside).
double max_face_distance(const TriangleMesh& hull, const Vec3& p);

}  // namespace mvedit

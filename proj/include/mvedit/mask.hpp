// mask.hpp - 3D inpainting mask synthesis.
//
// Three 3D-consistent mask families are sampled from a shape:
//   Type I   coarse blob: convex hull of the face midpoints on one side of a
//            random plane, inflated about its centroid.
//   Type II  plane cut: the faces themselves whose midpoint lies above the plane.
//   Type III surface patch: faces whose midpoint falls inside a union of
//            elliptical cylinders centered on one random vertex.
// Random2D draws independent per-view image masks (ablation baseline) and
// User masks come from interactively placed primitives.
#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mvedit/image.hpp"
#include "mvedit/mesh.hpp"
#include "mvedit/random.hpp"

namespace mvedit {

enum class MaskType { TypeI, TypeII, TypeIII, Random2D, User };

std::string_view to_string(MaskType t);
MaskType mask_type_from_string(std::string_view s);

struct CylinderSpec {
    Vec3 center;
    Vec3 axis;  // unit
    double half_height{};
    double radius_a{};
    double radius_b{};
    double frame_angle{};  // rotation of the ellipse axes about `axis`

    // Unit vectors of the ellipse's a- and b-axes; orthogonal to `axis`.
    std::pair<Vec3, Vec3> frame() const;
    bool contains(const Vec3& q) const;
};

bool point_in_cylinder_union(const Vec3& q, std::span<const CylinderSpec> cylinders);

struct Primitive {
    enum class Kind { Ellipsoid, Box, Cylinder };

    Kind kind{Kind::Ellipsoid};
    Vec3 center;
    // Ellipsoid: radii. Box: half-extents. Cylinder: (radius x, radius y, half-height), axis = local z.
    Vec3 size{0.1, 0.1, 0.1};
    Quat rotation;

    bool operator==(const Primitive&) const = default;
};

std::string_view to_string(Primitive::Kind k);
Primitive::Kind primitive_kind_from_string(std::string_view s);

struct NoMask {};
struct HullMask {
    TriangleMesh hull;
};
struct FaceSelection {
    std::vector<std::uint32_t> faces;  // sorted, unique
};
struct PrimitiveSet {
    std::vector<Primitive> primitives;
    TriangleMesh tessellation;
};
struct ViewMasks {
    std::array<Image, 4> views;  // binary {0,1}
};

// How the mask was drawn; kept for validation and debugging.
struct MaskProvenance {
    std::optional<Plane> plane;
    std::vector<std::uint32_t> selected_faces;  // Type I: faces whose midpoints span the hull
    std::optional<Vec3> anchor;                 // Type III: sampled vertex
    std::vector<CylinderSpec> cylinders;        // Type III
    int attempts{0};
};

struct MaskGeometry {
    MaskType type{MaskType::User};
    std::variant<NoMask, HullMask, FaceSelection, PrimitiveSet, ViewMasks> shape;
    MaskProvenance provenance;

    bool empty() const { return std::holds_alternative<NoMask>(shape); }
};

struct Random2DConfig {
    double min_coverage{0.05};
    double max_coverage{0.5};
    int min_rectangles{1};
    int max_rectangles{4};
    bool strokes{true};
};

struct MaskConfig {
    double min_face_fraction{0.02};  // Type I / II selection bounds
    double max_face_fraction{0.90};
    int max_attempts{100};
    double hull_scale{1.2};
    int min_cylinders{3};
    int max_cylinders{6};
    double min_cylinder_size{0.1};
    double max_cylinder_size{0.3};
    bool exclude_degenerate_faces{false};
    Random2DConfig random2d;
};

class MaskGenerationError : public std::runtime_error {
public:
    MaskGenerationError(const std::string& what, int attempts) : std::runtime_error(what), attempts_(attempts) {}
    int attempts() const { return attempts_; }

private:
    int attempts_;
};

// Point uniform in the box, normal uniform on the unit sphere.
Plane sample_plane(Rng& rng, const Aabb& bbox);

// Faces whose midpoint m satisfies dot(m, n) >= dot(p, n).
FaceSelection faces_above_plane(const TriangleMesh& mesh, const Plane& plane);

MaskGeometry gen_mask_type1(const TriangleMesh& mesh, Rng& rng, const MaskConfig& cfg = {});
MaskGeometry gen_mask_type2(const TriangleMesh& mesh, Rng& rng, const MaskConfig& cfg = {});
MaskGeometry gen_mask_type3(const TriangleMesh& mesh, Rng& rng, const MaskConfig& cfg = {});
MaskGeometry gen_random2d_masks(Rng& rng, int resolution, const MaskConfig& cfg = {});

// Dispatches on type; TypeI/II/III/Random2D only.
MaskGeometry generate_mask(MaskType type, const TriangleMesh& mesh, Rng& rng, int resolution,
                           const MaskConfig& cfg = {});

struct TessellationOptions {
    int segments{48};  // around the ellipsoid / cylinder axis
    int rings{24};     // ellipsoid latitude bands
};

TriangleMesh tessellate(const Primitive& prim, const TessellationOptions& opts = {});

// Validates the primitives and tessellates them into one mask mesh.
MaskGeometry primitives_to_mask(std::span<const Primitive> primitives, const TessellationOptions& opts = {});

}  // namespace mvedit

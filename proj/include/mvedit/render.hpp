// render.hpp - software z-buffer rasterizer with an object-id pass, and a
// brute-force ray caster used as an independent visibility oracle.
//
// Pixel (x, y) has its center at (x + 0.5, y + 0.5); y grows downward. Both the
// rasterizer and the ray caster sample exactly those centers, with no
// anti-aliasing on the id or depth buffers.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mvedit/camera.hpp"
#include "mvedit/image.hpp"
#include "mvedit/mesh.hpp"

namespace mvedit {

inline constexpr std::uint32_t kBackgroundId = 0;
inline constexpr std::uint32_t kShapeId = 1;
inline constexpr std::uint32_t kMaskId = 2;

struct SceneObject {
    const TriangleMesh* mesh{};
    std::uint32_t id{kShapeId};
    // Optional per-face flags (one byte per face). Pixels whose frontmost face is
    // flagged record `selected_id` instead of `id`.
    std::span<const std::uint8_t> selected{};
    std::uint32_t selected_id{kMaskId};
    // Unlit flat color; otherwise vertex colors (or the default albedo) are shaded.
    std::optional<Vec3> flat_color{};
};

struct ShadingOptions {
    bool lit{true};  // Lambertian 3-light rig + ambient; false = raw albedo
    Vec3 default_albedo{0.72, 0.72, 0.72};
    Vec3 background{1.0, 1.0, 1.0};
};

struct RenderBuffers {
    int width{};
    int height{};
    Image color;                    // RGB8
    std::vector<double> depth;      // view-space depth, +inf for background
    std::vector<std::uint32_t> ids;  // kBackgroundId for background

    std::uint32_t id_at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }
    // Binary {0,1} image of the pixels holding `id`.
    Image id_mask(std::uint32_t id) const;
};

// Incremental z-buffer: objects drawn later only win where strictly nearer.
class Rasterizer {
public:
    Rasterizer(const CameraPose& camera, int width, int height);

    void draw(const SceneObject& object);
    RenderBuffers resolve(const ShadingOptions& shading = {}) const;
    // Id pass only; skips shading.
    Image id_mask(std::uint32_t id) const;

private:
    struct Fragment {
        double depth;
        int object;
        std::uint32_t face;
        float b1, b2;  // perspective-correct barycentrics of vertices 1 and 2
    };

    CameraPose camera_;
    int width_, height_;
    double focal_;  // pixels per unit of tan(angle)
    std::vector<SceneObject> objects_;
    std::vector<Fragment> frags_;
};

RenderBuffers rasterize_scene(std::span<const SceneObject> scene, const CameraPose& camera, int resolution,
                              const ShadingOptions& shading = {});

// Color-only render at `factor`x resolution box-filtered down; ids/depth are
// taken from the single-sample pass so they stay crisp.
Image render_color_supersampled(std::span<const SceneObject> scene, const CameraPose& camera, int resolution,
                                int factor, const ShadingOptions& shading = {});

// Per-pixel nearest hit by ray/triangle intersection through pixel centers.
std::vector<std::uint32_t> raycast_visibility(std::span<const SceneObject> scene, const CameraPose& camera,
                                              int resolution);

}  // namespace mvedit

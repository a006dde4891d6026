// multiview.hpp - conditioning triples for a (shape, mask) pair.
//
//   gt     color grid of the shape alone
//   mask   binary grid, 1 exactly where the mask geometry is frontmost
//   masked color grid of the shape with mask pixels replaced by the fill color
//
// Hull and primitive masks are drawn as separate geometry into the shape's
// z-buffer; face selections are rendered as per-face flags on the shape itself,
// so coincident surfaces never compete in the depth test.
#pragma once

#include "mvedit/grid.hpp"
#include "mvedit/mask.hpp"
#include "mvedit/render.hpp"

namespace mvedit {

enum class FillMode { White, Purple };

Vec3 fill_color(FillMode mode);

struct RenderConfig {
    int resolution{512};  // per view; the grid is twice this on each side
    FillMode fill{FillMode::White};
    ShadingOptions shading;
    int supersample{1};  // color-only supersampling factor
};

struct RenderTuple {
    MultiviewGrid gt;
    MultiviewGrid masked;
    MultiviewGrid mask;
};

RenderTuple render_tuple(const TriangleMesh& shape, const MaskGeometry& mask, const CameraRig& rig,
                         const RenderConfig& cfg = {});

// Replaces pixels where mask == 1 with `fill`; both images must share width/height.
Image composite_fill(const Image& color, const Image& mask, const Vec3& fill);

}  // namespace mvedit

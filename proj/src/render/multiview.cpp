#include "mvedit/multiview.hpp"

#include <stdexcept>

namespace mvedit {

Vec3 fill_color(FillMode mode) {
    switch (mode) {
        case FillMode::White: return {1.0, 1.0, 1.0};
        case FillMode::Purple: return {160.0 / 255.0, 32.0 / 255.0, 240.0 / 255.0};
    }
    return {1.0, 1.0, 1.0};
}

Image composite_fill(const Image& color, const Image& mask, const Vec3& fill) {
    if (color.width != mask.width || color.height != mask.height || mask.channels != 1)
        throw std::invalid_argument("composite: color and mask dimensions differ");
    Image out = color;
    const std::array<std::uint8_t, 3> rgb{static_cast<std::uint8_t>(std::lround(fill.x * 255.0)),
                                          static_cast<std::uint8_t>(std::lround(fill.y * 255.0)),
                                          static_cast<std::uint8_t>(std::lround(fill.z * 255.0))};
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        if (!mask.data[i]) continue;
        for (int c = 0; c < out.channels; ++c) out.data[i * out.channels + c] = rgb[static_cast<std::size_t>(c % 3)];
    }
    return out;
}

namespace {

struct ViewResult {
    Image gt;
    Image mask;
};

ViewResult render_view(const TriangleMesh& shape, const MaskGeometry& mask, const CameraPose& pose, int view,
                       const RenderConfig& cfg) {
    const int res = cfg.resolution;
    SceneObject shape_obj{&shape, kShapeId};
    std::vector<std::uint8_t> flags;

    if (const auto* sel = std::get_if<FaceSelection>(&mask.shape)) {
        flags.assign(shape.faces.size(), 0);
        for (const auto f : sel->faces) {
            if (f >= flags.size()) throw std::invalid_argument("face selection index out of range");
            flags[f] = 1;
        }
        shape_obj.selected = flags;
        shape_obj.selected_id = kMaskId;
    }

    Rasterizer raster(pose, res, res);
    raster.draw(shape_obj);

    ViewResult out;
    const TriangleMesh* mask_mesh = nullptr;
    if (const auto* hull = std::get_if<HullMask>(&mask.shape)) mask_mesh = &hull->hull;
    if (const auto* prims = std::get_if<PrimitiveSet>(&mask.shape)) mask_mesh = &prims->tessellation;

    if (mask_mesh == nullptr) {
        out.gt = raster.resolve(cfg.shading).color;
        if (const auto* views = std::get_if<ViewMasks>(&mask.shape)) {
            const Image& m = views->views[static_cast<std::size_t>(view)];
            if (m.width != res || m.height != res || m.channels != 1)
                throw std::invalid_argument("random 2D mask resolution does not match the render resolution");
            out.mask = m;
        } else {
            out.mask = raster.id_mask(kMaskId);
        }
    } else {
        // Shading only depends on the winning fragment, so resolving before and
        // after the mask draw gives identical shape colors.
        out.gt = raster.resolve(cfg.shading).color;
        raster.draw(SceneObject{mask_mesh, kMaskId});
        out.mask = raster.id_mask(kMaskId);
    }

    if (cfg.supersample > 1) {
        const std::array<SceneObject, 1> only_shape{SceneObject{&shape, kShapeId}};
        out.gt = render_color_supersampled(only_shape, pose, res, cfg.supersample, cfg.shading);
    }
    return out;
}

}  // namespace

RenderTuple render_tuple(const TriangleMesh& shape, const MaskGeometry& mask, const CameraRig& rig,
                         const RenderConfig& cfg) {
    if (shape.faces.empty()) throw std::invalid_argument("render_tuple: shape has no faces");
    const auto poses = rig.poses();
    std::array<Image, 4> gt, masked, bin;
    const Vec3 fill = fill_color(cfg.fill);
    for (int v = 0; v < 4; ++v) {
        const auto i = static_cast<std::size_t>(v);
        auto r = render_view(shape, mask, poses[i], v, cfg);
        masked[i] = composite_fill(r.gt, r.mask, fill);
        gt[i] = std::move(r.gt);
        bin[i] = std::move(r.mask);
    }
    return {assemble_grid(gt, poses, Modality::Color), assemble_grid(masked, poses, Modality::Color),
            assemble_grid(bin, poses, Modality::Binary)};
}

}  // namespace mvedit

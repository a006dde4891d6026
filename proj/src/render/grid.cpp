#include "mvedit/grid.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace mvedit {

namespace {

constexpr std::array<const char*, 4> kQuadrantNames{"top-left", "top-right", "bottom-left", "bottom-right"};

void blit(const Image& src, Image& dst, int ox, int oy) {
    const std::size_t row = static_cast<std::size_t>(src.width) * src.channels;
    for (int y = 0; y < src.height; ++y)
        std::copy_n(src.data.begin() + static_cast<std::ptrdiff_t>(y * row), row,
                    dst.data.begin() + static_cast<std::ptrdiff_t>(dst.index(ox, oy + y)));
}

Image crop(const Image& src, int ox, int oy, int w, int h) {
    Image out(w, h, src.channels);
    const std::size_t row = static_cast<std::size_t>(w) * src.channels;
    for (int y = 0; y < h; ++y)
        std::copy_n(src.data.begin() + static_cast<std::ptrdiff_t>(src.index(ox, oy + y)), row,
                    out.data.begin() + static_cast<std::ptrdiff_t>(y * row));
    return out;
}

}  // namespace

MultiviewGrid assemble_grid(const std::array<Image, 4>& views, const std::array<CameraPose, 4>& poses,
                            Modality modality) {
    const Image& first = views[0];
    for (const auto& v : views)
        if (!v.same_shape(first) || v.width <= 0 || v.height <= 0)
            throw std::invalid_argument("grid views must share non-empty dimensions and channel count");
    if (modality == Modality::Binary && first.channels != 1)
        throw std::invalid_argument("binary grids must be single-channel");

    MultiviewGrid grid;
    grid.modality = modality;
    grid.poses = poses;
    grid.image = Image(2 * first.width, 2 * first.height, first.channels);
    for (int q = 0; q < 4; ++q)
        blit(views[static_cast<std::size_t>(q)], grid.image, (q % 2) * first.width, (q / 2) * first.height);
    return grid;
}

std::array<Image, 4> split_image(const Image& grid) {
    if (grid.width % 2 != 0 || grid.height % 2 != 0 || grid.width == 0 || grid.height == 0)
        throw std::invalid_argument("grid dimensions must be even, got " + std::to_string(grid.width) + "x" +
                                    std::to_string(grid.height));
    const int w = grid.width / 2, h = grid.height / 2;
    std::array<Image, 4> out;
    for (int q = 0; q < 4; ++q) out[static_cast<std::size_t>(q)] = crop(grid, (q % 2) * w, (q / 2) * h, w, h);
    return out;
}

SplitViews split_grid(const MultiviewGrid& grid) { return {split_image(grid.image), grid.poses}; }

std::vector<std::uint8_t> encode_grid_png(const MultiviewGrid& grid) {
    return encode_png(grid.modality == Modality::Binary ? binary_to_gray(grid.image) : grid.image);
}

void save_grid_png(const MultiviewGrid& grid, const std::string& path) {
    write_png(grid.modality == Modality::Binary ? binary_to_gray(grid.image) : grid.image, path);
}

std::string poses_to_json(const std::array<CameraPose, 4>& poses) {
    nlohmann::json j;
    j["layout"] = kQuadrantNames;
    j["units"] = "radians";
    auto& views = j["views"] = nlohmann::json::array();
    for (std::size_t q = 0; q < 4; ++q) {
        const auto& p = poses[q];
        views.push_back({{"quadrant", kQuadrantNames[q]},
                         {"azimuth", p.azimuth},
                         {"elevation", p.elevation},
                         {"distance", p.distance},
                         {"fov", p.fov}});
    }
    return j.dump(2) + "\n";
}

std::array<CameraPose, 4> poses_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const auto& views = j.at("views");
    if (!views.is_array() || views.size() != 4) throw std::invalid_argument("pose sidecar must list exactly 4 views");
    std::array<CameraPose, 4> out;
    for (std::size_t q = 0; q < 4; ++q) {
        const auto& v = views[q];
        if (v.at("quadrant").get<std::string>() != kQuadrantNames[q])
            throw std::invalid_argument("pose sidecar quadrant order mismatch at view " + std::to_string(q));
        out[q] = camera_pose(v.at("azimuth").get<double>(), v.at("elevation").get<double>(),
                             v.at("distance").get<double>(), v.at("fov").get<double>());
    }
    return out;
}

}  // namespace mvedit

// grid.hpp - the 2x2 multiview grid.
//
// Quadrant layout (row-major): 0 top-left, 1 top-right, 2 bottom-left,
// 3 bottom-right, holding rig views at azimuth offset + {0, pi/2, pi, 3pi/2}.
#pragma once

#include <array>
#include <string>

#include "mvedit/camera.hpp"
#include "mvedit/image.hpp"

namespace mvedit {

enum class Modality { Color, Binary };

struct MultiviewGrid {
    Image image;  // (2H, 2W); binary grids hold {0,1}
    Modality modality{Modality::Color};
    std::array<CameraPose, 4> poses;

    int view_width() const { return image.width / 2; }
    int view_height() const { return image.height / 2; }
};

struct SplitViews {
    std::array<Image, 4> views;
    std::array<CameraPose, 4> poses;
};

MultiviewGrid assemble_grid(const std::array<Image, 4>& views, const std::array<CameraPose, 4>& poses,
                            Modality modality);
SplitViews split_grid(const MultiviewGrid& grid);

// Quadrant extraction on a bare image (e.g. a backend result).
std::array<Image, 4> split_image(const Image& grid);

// Binary grids are written as {0,255} grayscale.
void save_grid_png(const MultiviewGrid& grid, const std::string& path);
std::vector<std::uint8_t> encode_grid_png(const MultiviewGrid& grid);

// Pose sidecar: {"layout": [...], "units": "radians", "views": [{quadrant, azimuth, elevation, distance, fov}]}.
std::string poses_to_json(const std::array<CameraPose, 4>& poses);
std::array<CameraPose, 4> poses_from_json(const std::string& text);

}  // namespace mvedit

// metrics.hpp - image metrics used for evaluation and service reporting.
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "mvedit/image.hpp"

namespace mvedit {

// Rec. 601 luma of an RGB image, or the gray values of a 1-channel image.
std::vector<double> luma(const Image& img);

struct SsimParams {
    int window{11};
    double sigma{1.5};
    double k1{0.01};
    double k2{0.03};
    double dynamic_range{255.0};
};

// Mean SSIM over all fully-contained Gaussian windows, computed on luma.
// Throws std::invalid_argument on mismatched sizes or images smaller than the window.
double ssim(const Image& a, const Image& b, const SsimParams& params = {});

// Mean absolute per-channel difference (in [0,1] units) over pixels where mask == 0.
// Returns nullopt when the mask covers every pixel.
std::optional<double> unmasked_preservation(const Image& input, const Image& output, const Image& mask);

// Fraction of mask pixels per grid quadrant (row-major). Mask must be binary {0,1}.
std::array<double, 4> mask_coverage(const Image& mask_grid);

}  // namespace mvedit

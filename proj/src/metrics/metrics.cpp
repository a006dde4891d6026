#include "mvedit/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "mvedit/grid.hpp"

namespace mvedit {

std::vector<double> luma(const Image& img) {
    std::vector<double> out(img.pixel_count());
    if (img.channels == 1) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.data[i];
    } else if (img.channels == 3) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = 0.299 * img.data[3 * i] + 0.587 * img.data[3 * i + 1] + 0.114 * img.data[3 * i + 2];
    } else {
        throw std::invalid_argument("luma: unsupported channel count");
    }
    return out;
}

namespace {

// Separable "valid" filtering: output is (w - k + 1) x (h - k + 1).
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h, const std::vector<double>& kernel) {
    const int k = static_cast<int>(kernel.size());
    const int ow = w - k + 1, oh = h - k + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += kernel[static_cast<std::size_t>(i)] * src[static_cast<std::size_t>(y) * w + x + i];
            tmp[static_cast<std::size_t>(y) * ow + x] = s;
        }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += kernel[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    return out;
}

}  // namespace

double ssim(const Image& a, const Image& b, const SsimParams& params) {
    if (a.width != b.width || a.height != b.height) throw std::invalid_argument("ssim: image sizes differ");
    if (a.width < params.window || a.height < params.window)
        throw std::invalid_argument("ssim: image smaller than the window");

    std::vector<double> kernel(static_cast<std::size_t>(params.window));
    const double c = 0.5 * (params.window - 1);
    double total = 0.0;
    for (int i = 0; i < params.window; ++i) {
        const double d = i - c;
        total += kernel[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * params.sigma * params.sigma));
    }
    for (auto& v : kernel) v /= total;

    const auto x = luma(a);
    const auto y = luma(b);
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const int w = a.width, h = a.height;
    const auto mx = filter_valid(x, w, h, kernel);
    const auto my = filter_valid(y, w, h, kernel);
    const auto exx = filter_valid(xx, w, h, kernel);
    const auto eyy = filter_valid(yy, w, h, kernel);
    const auto exy = filter_valid(xy, w, h, kernel);

    const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
    const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double sx = exx[i] - mx[i] * mx[i];
        const double sy = eyy[i] - my[i] * my[i];
        const double sxy = exy[i] - mx[i] * my[i];
        sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * sxy + c2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + c1) * (sx + sy + c2));
    }
    return sum / static_cast<double>(mx.size());
}

std::optional<double> unmasked_preservation(const Image& input, const Image& output, const Image& mask) {
    if (!input.same_shape(output)) throw std::invalid_argument("preservation: input and output shapes differ");
    if (mask.width != input.width || mask.height != input.height)
        throw std::invalid_argument("preservation: mask size differs from the images");
    if (!is_binary(mask)) throw std::invalid_argument("preservation: mask must be binary {0,1}");

    std::uint64_t diff = 0;
    std::size_t kept = 0;
    const int ch = input.channels;
    for (std::size_t i = 0; i < mask.data.size(); ++i) {
        if (mask.data[i]) continue;
        ++kept;
        for (int c = 0; c < ch; ++c) {
            const auto k = i * static_cast<std::size_t>(ch) + static_cast<std::size_t>(c);
            diff += static_cast<std::uint64_t>(std::abs(int{input.data[k]} - int{output.data[k]}));
        }
    }
    if (kept == 0) return std::nullopt;
    return static_cast<double>(diff) / (static_cast<double>(kept) * ch * 255.0);
}

std::array<double, 4> mask_coverage(const Image& mask_grid) {
    if (!is_binary(mask_grid)) throw std::invalid_argument("mask coverage needs a binary {0,1} mask");
    const auto views = split_image(mask_grid);
    std::array<double, 4> out{};
    for (std::size_t q = 0; q < 4; ++q) {
        std::size_t on = 0;
        for (const auto v : views[q].data) on += v;
        out[q] = static_cast<double>(on) / static_cast<double>(views[q].pixel_count());
    }
    return out;
}

}  // namespace mvedit

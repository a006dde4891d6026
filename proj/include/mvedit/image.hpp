// image.hpp - 8-bit interleaved image and PNG codec.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvedit {

struct Image {
    int width{};
    int height{};
    int channels{};  // 1 (gray / binary) or 3 (RGB)
    std::vector<std::uint8_t> data;

    Image() = default;
    Image(int w, int h, int c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

    std::size_t index(int x, int y, int c = 0) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    std::uint8_t at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }
    std::uint8_t& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    bool same_shape(const Image& o) const { return width == o.width && height == o.height && channels == o.channels; }

    bool operator==(const Image&) const = default;
};

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> encode_png(const Image& img);
Image decode_png(std::span<const std::uint8_t> bytes);

void write_png(const Image& img, const std::string& path);
Image read_png(const std::string& path);

// Binary masks are held as {0,1} in memory and stored as {0,255} on disk.
Image binary_to_gray(const Image& mask);
// Throws ImageError if any pixel is neither 0 nor 255.
Image gray_to_binary(const Image& gray);

bool is_binary(const Image& mask);

}  // namespace mvedit

#include "mvedit/image.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

namespace mvedit {

namespace {

png_uint_32 png_format(int channels) {
    switch (channels) {
        case 1: return PNG_FORMAT_GRAY;
        case 3: return PNG_FORMAT_RGB;
        default: throw ImageError("unsupported channel count " + std::to_string(channels));
    }
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& img) {
    if (img.width <= 0 || img.height <= 0) throw ImageError("cannot encode an empty image");
    png_image pi;
    std::memset(&pi, 0, sizeof pi);
    pi.version = PNG_IMAGE_VERSION;
    pi.width = static_cast<png_uint_32>(img.width);
    pi.height = static_cast<png_uint_32>(img.height);
    pi.format = png_format(img.channels);

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&pi, nullptr, &size, 0, img.data.data(), 0, nullptr))
        throw ImageError(std::string("png encode failed: ") + pi.message);
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&pi, out.data(), &size, 0, img.data.data(), 0, nullptr))
        throw ImageError(std::string("png encode failed: ") + pi.message);
    out.resize(size);
    return out;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    png_image pi;
    std::memset(&pi, 0, sizeof pi);
    pi.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&pi, bytes.data(), bytes.size()))
        throw ImageError(std::string("png decode failed: ") + pi.message);
    const int channels = (pi.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
    pi.format = png_format(channels);
    Image img(static_cast<int>(pi.width), static_cast<int>(pi.height), channels);
    // Transparent pixels composite onto white, matching the render background.
    png_color white{255, 255, 255};
    if (!png_image_finish_read(&pi, &white, img.data.data(), 0, nullptr)) {
        png_image_free(&pi);
        throw ImageError(std::string("png decode failed: ") + pi.message);
    }
    return img;
}

void write_png(const Image& img, const std::string& path) {
    const auto bytes = encode_png(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageError("write failed for " + path);
}

Image read_png(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open " + path);
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_png(bytes);
}

Image binary_to_gray(const Image& mask) {
    Image out = mask;
    for (auto& v : out.data) v = v ? 255 : 0;
    return out;
}

Image gray_to_binary(const Image& gray) {
    if (gray.channels != 1) throw ImageError("binary mask must be single-channel");
    Image out = gray;
    for (auto& v : out.data) {
        if (v != 0 && v != 255) throw ImageError("mask contains non-binary value " + std::to_string(v));
        v = v ? 1 : 0;
    }
    return out;
}

bool is_binary(const Image& mask) {
    return mask.channels == 1 && std::all_of(mask.data.begin(), mask.data.end(), [](auto v) { return v <= 1; });
}

}  // namespace mvedit

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace vlnforge {

/// 8-bit grayscale image, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    uint8_t at(int x, int y) const { return pixels[size_t(y) * width + x]; }
    void set(int x, int y, uint8_t v) { pixels[size_t(y) * width + x] = v; }
};

/// Minimal PNG codec for the navigability bitmasks: 8-bit grayscale,
/// non-interlaced. The writer emits filter type 0 throughout; the
/// reader handles all five standard filters. Throws Error on malformed
/// input or unsupported PNG features.
std::vector<uint8_t> encode_gray_png(const GrayImage& img);
GrayImage decode_gray_png(const uint8_t* data, size_t len);

void write_gray_png(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_gray_png(const std::filesystem::path& path);

}  // namespace vlnforge

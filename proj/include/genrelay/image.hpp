#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace genrelay {

/// Single-channel pixel grid. Values must fit depth_bits (<= 16).
struct Image {
    int width = 0;
    int height = 0;
    int depth_bits = 8;
    std::vector<std::uint16_t> pixels; // row-major, width * height entries

    std::int64_t pixel_count() const { return static_cast<std::int64_t>(width) * height; }
    std::uint16_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
    std::uint16_t &at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
    bool same_shape(const Image &other) const {
        return width == other.width && height == other.height && depth_bits == other.depth_bits;
    }
    std::uint16_t max_value() const { return static_cast<std::uint16_t>((1u << depth_bits) - 1); }

    bool operator==(const Image &other) const = default;
};

/// Writes an 8-bit binary PGM (P5). Depths above 8 bits are scaled down.
void write_pgm(const Image &img, const std::string &path);

} // namespace genrelay

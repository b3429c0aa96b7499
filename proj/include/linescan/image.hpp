#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace linescan {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

/// Binary PGM (P5).
GrayImage readPgm(const std::string& path);
void writePgm(const std::string& path, const GrayImage& img);

/// Axis-aligned pixel box, inclusive bounds.
struct PixelBox {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1;

    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
    long long area() const {
        return static_cast<long long>(width()) * static_cast<long long>(height());
    }
};

double boxIou(const PixelBox& a, const PixelBox& b);

/// Binary PPM (P6) of the image with red boxes drawn over it.
void writePpmAnnotated(const std::string& path, const GrayImage& img,
                       const std::vector<PixelBox>& boxes);

}  // namespace linescan

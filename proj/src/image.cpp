#include "linescan/image.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace linescan {

namespace {

// Reads the next whitespace-delimited token, skipping '#' comments.
std::string nextToken(std::istream& in) {
    std::string tok;
    for (;;) {
        int c = in.get();
        if (c == EOF) break;
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

}  // namespace

GrayImage readPgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    if (nextToken(in) != "P5") throw std::runtime_error(path + ": not a P5 PGM");
    int w = std::stoi(nextToken(in));
    int h = std::stoi(nextToken(in));
    int maxval = std::stoi(nextToken(in));
    if (w <= 0 || h <= 0 || maxval != 255)
        throw std::runtime_error(path + ": unsupported PGM header");
    GrayImage img(w, h);
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw std::runtime_error(path + ": truncated PGM body");
    return img;
}

void writePgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

double boxIou(const PixelBox& a, const PixelBox& b) {
    int ix0 = std::max(a.x0, b.x0);
    int iy0 = std::max(a.y0, b.y0);
    int ix1 = std::min(a.x1, b.x1);
    int iy1 = std::min(a.y1, b.y1);
    if (ix0 > ix1 || iy0 > iy1) return 0.0;
    double inter = static_cast<double>(ix1 - ix0 + 1) * (iy1 - iy0 + 1);
    double uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
    return inter / uni;
}

void writePpmAnnotated(const std::string& path, const GrayImage& img,
                       const std::vector<PixelBox>& boxes) {
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(img.width) * img.height * 3);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = img.data[i];

    auto paint = [&](int x, int y) {
        if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
        std::size_t i = 3 * (static_cast<std::size_t>(y) * img.width + x);
        rgb[i] = 255;
        rgb[i + 1] = 0;
        rgb[i + 2] = 0;
    };
    for (const PixelBox& b : boxes) {
        for (int x = b.x0; x <= b.x1; ++x) {
            paint(x, b.y0);
            paint(x, b.y1);
        }
        for (int y = b.y0; y <= b.y1; ++y) {
            paint(b.x0, y);
            paint(b.x1, y);
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(rgb.data()),
              static_cast<std::streamsize>(rgb.size()));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace linescan

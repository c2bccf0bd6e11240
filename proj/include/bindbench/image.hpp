#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bindbench {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

// Plain 8-bit RGB raster, row-major, no padding.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {255, 255, 255});

    int width() const { return width_; }
    int height() const { return height_; }

    Rgb at(int x, int y) const {
        std::size_t i = idx(x, y);
        return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
    }
    void set(int x, int y, Rgb c) {
        std::size_t i = idx(x, y);
        pixels_[i] = c.r;
        pixels_[i + 1] = c.g;
        pixels_[i + 2] = c.b;
    }
    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    // Clips to bounds.
    void fill_rect(int x0, int y0, int w, int h, Rgb c);

    const std::vector<std::uint8_t>& data() const { return pixels_; }
    bool operator==(const Image&) const = default;

private:
    std::size_t idx(int x, int y) const {
        return (static_cast<std::size_t>(y) * width_ + x) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

// PNG codec over zlib. Encoding always emits 8-bit RGB, filter 0 rows,
// fixed compression level, so identical images yield identical bytes.
// Decoding accepts non-interlaced 8-bit gray / gray+alpha / RGB / RGBA.
std::string encode_png(const Image& img);
Image decode_png(const std::string& bytes); // throws IoError
void write_png(const Image& img, const std::string& path);
Image read_png(const std::string& path);

std::string read_file(const std::string& path);              // throws IoError
void write_file(const std::string& path, const std::string& bytes);

} // namespace bindbench

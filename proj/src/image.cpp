#include "bindbench/image.hpp"

#include "bindbench/common.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace bindbench {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw IoError("image dimensions must be positive");
    pixels_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
    }
}

void Image::fill_rect(int x0, int y0, int w, int h, Rgb c) {
    int xa = std::max(0, x0), ya = std::max(0, y0);
    int xb = std::min(width_, x0 + w), yb = std::min(height_, y0 + h);
    for (int y = ya; y < yb; ++y)
        for (int x = xa; x < xb; ++x) set(x, y, c);
}

namespace {

const unsigned char kPngSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v >> 24));
    out.push_back(static_cast<char>(v >> 16));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v));
}

std::uint32_t get_u32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

void append_chunk(std::string& out, const char type[4], const std::string& data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    out.append(type, 4);
    out.append(data);
    uLong crc = crc32(0, reinterpret_cast<const Bytef*>(type), 4);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size()));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

} // namespace

std::string encode_png(const Image& img) {
    const int w = img.width(), h = img.height();
    // Filter byte 0 per row keeps output a pure function of the pixels.
    std::vector<unsigned char> raw;
    raw.reserve(static_cast<std::size_t>(h) * (1 + static_cast<std::size_t>(w) * 3));
    const auto& px = img.data();
    for (int y = 0; y < h; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = px.data() + static_cast<std::size_t>(y) * w * 3;
        raw.insert(raw.end(), row, row + static_cast<std::size_t>(w) * 3);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("png: deflate failed");
    compressed.resize(bound);

    std::string out(reinterpret_cast<const char*>(kPngSig), 8);
    std::string ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(w));
    put_u32(ihdr, static_cast<std::uint32_t>(h));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(2); // color type: truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0); // no interlace
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", std::string(compressed.begin(), compressed.end()));
    append_chunk(out, "IEND", "");
    return out;
}

Image decode_png(const std::string& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSig, 8) != 0)
        throw IoError("png: bad signature");

    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    std::size_t pos = 8;
    int w = 0, h = 0, bit_depth = 0, color_type = 0;
    std::string idat;
    bool saw_ihdr = false, saw_iend = false;

    while (pos + 12 <= bytes.size() && !saw_iend) {
        std::uint32_t len = get_u32(p + pos);
        if (pos + 12 + len > bytes.size()) throw IoError("png: truncated chunk");
        std::string type(bytes, pos + 4, 4);
        const unsigned char* data = p + pos + 8;
        uLong crc = crc32(0, p + pos + 4, 4 + len);
        if (static_cast<std::uint32_t>(crc) != get_u32(p + pos + 8 + len))
            throw IoError("png: chunk crc mismatch");
        if (type == "IHDR") {
            if (len != 13) throw IoError("png: bad IHDR");
            w = static_cast<int>(get_u32(data));
            h = static_cast<int>(get_u32(data + 4));
            bit_depth = data[8];
            color_type = data[9];
            if (data[12] != 0) throw IoError("png: interlaced images unsupported");
            saw_ihdr = true;
        } else if (type == "IDAT") {
            idat.append(reinterpret_cast<const char*>(data), len);
        } else if (type == "IEND") {
            saw_iend = true;
        }
        pos += 12 + len;
    }
    if (!saw_ihdr || w <= 0 || h <= 0) throw IoError("png: missing IHDR");
    if (bit_depth != 8) throw IoError("png: only 8-bit depth supported");
    int channels;
    switch (color_type) {
        case 0: channels = 1; break;
        case 2: channels = 3; break;
        case 4: channels = 2; break;
        case 6: channels = 4; break;
        default: throw IoError("png: unsupported color type " + std::to_string(color_type));
    }

    std::size_t stride = static_cast<std::size_t>(w) * channels;
    std::size_t raw_size = (stride + 1) * h;
    std::vector<unsigned char> raw(raw_size);
    uLongf out_len = static_cast<uLongf>(raw_size);
    int rc = uncompress(raw.data(), &out_len, reinterpret_cast<const Bytef*>(idat.data()),
                        static_cast<uLong>(idat.size()));
    if (rc != Z_OK || out_len != raw_size) throw IoError("png: inflate failed");

    // Undo per-row filters in place.
    std::vector<unsigned char> prev(stride, 0);
    Image img(w, h);
    for (int y = 0; y < h; ++y) {
        unsigned char* row = raw.data() + static_cast<std::size_t>(y) * (stride + 1);
        int filter = row[0];
        unsigned char* cur = row + 1;
        for (std::size_t i = 0; i < stride; ++i) {
            int a = i >= static_cast<std::size_t>(channels) ? cur[i - channels] : 0;
            int b = prev[i];
            int c = i >= static_cast<std::size_t>(channels) ? prev[i - channels] : 0;
            int x = cur[i];
            switch (filter) {
                case 0: break;
                case 1: x += a; break;
                case 2: x += b; break;
                case 3: x += (a + b) / 2; break;
                case 4: x += paeth(a, b, c); break;
                default: throw IoError("png: unknown filter type");
            }
            cur[i] = static_cast<unsigned char>(x & 0xff);
        }
        std::memcpy(prev.data(), cur, stride);
        for (int x = 0; x < w; ++x) {
            const unsigned char* s = cur + static_cast<std::size_t>(x) * channels;
            Rgb c;
            switch (color_type) {
                case 0: c = {s[0], s[0], s[0]}; break;
                case 2: c = {s[0], s[1], s[2]}; break;
                case 4: c = {s[0], s[0], s[0]}; break;
                case 6: c = {s[0], s[1], s[2]}; break;
            }
            img.set(x, y, c);
        }
    }
    return img;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open file: " + path);
    std::string out((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return out;
}

void write_file(const std::string& path, const std::string& bytes) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write file: " + path);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("short write: " + path);
}

void write_png(const Image& img, const std::string& path) { write_file(path, encode_png(img)); }

Image read_png(const std::string& path) { return decode_png(read_file(path)); }

} // namespace bindbench

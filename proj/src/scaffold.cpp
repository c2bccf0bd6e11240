#include "bindbench/scaffold.hpp"

#include "bindbench/common.hpp"
#include "bindbench/scene.hpp"

#include <cmath>
#include <string>

namespace bindbench {

namespace {

const char* kVariantNames[] = {"rows", "rows_nonum", "columns", "grid", "none"};

// 3x5 digit bitmaps, row-major, one bit per cell.
const std::uint16_t kDigits[10] = {
    0b111101101101111, // 0
    0b010110010010111, // 1
    0b111001111100111, // 2
    0b111001111001111, // 3
    0b101101111001001, // 4
    0b111100111001111, // 5
    0b111100111101111, // 6
    0b111001001001001, // 7
    0b111101111101111, // 8
    0b111101111001111, // 9
};

constexpr int kLabelMargin = 3; // gap between stroke/edge and the glyph

int digit_width(const ScaffoldConfig& cfg) { return 3 * cfg.label_scale; }
int digit_height(const ScaffoldConfig& cfg) { return 5 * cfg.label_scale; }
int digit_gap(const ScaffoldConfig& cfg) { return cfg.label_scale; }

int label_width(int number, const ScaffoldConfig& cfg) {
    int digits = static_cast<int>(std::to_string(number).size());
    return digits * digit_width(cfg) + (digits - 1) * digit_gap(cfg);
}

void draw_number(Image& img, int number, int x, int y, const ScaffoldConfig& cfg) {
    std::string text = std::to_string(number);
    int pen_x = x;
    for (char ch : text) {
        std::uint16_t bits = kDigits[ch - '0'];
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 3; ++c) {
                if (!(bits >> (14 - (r * 3 + c)) & 1)) continue;
                for (int dy = 0; dy < cfg.label_scale; ++dy)
                    for (int dx = 0; dx < cfg.label_scale; ++dx) {
                        int px = pen_x + c * cfg.label_scale + dx;
                        int py = y + r * cfg.label_scale + dy;
                        if (img.in_bounds(px, py)) img.set(px, py, cfg.stroke_color);
                    }
            }
        pen_x += digit_width(cfg) + digit_gap(cfg);
    }
}

// Segment starts along one axis: 0, then each line position. A segment that
// begins at a line owns the stroke band at its top/left, so its label sits
// just past the stroke.
std::vector<int> segment_label_origins(const std::vector<int>& lines, const ScaffoldConfig& cfg) {
    std::vector<int> origins;
    origins.push_back(kLabelMargin);
    for (int pos : lines) origins.push_back(pos + cfg.stroke_width + kLabelMargin);
    return origins;
}

void validate(const Image& img, const ScaffoldConfig& cfg) {
    if (cfg.variant == ScaffoldVariant::none) return;
    if (cfg.n_lines < 1) throw Error("scaffold: n_lines must be >= 1 for variant != none");
    if (cfg.stroke_width < 1) throw Error("scaffold: stroke_width must be >= 1");
    int min_extent = std::max(cfg.stroke_width, digit_height(cfg) + 2 * kLabelMargin);
    if (img.width() <= min_extent || img.height() <= min_extent)
        throw Error("scaffold: image too small for strokes and labels");
    if (img.width() <= cfg.n_lines || img.height() <= cfg.n_lines)
        throw Error("scaffold: more lines than pixels");
    for (int i = 0; i < kColorCount; ++i)
        if (color_rgb(static_cast<Color>(i)) == cfg.stroke_color)
            throw Error("scaffold: stroke color collides with the scene palette");
}

} // namespace

std::string scaffold_variant_name(ScaffoldVariant v) { return kVariantNames[static_cast<int>(v)]; }

ScaffoldVariant scaffold_variant_from_name(const std::string& name) {
    for (int i = 0; i < 5; ++i)
        if (name == kVariantNames[i]) return static_cast<ScaffoldVariant>(i);
    throw IoError("unknown scaffold variant: " + name);
}

std::vector<int> line_positions(int extent, int n) {
    if (n < 1) throw Error("line_positions: n must be >= 1");
    if (extent <= n) throw Error("line_positions: extent must exceed n");
    std::vector<int> out;
    out.reserve(n);
    for (int k = 1; k <= n; ++k)
        out.push_back(static_cast<int>(std::llround(static_cast<double>(k) * extent / (n + 1))));
    return out;
}

std::vector<Rect> scaffold_stroke_rects(int width, int height, const ScaffoldConfig& cfg) {
    std::vector<Rect> rects;
    if (cfg.variant == ScaffoldVariant::none) return rects;
    bool horizontal = cfg.variant == ScaffoldVariant::rows ||
                      cfg.variant == ScaffoldVariant::rows_nonum ||
                      cfg.variant == ScaffoldVariant::grid;
    bool vertical =
        cfg.variant == ScaffoldVariant::columns || cfg.variant == ScaffoldVariant::grid;
    if (horizontal)
        for (int y : line_positions(height, cfg.n_lines)) rects.push_back({0, y, width, cfg.stroke_width});
    if (vertical)
        for (int x : line_positions(width, cfg.n_lines)) rects.push_back({x, 0, cfg.stroke_width, height});
    return rects;
}

std::vector<Rect> scaffold_label_boxes(int width, int height, const ScaffoldConfig& cfg) {
    std::vector<Rect> boxes;
    const int h = digit_height(cfg);
    switch (cfg.variant) {
        case ScaffoldVariant::none:
        case ScaffoldVariant::rows_nonum:
            break;
        case ScaffoldVariant::rows: {
            auto origins = segment_label_origins(line_positions(height, cfg.n_lines), cfg);
            for (std::size_t i = 0; i < origins.size(); ++i)
                boxes.push_back(
                    {kLabelMargin, origins[i], label_width(static_cast<int>(i) + 1, cfg), h});
            break;
        }
        case ScaffoldVariant::columns: {
            auto origins = segment_label_origins(line_positions(width, cfg.n_lines), cfg);
            for (std::size_t i = 0; i < origins.size(); ++i)
                boxes.push_back(
                    {origins[i], kLabelMargin, label_width(static_cast<int>(i) + 1, cfg), h});
            break;
        }
        case ScaffoldVariant::grid: {
            auto row_origins = segment_label_origins(line_positions(height, cfg.n_lines), cfg);
            auto col_origins = segment_label_origins(line_positions(width, cfg.n_lines), cfg);
            int cell = 1;
            for (int r = 0; r < static_cast<int>(row_origins.size()); ++r)
                for (int c = 0; c < static_cast<int>(col_origins.size()); ++c, ++cell)
                    boxes.push_back({col_origins[c], row_origins[r], label_width(cell, cfg), h});
            break;
        }
    }
    return boxes;
}

Image apply_scaffold(const Image& input, const ScaffoldConfig& cfg) {
    validate(input, cfg);
    Image out = input;
    if (cfg.variant == ScaffoldVariant::none) return out;

    for (const Rect& r : scaffold_stroke_rects(out.width(), out.height(), cfg))
        out.fill_rect(r.x, r.y, r.w, r.h, cfg.stroke_color);

    switch (cfg.variant) {
        case ScaffoldVariant::rows: {
            auto origins = segment_label_origins(line_positions(out.height(), cfg.n_lines), cfg);
            for (std::size_t i = 0; i < origins.size(); ++i)
                draw_number(out, static_cast<int>(i) + 1, kLabelMargin, origins[i], cfg);
            break;
        }
        case ScaffoldVariant::columns: {
            auto origins = segment_label_origins(line_positions(out.width(), cfg.n_lines), cfg);
            for (std::size_t i = 0; i < origins.size(); ++i)
                draw_number(out, static_cast<int>(i) + 1, origins[i], kLabelMargin, cfg);
            break;
        }
        case ScaffoldVariant::grid: {
            auto row_origins = segment_label_origins(line_positions(out.height(), cfg.n_lines), cfg);
            auto col_origins = segment_label_origins(line_positions(out.width(), cfg.n_lines), cfg);
            int cell = 1; // row-major numbering
            for (std::size_t r = 0; r < row_origins.size(); ++r)
                for (std::size_t c = 0; c < col_origins.size(); ++c, ++cell)
                    draw_number(out, cell, col_origins[c], row_origins[r], cfg);
            break;
        }
        case ScaffoldVariant::rows_nonum:
        case ScaffoldVariant::none:
            break;
    }
    return out;
}

} // namespace bindbench

#pragma once

#include "bindbench/image.hpp"

#include <string>
#include <vector>

namespace bindbench {

enum class ScaffoldVariant { rows, rows_nonum, columns, grid, none };

std::string scaffold_variant_name(ScaffoldVariant v);
ScaffoldVariant scaffold_variant_from_name(const std::string& name);

struct ScaffoldConfig {
    ScaffoldVariant variant = ScaffoldVariant::rows;
    int n_lines = 3;               // n lines -> n+1 segments
    Rgb stroke_color = {0, 0, 0};  // must differ from the scene palette
    int stroke_width = 2;
    int label_scale = 2; // digit glyphs are 3x5 at scale 1
};

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;
    bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
};

// Positions of n equidistant lines inside [0, extent): k*extent/(n+1),
// rounded to nearest pixel.
std::vector<int> line_positions(int extent, int n);

// Pure transform: the input image is left untouched. variant=none returns a
// bit-identical copy.
Image apply_scaffold(const Image& input, const ScaffoldConfig& cfg);

// Geometry of the overlay, for locality checks: every pixel the scaffold may
// touch lies inside one of these rectangles.
std::vector<Rect> scaffold_stroke_rects(int width, int height, const ScaffoldConfig& cfg);
std::vector<Rect> scaffold_label_boxes(int width, int height, const ScaffoldConfig& cfg);

} // namespace bindbench

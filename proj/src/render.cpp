#include "bindbench/common.hpp"
#include "bindbench/scenegen.hpp"

#include <cmath>
#include <vector>

namespace bindbench {

namespace {

using Mask = std::vector<std::uint8_t>; // size*size, row-major, 0/1

Mask rotate_cw(const Mask& in, int size) {
    Mask out(in.size());
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) out[y * size + x] = in[(size - 1 - x) * size + y];
    return out;
}

bool point_in_polygon(double px, double py, const std::vector<double>& vx,
                      const std::vector<double>& vy) {
    bool inside = false;
    std::size_t n = vx.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((vy[i] > py) != (vy[j] > py) &&
            px < (vx[j] - vx[i]) * (py - vy[i]) / (vy[j] - vy[i]) + vx[i])
            inside = !inside;
    }
    return inside;
}

Mask base_mask(Shape shape, int size) {
    Mask m(static_cast<std::size_t>(size) * size, 0);
    const double c = (size - 1) / 2.0;
    const double radius = size / 2.0 - 0.5;
    const int stroke = std::max(3, size / 4); // letter stroke thickness

    auto set = [&](int x, int y) { m[static_cast<std::size_t>(y) * size + x] = 1; };

    switch (shape) {
        case Shape::square:
            for (auto& v : m) v = 1;
            break;
        case Shape::circle:
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x) {
                    double dx = x - c, dy = y - c;
                    if (dx * dx + dy * dy <= radius * radius + 0.25) set(x, y);
                }
            break;
        case Shape::triangle:
            // Apex at top center, base along the bottom edge.
            for (int y = 0; y < size; ++y) {
                double hw = (y + 0.5) / 2.0;
                for (int x = 0; x < size; ++x)
                    if (std::abs(x - c) <= hw) set(x, y);
            }
            break;
        case Shape::cross:
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x)
                    if (std::abs(x - c) <= size / 6.0 || std::abs(y - c) <= size / 6.0) set(x, y);
            break;
        case Shape::letter_l:
            // Vertical stroke down the left edge, horizontal along the bottom.
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x)
                    if (x < stroke || y >= size - stroke) set(x, y);
            break;
        case Shape::letter_t:
            // Horizontal stroke along the top, vertical down the center.
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x)
                    if (y < stroke || std::abs(x - c) <= stroke / 2.0) set(x, y);
            break;
        case Shape::letter_x: {
            double hw = std::max(1.5, size / 6.0);
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x)
                    if (std::abs(x - y) <= hw || std::abs(x + y - (size - 1)) <= hw) set(x, y);
            break;
        }
        case Shape::star: {
            // Five-pointed star, outer vertex up, even-odd filled.
            std::vector<double> vx, vy;
            const double inner = radius * 0.381966;
            for (int k = 0; k < 5; ++k) {
                double ao = (-90.0 + 72.0 * k) * M_PI / 180.0;
                double ai = (-54.0 + 72.0 * k) * M_PI / 180.0;
                vx.push_back(c + radius * std::cos(ao));
                vy.push_back(c + radius * std::sin(ao));
                vx.push_back(c + inner * std::cos(ai));
                vy.push_back(c + inner * std::sin(ai));
            }
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x)
                    if (point_in_polygon(x, y, vx, vy)) set(x, y);
            break;
        }
    }
    return m;
}

Mask shape_mask(Shape shape, int size, int rot_deg) {
    Mask m = base_mask(shape, size);
    int quarter_turns = ((rot_deg / 90) % 4 + 4) % 4;
    for (int i = 0; i < quarter_turns; ++i) m = rotate_cw(m, size);
    return m;
}

} // namespace

Image render(const SceneSpec& scene) {
    Image img(scene.canvas_w, scene.canvas_h, {255, 255, 255});
    for (const auto& o : scene.objects) {
        if (o.size <= 0) throw Error("render: object size must be positive");
        Mask mask = shape_mask(o.shape, o.size, o.rot);
        Rgb rgb = color_rgb(o.color);
        int x0 = o.x0(), y0 = o.y0();
        for (int my = 0; my < o.size; ++my)
            for (int mx = 0; mx < o.size; ++mx)
                if (mask[static_cast<std::size_t>(my) * o.size + mx]) {
                    int x = x0 + mx, y = y0 + my;
                    if (img.in_bounds(x, y)) img.set(x, y, rgb);
                }
    }
    return img;
}

} // namespace bindbench

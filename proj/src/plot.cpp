#include "idsm/plot.hpp"

#include "idsm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace idsm {

std::array<std::uint8_t, 3> Image::pixel(int x, int y) const {
    const auto i = static_cast<std::size_t>(3 * (y * width + x));
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

PlotView PlotView::fit(const Mesh& mesh, int width, int height) {
    if (width < 2 || height < 2) throw DimensionError("plot: image too small");
    double x0 = mesh.nodes().front().x, x1 = x0, y0 = mesh.nodes().front().y, y1 = y0;
    for (const Vec2& p : mesh.nodes()) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    }
    const double mx = 0.05 * (x1 - x0), my = 0.05 * (y1 - y0);
    x0 -= mx, x1 += mx, y0 -= my, y1 += my;
    PlotView v;
    v.width = width;
    v.height = height;
    v.scale = std::min(width / (x1 - x0), height / (y1 - y0));
    // Center the box.
    v.x_min = 0.5 * (x0 + x1) - 0.5 * width / v.scale;
    v.y_max = 0.5 * (y0 + y1) + 0.5 * height / v.scale;
    return v;
}

std::array<double, 2> PlotView::to_pixel(Vec2 p) const { return {(p.x - x_min) * scale, (y_max - p.y) * scale}; }

Vec2 PlotView::to_world(double px, double py) const { return {x_min + px / scale, y_max - py / scale}; }

std::array<std::uint8_t, 3> colormap(double t) {
    t = std::clamp(t, 0.0, 1.0);
    auto to8 = [](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))); };
    if (t < 0.5) {
        const double s = t / 0.5;
        return {to8(0.23 + 0.77 * s), to8(0.30 + 0.70 * s), to8(0.75 + 0.25 * s)};
    }
    const double s = (t - 0.5) / 0.5;
    return {to8(1.0 - 0.29 * s), to8(1.0 - 0.98 * s), to8(1.0 - 0.85 * s)};
}

Image render_field(const Mesh& mesh, const Vector& field, const InclusionGeometry* overlay, int width, int height) {
    if (static_cast<std::size_t>(field.size()) != mesh.node_count()) throw DimensionError("plot: field size mismatch");
    const PlotView view = PlotView::fit(mesh, width, height);
    Image img{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(3 * width * height), 255)};
    const double lo = field.minCoeff(), hi = field.maxCoeff();
    auto put = [&](int x, int y, std::array<std::uint8_t, 3> c) {
        if (x < 0 || y < 0 || x >= width || y >= height) return;
        const auto i = static_cast<std::size_t>(3 * (y * width + x));
        img.rgb[i] = c[0], img.rgb[i + 1] = c[1], img.rgb[i + 2] = c[2];
    };

    for (const Triangle& t : mesh.triangles()) {
        std::array<std::array<double, 2>, 3> q;
        for (int k = 0; k < 3; ++k) q[static_cast<std::size_t>(k)] = view.to_pixel(mesh.nodes()[static_cast<std::size_t>(t[static_cast<std::size_t>(k)])]);
        const double det = (q[1][0] - q[0][0]) * (q[2][1] - q[0][1]) - (q[2][0] - q[0][0]) * (q[1][1] - q[0][1]);
        if (det == 0.0) continue;
        const int xa = std::max(0, static_cast<int>(std::floor(std::min({q[0][0], q[1][0], q[2][0]}))));
        const int xb = std::min(width - 1, static_cast<int>(std::ceil(std::max({q[0][0], q[1][0], q[2][0]}))));
        const int ya = std::max(0, static_cast<int>(std::floor(std::min({q[0][1], q[1][1], q[2][1]}))));
        const int yb = std::min(height - 1, static_cast<int>(std::ceil(std::max({q[0][1], q[1][1], q[2][1]}))));
        for (int y = ya; y <= yb; ++y)
            for (int x = xa; x <= xb; ++x) {
                const double px = x + 0.5, py = y + 0.5;
                const double l1 = ((q[1][0] - px) * (q[2][1] - py) - (q[2][0] - px) * (q[1][1] - py)) / det;
                const double l2 = ((q[2][0] - px) * (q[0][1] - py) - (q[0][0] - px) * (q[2][1] - py)) / det;
                const double l3 = 1.0 - l1 - l2;
                constexpr double eps = -1e-9;
                if (l1 < eps || l2 < eps || l3 < eps) continue;
                const double v = l1 * field[t[0]] + l2 * field[t[1]] + l3 * field[t[2]];
                put(x, y, colormap(hi > lo ? (v - lo) / (hi - lo) : 0.5));
            }
    }

    if (overlay) {
        for (const Shape& s : overlay->shapes) {
            const int samples = 2048;
            for (int i = 0; i < samples; ++i) {
                Vec2 p;
                const double u = static_cast<double>(i) / samples;
                if (s.kind == Shape::Kind::circle) {
                    const double a = 2.0 * std::numbers::pi * u;
                    p = {s.center.x + s.size * std::cos(a), s.center.y + s.size * std::sin(a)};
                } else {
                    const int side = static_cast<int>(4 * u);
                    const double f = 8.0 * u - 2.0 * side - 1.0;  // in [-1, 1]
                    const double h = s.size;
                    switch (side) {
                        case 0: p = {s.center.x + f * h, s.center.y - h}; break;
                        case 1: p = {s.center.x + h, s.center.y + f * h}; break;
                        case 2: p = {s.center.x - f * h, s.center.y + h}; break;
                        default: p = {s.center.x - h, s.center.y - f * h}; break;
                    }
                }
                const auto px = view.to_pixel(p);
                put(static_cast<int>(std::floor(px[0])), static_cast<int>(std::floor(px[1])), kOutline);
            }
        }
    }
    return img;
}

std::string to_ppm(const Image& img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
    return out;
}

}  // namespace idsm

#pragma once

// Raster heatmap of a nodal field with an optional inclusion outline.

#include "idsm/fem.hpp"
#include "idsm/mesh.hpp"
#include "idsm/synthdata.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace idsm {

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    std::array<std::uint8_t, 3> pixel(int x, int y) const;
};

/// Uniform scaling of the mesh bounding box (5% margin) onto the image, y up.
struct PlotView {
    double x_min = 0.0, y_max = 0.0, scale = 1.0;
    int width = 800, height = 640;

    static PlotView fit(const Mesh& mesh, int width, int height);
    /// Continuous pixel coordinates (pixel centers at integer + 0.5).
    std::array<double, 2> to_pixel(Vec2 p) const;
    Vec2 to_world(double px, double py) const;
};

inline constexpr std::array<std::uint8_t, 3> kBackground{255, 255, 255};
inline constexpr std::array<std::uint8_t, 3> kOutline{0, 0, 0};

/// Diverging blue-white-red map of t in [0, 1].
std::array<std::uint8_t, 3> colormap(double t);

Image render_field(const Mesh& mesh, const Vector& field, const InclusionGeometry* overlay = nullptr, int width = 800,
                   int height = 640);

/// Binary PPM (P6).
std::string to_ppm(const Image& img);

}  // namespace idsm

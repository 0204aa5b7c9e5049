#pragma once

// Synthetic ground truth and noisy Cauchy data.

#include "idsm/mesh.hpp"
#include "idsm/models.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace idsm {

struct Shape {
    enum class Kind { square, circle };
    Kind kind = Kind::square;
    Vec2 center;
    /// Half-width for squares, radius for circles.
    double size = 0.0;
    /// Inhomogeneity value per channel.
    std::vector<double> values;

    bool contains(Vec2 p) const;
    /// Points on the shape outline (corners for squares).
    std::vector<Vec2> outline(int samples = 64) const;
};

struct InclusionGeometry {
    std::vector<Shape> shapes;

    /// Throws GeometryError on overlapping shapes or a wrong number of values.
    void validate(int channels) const;
    /// Additionally requires every shape inside the ellipse with margin h.
    void validate_in_domain(const DomainSpec& domain, double margin, int channels) const;
};

/// Nodal indicator: shape values at nodes inside a shape, zero elsewhere.
Inhomogeneity rasterize_truth(const InclusionGeometry& geom, const Mesh& mesh, int channels);

struct CauchyPair {
    SourceSpec source;
    /// Noisy boundary trace on the coarse mesh, boundary ordering.
    Vector measurement;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

/// Linear interpolation of a fine boundary trace onto coarse boundary nodes,
/// by closest-point projection onto the fine boundary polyline.
Vector transfer_boundary_trace(const Mesh& fine, const Vector& fine_trace, const Mesh& coarse);

struct SimulatedTrace {
    /// Trace of y(u*) on the coarse boundary.
    Vector exact;
    /// Trace of y(0) on the coarse boundary.
    Vector background;
};

/// Forward solves on the fine mesh for u* and for u = 0, transferred to the
/// coarse boundary.
SimulatedTrace simulate_measurement(const ModelSpec& model, const InclusionGeometry& geom, const SourceSpec& f,
                                    const Mesh& fine, const Mesh& coarse);

/// Per-pair seed from a master seed (splitmix64 of master + pair index).
std::uint64_t pair_seed(std::uint64_t master, std::size_t pair_index);

/// Uniform variates in (-1, 1) from mt19937_64, one per node in order.
Vector uniform_noise(std::size_t count, std::uint64_t seed);

/// y_d = y* + eps * delta * |y_bg - y*|. A non-empty delta_override replaces
/// the random draw (test hook).
Vector add_noise(const Vector& y_exact, const Vector& y_background, double epsilon, std::uint64_t seed,
                 const Vector* delta_override = nullptr);

}  // namespace idsm

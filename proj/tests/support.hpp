#pragma once

#include "idsm/fem.hpp"
#include "idsm/mesh.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace idsm::test {

// Reference triangle (0,0), (1,0), (0,1).
inline Mesh unit_triangle() { return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {0, 1, 2}); }

inline Mesh ellipse(double a, double b, double h) { return build_ellipse_mesh(DomainSpec{a, b, h}); }
inline Mesh disk(double h) { return ellipse(1.0, 1.0, h); }

inline Vector random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = dist(gen);
    return v;
}

template <class F>
Vector nodal(const Mesh& mesh, F f) {
    Vector v(static_cast<Eigen::Index>(mesh.node_count()));
    for (std::size_t i = 0; i < mesh.node_count(); ++i) v[static_cast<Eigen::Index>(i)] = f(mesh.nodes()[i]);
    return v;
}

template <class F>
Vector on_boundary(const Mesh& mesh, F f) {
    Vector v(static_cast<Eigen::Index>(mesh.boundary_count()));
    for (std::size_t j = 0; j < mesh.boundary_count(); ++j)
        v[static_cast<Eigen::Index>(j)] = f(mesh.nodes()[static_cast<std::size_t>(mesh.boundary_nodes()[j])]);
    return v;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

inline double rel_diff(const Vector& a, const Vector& b) {
    const double s = std::max(a.norm(), b.norm());
    return s == 0.0 ? 0.0 : (a - b).norm() / s;
}

inline std::size_t nearest_node(const Mesh& mesh, Vec2 p) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < mesh.node_count(); ++i)
        if (norm(mesh.nodes()[i] - p) < norm(mesh.nodes()[best] - p)) best = i;
    return best;
}

}  // namespace idsm::test

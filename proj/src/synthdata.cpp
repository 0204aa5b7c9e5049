#include "idsm/synthdata.hpp"

#include "idsm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace idsm {

namespace {

double clamp01(double t) { return std::clamp(t, 0.0, 1.0); }

double square_distance(const Shape& sq, Vec2 p) {
    const double dx = std::max(std::abs(p.x - sq.center.x) - sq.size, 0.0);
    const double dy = std::max(std::abs(p.y - sq.center.y) - sq.size, 0.0);
    return std::hypot(dx, dy);
}

bool overlap(const Shape& a, const Shape& b) {
    using K = Shape::Kind;
    if (a.kind == K::square && b.kind == K::square)
        return std::abs(a.center.x - b.center.x) < a.size + b.size && std::abs(a.center.y - b.center.y) < a.size + b.size;
    if (a.kind == K::circle && b.kind == K::circle) return norm(a.center - b.center) < a.size + b.size;
    const Shape& sq = a.kind == K::square ? a : b;
    const Shape& ci = a.kind == K::square ? b : a;
    return square_distance(sq, ci.center) < ci.size;
}

}  // namespace

bool Shape::contains(Vec2 p) const {
    if (kind == Kind::square) return std::abs(p.x - center.x) <= size && std::abs(p.y - center.y) <= size;
    return norm(p - center) <= size;
}

std::vector<Vec2> Shape::outline(int samples) const {
    std::vector<Vec2> pts;
    if (kind == Kind::square) {
        for (double sx : {-1.0, 1.0})
            for (double sy : {-1.0, 1.0}) pts.push_back({center.x + sx * size, center.y + sy * size});
        return pts;
    }
    for (int i = 0; i < samples; ++i) {
        const double t = 2.0 * std::numbers::pi * i / samples;
        pts.push_back({center.x + size * std::cos(t), center.y + size * std::sin(t)});
    }
    return pts;
}

void InclusionGeometry::validate(int channels) const {
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const Shape& s = shapes[i];
        if (!(s.size > 0.0)) throw GeometryError("shape " + std::to_string(i) + ": size must be positive");
        if (static_cast<int>(s.values.size()) != channels)
            throw GeometryError("shape " + std::to_string(i) + ": expected " + std::to_string(channels) + " values, got " +
                                std::to_string(s.values.size()));
        for (std::size_t j = 0; j < i; ++j)
            if (overlap(s, shapes[j]))
                throw GeometryError("shapes " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
    }
}

void InclusionGeometry::validate_in_domain(const DomainSpec& domain, double margin, int channels) const {
    validate(channels);
    const double a = domain.semi_axis_a - margin;
    const double b = domain.semi_axis_b - margin;
    if (a <= 0.0 || b <= 0.0) throw GeometryError("margin exceeds the domain");
    for (std::size_t i = 0; i < shapes.size(); ++i)
        for (Vec2 p : shapes[i].outline()) {
            const double r = (p.x / a) * (p.x / a) + (p.y / b) * (p.y / b);
            if (r > 1.0) throw GeometryError("shape " + std::to_string(i) + " is not at least " + std::to_string(margin) +
                                             " inside the boundary");
        }
}

Inhomogeneity rasterize_truth(const InclusionGeometry& geom, const Mesh& mesh, int channels) {
    geom.validate(channels);
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    Inhomogeneity u = Vector::Zero(n * channels);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec2 p = mesh.nodes()[static_cast<std::size_t>(i)];
        for (const Shape& s : geom.shapes) {
            if (!s.contains(p)) continue;
            for (int c = 0; c < channels; ++c) u[c * n + i] = s.values[static_cast<std::size_t>(c)];
            break;
        }
    }
    return u;
}

Vector transfer_boundary_trace(const Mesh& fine, const Vector& fine_trace, const Mesh& coarse) {
    if (static_cast<std::size_t>(fine_trace.size()) != fine.boundary_count())
        throw DimensionError("transfer_boundary_trace: trace size mismatch");
    const auto& fb = fine.boundary_nodes();
    const std::size_t nb = fb.size();
    Vector out(static_cast<Eigen::Index>(coarse.boundary_count()));
    for (std::size_t j = 0; j < coarse.boundary_count(); ++j) {
        const Vec2 x = coarse.nodes()[static_cast<std::size_t>(coarse.boundary_nodes()[j])];
        double best = std::numeric_limits<double>::infinity();
        double value = 0.0;
        for (std::size_t i = 0; i < nb; ++i) {
            const std::size_t k = (i + 1) % nb;
            const Vec2 p = fine.nodes()[static_cast<std::size_t>(fb[i])];
            const Vec2 q = fine.nodes()[static_cast<std::size_t>(fb[k])];
            const double t = clamp01(project_to_segment(x, p, q));
            const double d = norm(x - (p + t * (q - p)));
            if (d < best) {
                best = d;
                value = (1.0 - t) * fine_trace[static_cast<Eigen::Index>(i)] + t * fine_trace[static_cast<Eigen::Index>(k)];
            }
        }
        out[static_cast<Eigen::Index>(j)] = value;
    }
    return out;
}

SimulatedTrace simulate_measurement(const ModelSpec& spec, const InclusionGeometry& geom, const SourceSpec& f,
                                    const Mesh& fine, const Mesh& coarse) {
    const Model model(spec, fine);
    const Inhomogeneity truth = rasterize_truth(geom, fine, spec.channel_count());
    const Vector y_star = forward_solve(model, truth, f);
    const Vector y_zero = forward_solve(model, model.zero_inhomogeneity(), f);
    return {transfer_boundary_trace(fine, trace(fine, y_star), coarse),
            transfer_boundary_trace(fine, trace(fine, y_zero), coarse)};
}

std::uint64_t pair_seed(std::uint64_t master, std::size_t pair_index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(pair_index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Vector uniform_noise(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    Vector d(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        // 53 random bits mapped to the open interval (-1, 1).
        const double u = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
        d[static_cast<Eigen::Index>(i)] = 2.0 * u - 1.0;
    }
    return d;
}

Vector add_noise(const Vector& y_exact, const Vector& y_background, double epsilon, std::uint64_t seed,
                 const Vector* delta_override) {
    if (y_exact.size() != y_background.size()) throw DimensionError("add_noise: trace size mismatch");
    if (!(epsilon >= 0.0)) throw DimensionError("add_noise: epsilon must be non-negative");
    const Vector delta = delta_override ? *delta_override : uniform_noise(static_cast<std::size_t>(y_exact.size()), seed);
    if (delta.size() != y_exact.size()) throw DimensionError("add_noise: delta size mismatch");
    Vector y = y_exact;
    if (epsilon == 0.0) return y;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += epsilon * delta[i] * std::abs(y_background[i] - y_exact[i]);
    return y;
}

}  // namespace idsm

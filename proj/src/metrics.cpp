#include "idsm/metrics.hpp"

#include "idsm/errors.hpp"
#include "idsm/sampling.hpp"

#include <cmath>
#include <limits>

namespace idsm {

double relative_l2_error(const Mesh& mesh, const Vector& u, const Vector& truth) {
    if (u.size() != truth.size()) throw DimensionError("relative_l2_error: size mismatch");
    const double err = std::sqrt(std::max(0.0, pairing(mesh, u - truth, u - truth)));
    const double ref = std::sqrt(std::max(0.0, pairing(mesh, truth, truth)));
    return ref > 0.0 ? err / ref : err;
}

std::vector<bool> threshold_support(const Mesh& mesh, const Vector& field, double fraction) {
    const std::size_t n = mesh.node_count();
    if (n == 0 || static_cast<std::size_t>(field.size()) % n != 0) throw DimensionError("threshold_support: size mismatch");
    std::vector<bool> mask(n, false);
    const double peak = field.cwiseAbs().maxCoeff();
    if (!(peak > 0.0)) return mask;
    for (Eigen::Index i = 0; i < field.size(); ++i)
        if (std::abs(field[i]) >= fraction * peak) mask[static_cast<std::size_t>(i) % n] = true;
    return mask;
}

Vec2 support_centroid(const Mesh& mesh, const std::vector<bool>& mask) {
    const auto& m = mesh.lumped_mass();
    double w = 0.0, x = 0.0, y = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        w += m[i];
        x += m[i] * mesh.nodes()[i].x;
        y += m[i] * mesh.nodes()[i].y;
    }
    if (w == 0.0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    return {x / w, y / w};
}

double jaccard_index(const Mesh& mesh, const std::vector<bool>& a, const std::vector<bool>& b) {
    if (a.size() != b.size() || a.size() != mesh.node_count()) throw DimensionError("jaccard_index: size mismatch");
    const auto& m = mesh.lumped_mass();
    double inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && b[i]) inter += m[i];
        if (a[i] || b[i]) uni += m[i];
    }
    return uni > 0.0 ? inter / uni : 1.0;
}

std::vector<bool> truth_support(const Mesh& mesh, const Vector& truth) {
    const std::size_t n = mesh.node_count();
    if (n == 0 || static_cast<std::size_t>(truth.size()) % n != 0) throw DimensionError("truth_support: size mismatch");
    std::vector<bool> mask(n, false);
    for (Eigen::Index i = 0; i < truth.size(); ++i)
        if (truth[i] != 0.0) mask[static_cast<std::size_t>(i) % n] = true;
    return mask;
}

Metrics evaluate_metrics(const Mesh& mesh, const Vector& estimate, const Vector& truth) {
    Metrics r;
    r.l2_error = relative_l2_error(mesh, estimate, truth);
    const auto est = threshold_support(mesh, estimate);
    const auto tru = truth_support(mesh, truth);
    const Vec2 ce = support_centroid(mesh, est);
    const Vec2 ct = support_centroid(mesh, tru);
    r.centroid_error = std::hypot(ce.x - ct.x, ce.y - ct.y);
    r.jaccard = jaccard_index(mesh, est, tru);
    return r;
}

double best_scale(const Mesh& mesh, const Vector& eta, const Vector& truth) {
    const double ee = pairing(mesh, eta, eta);
    return ee > 0.0 ? pairing(mesh, eta, truth) / ee : 0.0;
}

}  // namespace idsm

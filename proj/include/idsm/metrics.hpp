#pragma once

// Quantitative comparison of an indicator against the ground truth.

#include "idsm/fem.hpp"
#include "idsm/mesh.hpp"

#include <vector>

namespace idsm {

/// |u - u*| / |u*| in the lumped L2 norm summed over channels; |u| when u* = 0.
double relative_l2_error(const Mesh& mesh, const Vector& u, const Vector& truth);

/// Nodes (mod node count) where |field| >= fraction * max |field|, over all
/// channels. Empty when the field vanishes.
std::vector<bool> threshold_support(const Mesh& mesh, const Vector& field, double fraction = 0.5);

/// Mass-weighted centroid of a support mask; nullopt-like (NaN) when empty.
Vec2 support_centroid(const Mesh& mesh, const std::vector<bool>& mask);

/// Mass-weighted intersection over union of two masks (1 when both are empty).
double jaccard_index(const Mesh& mesh, const std::vector<bool>& a, const std::vector<bool>& b);

/// Support of a truth field: nodes where any channel is nonzero.
std::vector<bool> truth_support(const Mesh& mesh, const Vector& truth);

struct Metrics {
    double l2_error = 0.0;
    double centroid_error = 0.0;
    double jaccard = 0.0;
};

Metrics evaluate_metrics(const Mesh& mesh, const Vector& estimate, const Vector& truth);

/// Scale minimizing |s * eta - truth| in the lumped pairing (0 when eta = 0).
double best_scale(const Mesh& mesh, const Vector& eta, const Vector& truth);

}  // namespace idsm

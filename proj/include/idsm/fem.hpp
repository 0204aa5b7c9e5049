#pragma once

// P1 finite elements on a Mesh: assembly, traces, inner products and
// direct sparse solves (optionally with the boundary mean-zero constraint).

#include "idsm/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <memory>
#include <span>
#include <vector>

namespace idsm {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

inline std::span<const double> view(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<double> view(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline Vector to_vector(std::span<const double> s) {
    return Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
}

/// Per-triangle gradients of the barycentric basis functions and areas.
struct ElementGeometry {
    std::vector<std::array<Vec2, 3>> basis_gradients;
    std::vector<double> areas;

    explicit ElementGeometry(const Mesh& mesh);
    /// Constant gradient of a P1 field on triangle t.
    Vec2 gradient(const Mesh& mesh, std::size_t t, const Vector& field) const;
};

// Coefficients are nodal and averaged over each triangle.
SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, const Vector& weight);
SparseMatrix assemble_weighted_mass(const Mesh& mesh, const Vector& weight);
/// Diagonal matrix diag(m_i w_i) with m the lumped mass (vertex quadrature).
SparseMatrix assemble_lumped_mass(const Mesh& mesh, const Vector& weight);
/// N x N boundary mass, nonzero only in boundary rows/columns.
SparseMatrix assemble_boundary_mass(const Mesh& mesh);
/// B x B boundary mass in boundary ordering.
SparseMatrix boundary_mass_matrix(const Mesh& mesh);
/// M_Gamma applied to the extension by zero of g (g in boundary ordering).
Vector assemble_boundary_load(const Mesh& mesh, const Vector& g);
/// Consistent-mass load of a nodal source, M f.
Vector assemble_domain_load(const Mesh& mesh, const Vector& f);

Vector trace(const Mesh& mesh, const Vector& nodal);
Vector extend_by_zero(const Mesh& mesh, const Vector& boundary);
/// c_i = integral over the boundary of phi_i; c^T x is the boundary integral of x.
Vector boundary_functional(const Mesh& mesh);

/// Domain pairing a^T M_L b with the lumped mass; also the duality product
/// for inhomogeneity-space fields.
double inner_domain(const Mesh& mesh, const Vector& a, const Vector& b);
double inner_boundary(const Mesh& mesh, const Vector& a, const Vector& b);
double norm_l1_domain(const Mesh& mesh, const Vector& a);
double norm_l2_domain(const Mesh& mesh, const Vector& a);
double norm_l2_boundary(const Mesh& mesh, const Vector& a);

enum class Constraint { none, mean_zero_on_boundary };

/// Direct factorization of a symmetric system. With mean_zero_on_boundary the
/// matrix may have constants in its kernel; the constraint is imposed through
/// a bordered system carrying the boundary-integral functional.
class LinearSolver {
public:
    LinearSolver(const Mesh& mesh, const SparseMatrix& system, Constraint constraint);
    ~LinearSolver();
    LinearSolver(LinearSolver&&) noexcept;
    LinearSolver& operator=(LinearSolver&&) noexcept;

    /// Checks compatibility (1^T rhs <= 1e-8 |rhs|) under the mean-zero
    /// constraint and throws CompatibilityError otherwise.
    Vector solve(const Vector& rhs) const;
    /// Under the mean-zero constraint, first removes the incompatible part of
    /// rhs by a uniform boundary flux. This map is symmetric.
    Vector solve_projected(const Vector& rhs) const;

    Constraint constraint() const;
    const SparseMatrix& matrix() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Vector solve_spd(const Mesh& mesh, const SparseMatrix& system, const Vector& rhs, Constraint constraint);

}  // namespace idsm

#pragma once

// Regularized Dirichlet-to-Neumann map through Robin solves, and the
// linearized forward map G[u] = T y'(u) used by the adjoint identities.

#include "idsm/fem.hpp"
#include "idsm/models.hpp"

namespace idsm {

/// Factorization of S = A + (1/alpha) T^T M_Gamma T for one background matrix A.
///
/// Lambda v = (v - T w) / alpha with S w = (1/alpha) T^T M_Gamma v. The Robin
/// term is positive on constants, so S is SPD even when A is pure Neumann.
class DtnContext {
public:
    /// a_singular: A has constants in its kernel. Pullbacks are then
    /// normalized to zero boundary mean.
    DtnContext(const Mesh& mesh, const SparseMatrix& a, double alpha, bool a_singular);

    const Mesh& mesh() const { return *mesh_; }
    double alpha() const { return alpha_; }
    bool a_singular() const { return a_singular_; }

    /// Robin solve with boundary datum v (boundary ordering).
    Vector robin_solve(const Vector& v) const;
    Vector apply(const Vector& v) const;
    /// w with A w = T^T M_Gamma Lambda Lambda v, via two Robin solves.
    Vector pullback(const Vector& v) const;

private:
    const Mesh* mesh_;
    double alpha_;
    bool a_singular_;
    LinearSolver robin_;
};

inline Vector dtn_apply(const DtnContext& ctx, const Vector& v) { return ctx.apply(v); }
inline Vector dtn_pullback(const DtnContext& ctx, const Vector& v) { return ctx.pullback(v); }

/// Lambda v from the unreduced saddle-point system in (w, p). Test oracle.
Vector dtn_apply_kkt(const Mesh& mesh, const SparseMatrix& a, double alpha, const Vector& v);

/// Derivative of u -> T y(u) at a state y, for models linear in u.
///
/// G u = -T X B[u](y) with X the inverse of A (bordered and projected for
/// pure-Neumann A). G^* is the adjoint for the lumped domain pairing and the
/// boundary mass pairing.
class LinearizedForward {
public:
    LinearizedForward(const Model& model, const Vector& y, const Vector& y_ref);

    Vector apply(const Inhomogeneity& u) const;
    Inhomogeneity adjoint(const Vector& h) const;

private:
    const Model* model_;
    Vector y_;
    LinearSolver a_;
};

}  // namespace idsm

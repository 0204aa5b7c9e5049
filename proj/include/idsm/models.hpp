#pragma once

// The five elliptic models A[y]y + B[u](y) = f on a P1 discretization.
//
// Inhomogeneities are stored flattened and channel-major: channel c of a
// field on an N-node mesh occupies entries [c*N, (c+1)*N).
//
// Zero-order terms that involve u use vertex quadrature (lumped mass), and
// gradient terms use the triangle mean of u. With these choices the nodal
// formulas of apply_btau_star are the exact adjoints of B_tau[y] under the
// lumped-mass duality product.

#include "idsm/expression.hpp"
#include "idsm/fem.hpp"
#include "idsm/mesh.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace idsm {

enum class ModelKind { eit, cond_pot, dot, cardiac, nonsmooth };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
    ModelKind kind = ModelKind::eit;
    /// EIT background conductivity.
    double sigma0 = 1.0;
    /// CARDIAC conductivity inside the ischemic region.
    double sigma_inclusion = 1e-4;

    std::vector<std::string> channel_names() const;
    int channel_count() const { return kind == ModelKind::cond_pot ? 2 : 1; }
    /// Neumann datum on the boundary (true) or a volume source (false).
    bool boundary_source() const;
    /// A[y] independent of y (Algorithm for linear problems applies).
    bool linear_background() const { return kind != ModelKind::cardiac; }
    void validate() const;
};

struct SourceSpec {
    Expression expression;
    bool on_boundary = true;

    static SourceSpec for_model(const ModelSpec& model, std::string_view text);
};

using Inhomogeneity = Vector;

/// One model on one mesh, with the parameter-independent matrices assembled once.
class Model {
public:
    Model(ModelSpec spec, const Mesh& mesh);

    const ModelSpec& spec() const { return spec_; }
    const Mesh& mesh() const { return *mesh_; }
    const ElementGeometry& geometry() const { return geometry_; }
    std::size_t node_count() const { return mesh_->node_count(); }
    std::size_t field_size() const { return node_count() * static_cast<std::size_t>(spec_.channel_count()); }

    Inhomogeneity zero_inhomogeneity() const { return Vector::Zero(static_cast<Eigen::Index>(field_size())); }
    Vector channel(const Inhomogeneity& u, int c) const;

    /// Throws AdmissibilityError if u violates the model's admissible set.
    void check_admissible(const Inhomogeneity& u) const;

    /// Load vector of the source (boundary Neumann datum or volume source).
    Vector source_load(const SourceSpec& f) const;

    /// Matrix of the background operator linearized at y_ref (ignored for linear A).
    SparseMatrix background_matrix(const Vector& y_ref) const;
    /// Whether A[y_ref] has the constants in its kernel (pure Neumann).
    bool background_singular(const Vector& y_ref) const;
    Constraint background_constraint(const Vector& y_ref) const {
        return background_singular(y_ref) ? Constraint::mean_zero_on_boundary : Constraint::none;
    }

    /// Discrete B[u](y) as a load vector.
    Vector apply_b(const Inhomogeneity& u, const Vector& y) const;
    /// A[y]y + B[u](y) - load.
    Vector residual(const Inhomogeneity& u, const Vector& y, const Vector& load) const;
    /// Derivative of the residual with respect to y.
    SparseMatrix jacobian(const Inhomogeneity& u, const Vector& y) const;

    /// B_tau[y]^* w as a field in inhomogeneity space.
    Inhomogeneity apply_btau_star(const Vector& y, const Vector& w) const;

    /// Nodal values of the weight of a P1 stiffness (or mass) term.
    Vector constant(double c) const { return Vector::Constant(static_cast<Eigen::Index>(node_count()), c); }

    const SparseMatrix& stiffness() const { return stiffness_; }
    const SparseMatrix& mass() const { return mass_; }

private:
    SparseMatrix linear_system(const Inhomogeneity& u) const;

    friend Vector forward_solve(const Model&, const Inhomogeneity&, const SourceSpec&, const Vector*);
    ModelSpec spec_;
    const Mesh* mesh_;
    ElementGeometry geometry_;
    SparseMatrix stiffness_;
    SparseMatrix mass_;
};

struct NewtonResult {
    Vector y;
    int iterations = 0;
    double residual = 0.0;
};

/// Damped Newton on the residual: relative tolerance 1e-10 against the load,
/// floored at the rounding level of the residual evaluation, at most 50
/// iterations, up to 10 step halvings.
NewtonResult newton_solve(const Model& model, const Inhomogeneity& u, const Vector& load, const Vector& init);

/// Discrete weak solution of A[y]y + B[u](y) = f. For pure-Neumann models
/// the boundary mean of y is zero.
Vector forward_solve(const Model& model, const Inhomogeneity& u, const SourceSpec& f, const Vector* init = nullptr);

/// Solves A[y_ref] y = f.
Vector background_solve(const Model& model, const Vector& y_ref, const SourceSpec& f);

/// Nodal evaluation of a source expression (all nodes).
Vector evaluate_nodal(const Mesh& mesh, const Expression& e);
/// Evaluation at boundary nodes, in boundary order.
Vector evaluate_boundary(const Mesh& mesh, const Expression& e);

/// Area-weighted nodal average of the per-triangle products grad a . grad b.
Vector gradient_product(const Mesh& mesh, const ElementGeometry& geo, const Vector& a, const Vector& b);

}  // namespace idsm

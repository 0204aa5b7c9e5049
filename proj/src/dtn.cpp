#include "idsm/dtn.hpp"

#include "idsm/errors.hpp"

#include <Eigen/SparseLU>

#include <vector>

namespace idsm {

namespace {

SparseMatrix robin_system(const Mesh& mesh, const SparseMatrix& a, double alpha) {
    if (!(alpha > 0.0)) throw DimensionError("dtn: alpha must be positive");
    return SparseMatrix(a + (1.0 / alpha) * assemble_boundary_mass(mesh));
}

void require_boundary_size(const Mesh& mesh, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != mesh.boundary_count())
        throw DimensionError("dtn: boundary field has " + std::to_string(v.size()) + " entries, expected " +
                             std::to_string(mesh.boundary_count()));
}

}  // namespace

DtnContext::DtnContext(const Mesh& mesh, const SparseMatrix& a, double alpha, bool a_singular)
    : mesh_(&mesh), alpha_(alpha), a_singular_(a_singular), robin_(mesh, robin_system(mesh, a, alpha), Constraint::none) {}

Vector DtnContext::robin_solve(const Vector& v) const {
    require_boundary_size(*mesh_, v);
    return robin_.solve(assemble_boundary_load(*mesh_, v) / alpha_);
}

Vector DtnContext::apply(const Vector& v) const {
    const Vector w = robin_solve(v);
    return (v - trace(*mesh_, w)) / alpha_;
}

Vector DtnContext::pullback(const Vector& v) const {
    const Vector g = apply(v);
    Vector w = robin_solve(g);
    if (a_singular_) {
        const Vector c = boundary_functional(*mesh_);
        w.array() -= c.dot(w) / mesh_->boundary_length();
    }
    return w;
}

Vector dtn_apply_kkt(const Mesh& mesh, const SparseMatrix& a, double alpha, const Vector& v) {
    require_boundary_size(mesh, v);
    if (!(alpha > 0.0)) throw DimensionError("dtn: alpha must be positive");
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    const auto nb = static_cast<Eigen::Index>(mesh.boundary_count());
    const SparseMatrix mg = boundary_mass_matrix(mesh);
    const auto& bn = mesh.boundary_nodes();

    // [ A          -T^T M ] [w]   [ 0   ]
    // [ -M T   -alpha M   ] [p] = [ -M v ]
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index k = 0; k < mg.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(mg, k); it; ++it) {
            const Eigen::Index node = bn[static_cast<std::size_t>(it.row())];
            trip.emplace_back(node, n + it.col(), -it.value());
            trip.emplace_back(n + it.col(), node, -it.value());
            trip.emplace_back(n + it.row(), n + it.col(), -alpha * it.value());
        }
    SparseMatrix kkt(n + nb, n + nb);
    kkt.setFromTriplets(trip.begin(), trip.end());
    kkt.makeCompressed();
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu(kkt);
    if (lu.info() != Eigen::Success) throw SolverError("dtn: KKT factorization failed");
    Vector rhs = Vector::Zero(n + nb);
    rhs.tail(nb) = -(mg * v);
    const Vector sol = lu.solve(rhs);
    return sol.tail(nb);
}

LinearizedForward::LinearizedForward(const Model& model, const Vector& y, const Vector& y_ref)
    : model_(&model), y_(y), a_(model.mesh(), model.background_matrix(y_ref), model.background_constraint(y_ref)) {}

Vector LinearizedForward::apply(const Inhomogeneity& u) const {
    return -trace(model_->mesh(), a_.solve_projected(model_->apply_b(u, y_)));
}

Inhomogeneity LinearizedForward::adjoint(const Vector& h) const {
    const Vector z = a_.solve_projected(assemble_boundary_load(model_->mesh(), h));
    return -model_->apply_btau_star(y_, z);
}

}  // namespace idsm

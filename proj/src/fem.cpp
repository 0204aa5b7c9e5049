#include "idsm/fem.hpp"

#include "idsm/errors.hpp"
#include "idsm/kernels.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <string>
#include <variant>

namespace idsm {

namespace {

void require_nodal(const Mesh& mesh, const Vector& v, const char* what) {
    if (static_cast<std::size_t>(v.size()) != mesh.node_count())
        throw DimensionError(std::string(what) + ": nodal field size does not match mesh");
}

void require_boundary(const Mesh& mesh, const Vector& v, const char* what) {
    if (static_cast<std::size_t>(v.size()) != mesh.boundary_count())
        throw DimensionError(std::string(what) + ": boundary field size does not match mesh");
}

double triangle_mean(const Triangle& t, const Vector& w) { return (w[t[0]] + w[t[1]] + w[t[2]]) / 3.0; }

}  // namespace

ElementGeometry::ElementGeometry(const Mesh& mesh) {
    basis_gradients.resize(mesh.triangle_count());
    areas.resize(mesh.triangle_count());
    const auto& nodes = mesh.nodes();
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double area = mesh.triangle_area(t);
        areas[t] = area;
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = nodes[static_cast<std::size_t>(tri[(k + 1) % 3])];
            const Vec2 b = nodes[static_cast<std::size_t>(tri[(k + 2) % 3])];
            // Rotate the opposite edge by -90 degrees.
            basis_gradients[t][static_cast<std::size_t>(k)] = {(a.y - b.y) / (2.0 * area), (b.x - a.x) / (2.0 * area)};
        }
    }
}

Vec2 ElementGeometry::gradient(const Mesh& mesh, std::size_t t, const Vector& field) const {
    const auto& tri = mesh.triangles()[t];
    Vec2 g{};
    for (int k = 0; k < 3; ++k) g = g + field[tri[static_cast<std::size_t>(k)]] * basis_gradients[t][static_cast<std::size_t>(k)];
    return g;
}

SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, const Vector& weight) {
    require_nodal(mesh, weight, "assemble_weighted_stiffness");
    const ElementGeometry geo(mesh);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.triangle_count());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double c = triangle_mean(tri, weight) * geo.areas[t];
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                trip.emplace_back(tri[i], tri[j], c * dot(geo.basis_gradients[t][i], geo.basis_gradients[t][j]));
    }
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    SparseMatrix K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

SparseMatrix assemble_weighted_mass(const Mesh& mesh, const Vector& weight) {
    require_nodal(mesh, weight, "assemble_weighted_mass");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(9 * mesh.triangle_count());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double c = triangle_mean(tri, weight) * mesh.triangle_area(t) / 12.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], i == j ? 2.0 * c : c);
    }
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    SparseMatrix M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

SparseMatrix assemble_lumped_mass(const Mesh& mesh, const Vector& weight) {
    require_nodal(mesh, weight, "assemble_lumped_mass");
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.node_count());
    const auto& m = mesh.lumped_mass();
    for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, m[static_cast<std::size_t>(i)] * weight[i]);
    SparseMatrix L(n, n);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

SparseMatrix boundary_mass_matrix(const Mesh& mesh) {
    const std::size_t nb = mesh.boundary_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * nb);
    for (std::size_t i = 0; i < nb; ++i) {
        const auto j = (i + 1) % nb;
        const double c = mesh.boundary_edge_length(i) / 6.0;
        const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
        trip.emplace_back(a, a, 2.0 * c);
        trip.emplace_back(a, b, c);
        trip.emplace_back(b, a, c);
        trip.emplace_back(b, b, 2.0 * c);
    }
    SparseMatrix M(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

SparseMatrix assemble_boundary_mass(const Mesh& mesh) {
    const std::size_t nb = mesh.boundary_count();
    const auto& bn = mesh.boundary_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * nb);
    for (std::size_t i = 0; i < nb; ++i) {
        const double c = mesh.boundary_edge_length(i) / 6.0;
        const int a = bn[i], b = bn[(i + 1) % nb];
        trip.emplace_back(a, a, 2.0 * c);
        trip.emplace_back(a, b, c);
        trip.emplace_back(b, a, c);
        trip.emplace_back(b, b, 2.0 * c);
    }
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    SparseMatrix M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

Vector assemble_boundary_load(const Mesh& mesh, const Vector& g) {
    require_boundary(mesh, g, "assemble_boundary_load");
    const std::size_t nb = mesh.boundary_count();
    const auto& bn = mesh.boundary_nodes();
    Vector b = Vector::Zero(static_cast<Eigen::Index>(mesh.node_count()));
    for (std::size_t i = 0; i < nb; ++i) {
        const auto j = (i + 1) % nb;
        const double c = mesh.boundary_edge_length(i) / 6.0;
        const double gi = g[static_cast<Eigen::Index>(i)], gj = g[static_cast<Eigen::Index>(j)];
        b[bn[i]] += c * (2.0 * gi + gj);
        b[bn[j]] += c * (gi + 2.0 * gj);
    }
    return b;
}

Vector assemble_domain_load(const Mesh& mesh, const Vector& f) {
    require_nodal(mesh, f, "assemble_domain_load");
    Vector b = Vector::Zero(f.size());
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double c = mesh.triangle_area(t) / 12.0;
        const double s = f[tri[0]] + f[tri[1]] + f[tri[2]];
        for (int v : tri) b[v] += c * (s + f[v]);
    }
    return b;
}

Vector trace(const Mesh& mesh, const Vector& nodal) {
    require_nodal(mesh, nodal, "trace");
    Vector t(static_cast<Eigen::Index>(mesh.boundary_count()));
    for (std::size_t i = 0; i < mesh.boundary_count(); ++i)
        t[static_cast<Eigen::Index>(i)] = nodal[mesh.boundary_nodes()[i]];
    return t;
}

Vector extend_by_zero(const Mesh& mesh, const Vector& boundary) {
    require_boundary(mesh, boundary, "extend_by_zero");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(mesh.node_count()));
    for (std::size_t i = 0; i < mesh.boundary_count(); ++i)
        v[mesh.boundary_nodes()[i]] = boundary[static_cast<Eigen::Index>(i)];
    return v;
}

Vector boundary_functional(const Mesh& mesh) {
    return assemble_boundary_load(mesh, Vector::Ones(static_cast<Eigen::Index>(mesh.boundary_count())));
}

double inner_domain(const Mesh& mesh, const Vector& a, const Vector& b) {
    require_nodal(mesh, a, "inner_domain");
    require_nodal(mesh, b, "inner_domain");
    return kernels::weighted_dot(mesh.lumped_mass(), view(a), view(b));
}

double inner_boundary(const Mesh& mesh, const Vector& a, const Vector& b) {
    require_boundary(mesh, a, "inner_boundary");
    require_boundary(mesh, b, "inner_boundary");
    const std::size_t nb = mesh.boundary_count();
    double s = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
        const auto p = static_cast<Eigen::Index>(i), q = static_cast<Eigen::Index>((i + 1) % nb);
        s += mesh.boundary_edge_length(i) / 6.0 *
             (2.0 * a[p] * b[p] + a[p] * b[q] + a[q] * b[p] + 2.0 * a[q] * b[q]);
    }
    return s;
}

double norm_l1_domain(const Mesh& mesh, const Vector& a) {
    require_nodal(mesh, a, "norm_l1_domain");
    return kernels::weighted_abs_sum(mesh.lumped_mass(), view(a));
}

double norm_l2_domain(const Mesh& mesh, const Vector& a) { return std::sqrt(std::max(0.0, inner_domain(mesh, a, a))); }

double norm_l2_boundary(const Mesh& mesh, const Vector& a) {
    return std::sqrt(std::max(0.0, inner_boundary(mesh, a, a)));
}

struct LinearSolver::Impl {
    SparseMatrix matrix;
    Constraint constraint;
    Vector functional;  // boundary functional, for mean-zero
    double functional_total = 0.0;
    std::variant<std::monostate, Eigen::SimplicialLDLT<SparseMatrix>, Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>
        factor;

    Vector raw_solve(const Vector& rhs) const {
        if (constraint == Constraint::none) {
            const auto& ldlt = std::get<1>(factor);
            Vector x = ldlt.solve(rhs);
            const Vector r = rhs - matrix * x;
            const double rn = rhs.norm();
            if (r.norm() > 1e-12 * rn) x += ldlt.solve(r);
            return x;
        }
        const auto& lu = std::get<2>(factor);
        const Eigen::Index n = matrix.rows();
        Vector ext = Vector::Zero(n + 1);
        ext.head(n) = rhs;
        Vector sol = lu.solve(ext);
        // One refinement step against the bordered operator.
        Vector res(n + 1);
        res.head(n) = rhs - matrix * sol.head(n) - functional * sol[n];
        res[n] = -functional.dot(sol.head(n));
        if (res.norm() > 1e-12 * rhs.norm()) sol += lu.solve(res);
        return sol.head(n);
    }

    void check(const Vector& x) const {
        if (!x.allFinite()) throw SolverError("linear solve produced non-finite values");
    }
};

LinearSolver::LinearSolver(const Mesh& mesh, const SparseMatrix& system, Constraint constraint)
    : impl_(std::make_unique<Impl>()) {
    if (static_cast<std::size_t>(system.rows()) != mesh.node_count() || system.rows() != system.cols())
        throw DimensionError("LinearSolver: matrix size does not match mesh");
    impl_->matrix = system;
    impl_->matrix.makeCompressed();
    impl_->constraint = constraint;
    if (constraint == Constraint::none) {
        auto& ldlt = impl_->factor.emplace<1>();
        ldlt.compute(impl_->matrix);
        if (ldlt.info() != Eigen::Success) throw SolverError("sparse LDLT factorization failed");
        const auto d = ldlt.vectorD();
        if ((d.array() <= 0.0).any()) throw SolverError("system matrix is not positive definite");
    } else {
        impl_->functional = boundary_functional(mesh);
        impl_->functional_total = impl_->functional.sum();
        const Eigen::Index n = system.rows();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(impl_->matrix.nonZeros()) + 2 * mesh.boundary_count());
        for (Eigen::Index k = 0; k < impl_->matrix.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(impl_->matrix, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
        for (Eigen::Index i = 0; i < n; ++i) {
            const double c = impl_->functional[i];
            if (c != 0.0) {
                trip.emplace_back(i, n, c);
                trip.emplace_back(n, i, c);
            }
        }
        SparseMatrix bordered(n + 1, n + 1);
        bordered.setFromTriplets(trip.begin(), trip.end());
        bordered.makeCompressed();
        auto& lu = impl_->factor.emplace<2>();
        lu.compute(bordered);
        if (lu.info() != Eigen::Success) throw SolverError("bordered sparse LU factorization failed: " + lu.lastErrorMessage());
    }
}

LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Constraint LinearSolver::constraint() const { return impl_->constraint; }
const SparseMatrix& LinearSolver::matrix() const { return impl_->matrix; }

Vector LinearSolver::solve(const Vector& rhs) const {
    if (rhs.size() != impl_->matrix.rows()) throw DimensionError("LinearSolver::solve: rhs size mismatch");
    if (impl_->constraint == Constraint::mean_zero_on_boundary) {
        const double total = rhs.sum();
        if (std::abs(total) > 1e-8 * rhs.norm())
            throw CompatibilityError("rhs is incompatible with the pure-Neumann system (sum " + std::to_string(total) + ")");
    }
    Vector x = impl_->raw_solve(rhs);
    impl_->check(x);
    return x;
}

Vector LinearSolver::solve_projected(const Vector& rhs) const {
    if (rhs.size() != impl_->matrix.rows()) throw DimensionError("LinearSolver::solve: rhs size mismatch");
    Vector x = impl_->raw_solve(rhs);
    impl_->check(x);
    return x;
}

Vector solve_spd(const Mesh& mesh, const SparseMatrix& system, const Vector& rhs, Constraint constraint) {
    return LinearSolver(mesh, system, constraint).solve(rhs);
}

}  // namespace idsm

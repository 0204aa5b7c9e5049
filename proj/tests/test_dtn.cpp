#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "idsm/dtn.hpp"
#include "idsm/errors.hpp"
#include "dense_oracles.hpp"
#include "support.hpp"

#include <cmath>

using namespace idsm;
using namespace idsm::test;

namespace {

constexpr ModelKind kAll[] = {ModelKind::eit, ModelKind::cond_pot, ModelKind::dot, ModelKind::cardiac, ModelKind::nonsmooth};

}  // namespace

TEST_CASE("zero datum maps to zero") {
    const Mesh m = disk(0.1);
    const SparseMatrix k = assemble_weighted_stiffness(m, Vector::Ones(static_cast<Eigen::Index>(m.node_count())));
    const DtnContext ctx(m, k, 0.5, true);
    const Vector zero = Vector::Zero(static_cast<Eigen::Index>(m.boundary_count()));
    CHECK(dtn_apply(ctx, zero).cwiseAbs().maxCoeff() == 0.0);
    CHECK(dtn_pullback(ctx, zero).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(dtn_apply(ctx, Vector::Zero(3)), DimensionError);
    CHECK_THROWS_AS(DtnContext(m, k, 0.0, true), DimensionError);
}

TEST_CASE("Laplacian symbol on the unit disk is n / (1 + alpha n)") {
    const Mesh m = disk(0.02);
    const SparseMatrix k = assemble_weighted_stiffness(m, Vector::Ones(static_cast<Eigen::Index>(m.node_count())));
    for (double alpha : {1.0, 0.1}) {
        const DtnContext ctx(m, k, alpha, true);
        for (int n = 1; n <= 6; ++n) {
            const Vector v = cos_mode(m, n);
            const Vector expected = (n / (1.0 + alpha * n)) * v;
            const double err = norm_l2_boundary(m, dtn_apply(ctx, v) - expected) / norm_l2_boundary(m, expected);
            INFO("alpha " << alpha << " n " << n << " err " << err);
            CHECK(err <= 0.05);
        }
    }
}

TEST_CASE("boundedness and monotone regularization") {
    const Mesh m = disk(0.05);
    const SparseMatrix k = assemble_weighted_stiffness(m, Vector::Ones(static_cast<Eigen::Index>(m.node_count())));
    for (double alpha : {1.0, 0.1, 0.01}) {
        const DtnContext ctx(m, k, alpha, true);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Vector v = random_vector(m.boundary_count(), 50 + seed);
            CHECK(norm_l2_boundary(m, dtn_apply(ctx, v)) <= (1.0 + 1e-10) * norm_l2_boundary(m, v) / alpha);
        }
    }
    const Vector v = cos_mode(m, 1);
    double previous = 1e300;
    for (double alpha : {1.0, 0.5, 0.25, 0.125}) {
        const Vector a = dtn_apply(DtnContext(m, k, alpha, true), v);
        const Vector b = dtn_apply(DtnContext(m, k, alpha / 2, true), v);
        const double gap = norm_l2_boundary(m, a - b);
        CHECK(gap < previous);
        previous = gap;
    }
}

TEST_CASE("M_Gamma Lambda is symmetric") {
    const Mesh m = ellipse(1.0, 0.8, 0.12);
    const auto nb = static_cast<Eigen::Index>(m.boundary_count());
    const Dense mg = Dense(boundary_mass_matrix(m));
    for (ModelKind kind : kAll) {
        ModelSpec spec;
        spec.kind = kind;
        const Model model(spec, m);
        const State s = state_for(model);
        const DtnContext ctx(m, model.background_matrix(s.y), 0.3, model.background_singular(s.y));
        Dense lam(nb, nb);
        for (Eigen::Index j = 0; j < nb; ++j) lam.col(j) = dtn_apply(ctx, Vector::Unit(nb, j));
        const Dense sym = mg * lam;
        INFO(model_kind_name(kind));
        CHECK((sym - sym.transpose()).norm() <= 1e-10 * sym.norm());
    }
}

TEST_CASE("Robin elimination equals the saddle-point system") {
    const Mesh m = ellipse(1.0, 0.8, 0.08);
    const auto n = static_cast<Eigen::Index>(m.node_count());
    const SparseMatrix k = assemble_weighted_stiffness(m, Vector::Ones(n));
    const SparseMatrix km = SparseMatrix(k + assemble_weighted_mass(m, Vector::Ones(n)));
    for (double alpha : {1.0, 0.1}) {
        for (const auto& [a, singular] : {std::pair{k, true}, std::pair{km, false}}) {
            const DtnContext ctx(m, a, alpha, singular);
            const Vector v = random_vector(m.boundary_count(), 77);
            CHECK(rel_diff(dtn_apply(ctx, v), dtn_apply_kkt(m, a, alpha, v)) <= 1e-9);
        }
    }
}

TEST_CASE("two-solve pullback equals the dense G* Lambda* Lambda") {
    const Mesh m = ellipse(1.0, 0.8, 0.12);
    REQUIRE(m.node_count() <= 400);
    const Dense t = trace_matrix(m);
    const Dense mg = Dense(boundary_mass_matrix(m));
    for (ModelKind kind : {ModelKind::eit, ModelKind::dot}) {
        ModelSpec spec;
        spec.kind = kind;
        const Model model(spec, m);
        const State s = state_for(model);
        const SparseMatrix a = model.background_matrix(s.y);
        const bool singular = model.background_singular(s.y);
        const double alpha = 0.5;
        const Dense g = -t * dense_inverse(m, a, singular) * dense_b(model, s.y);
        const Dense g_star = lumped_weights(model).cwiseInverse().asDiagonal() * g.transpose() * mg;
        const Dense lam = dense_dtn(m, a, alpha);
        // Lambda* = M_Gamma^{-1} Lambda^T M_Gamma.
        const Dense lam_star = mg.ldlt().solve(lam.transpose() * mg);
        const Dense oracle = g_star * lam_star * lam;
        const DtnContext ctx(m, a, alpha, singular);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Vector v = random_vector(m.boundary_count(), 300 + seed);
            const Vector pipeline = -model.apply_btau_star(s.y, dtn_pullback(ctx, v));
            const Vector dense = oracle * v;
            INFO(model_kind_name(kind) << " rel " << rel_diff(pipeline, dense));
            CHECK(rel_diff(pipeline, dense) <= 1e-8);
        }
    }
}

TEST_CASE("adjoint round trips") {
    const Mesh m = ellipse(1.0, 0.8, 0.1);
    for (ModelKind kind : kAll) {
        ModelSpec spec;
        spec.kind = kind;
        const Model model(spec, m);
        const State s = state_for(model);
        const LinearizedForward g(model, s.y, s.y);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Vector u = random_vector(model.field_size(), 1000 + seed);
            const Vector h = random_vector(m.boundary_count(), 2000 + seed);
            const double lhs = inner_boundary(m, g.apply(u), h);
            const double rhs = field_inner(model, u, g.adjoint(h));
            INFO(model_kind_name(kind));
            CHECK(rel_diff(lhs, rhs) <= 1e-9);
        }
    }
}

TEST_CASE("Robin solve is the transpose of Lambda T A^{-1}") {
    const Mesh m = ellipse(1.0, 0.8, 0.1);
    const auto n = static_cast<Eigen::Index>(m.node_count());
    const SparseMatrix a = SparseMatrix(assemble_weighted_stiffness(m, Vector::Ones(n)) + assemble_weighted_mass(m, Vector::Ones(n)));
    const DtnContext ctx(m, a, 0.2, false);
    const SparseMatrix ml = assemble_lumped_mass(m, Vector::Ones(n));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Vector f = random_vector(m.node_count(), 500 + seed);
        const Vector b = random_vector(m.boundary_count(), 600 + seed);
        const Vector y = solve_spd(m, a, ml * f, Constraint::none);
        const double lhs = inner_boundary(m, dtn_apply(ctx, trace(m, y)), b);
        const double rhs = inner_domain(m, f, ctx.robin_solve(b));
        CHECK(rel_diff(lhs, rhs) <= 1e-9);
    }
}

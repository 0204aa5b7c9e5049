#include "idsm/sampling.hpp"

#include "idsm/errors.hpp"
#include "idsm/kernels.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

namespace idsm {

namespace {

std::size_t channels_of(const Mesh& mesh, const Vector& a) {
    const std::size_t n = mesh.node_count();
    if (n == 0 || a.size() == 0 || static_cast<std::size_t>(a.size()) % n != 0)
        throw DimensionError("field of size " + std::to_string(a.size()) + " does not match a " + std::to_string(n) +
                             "-node mesh");
    return static_cast<std::size_t>(a.size()) / n;
}

std::span<const double> block(const Vector& a, std::size_t c, std::size_t n) {
    return {a.data() + c * n, n};
}

double pairing_norm(const Mesh& mesh, const Vector& a) { return std::sqrt(std::max(0.0, pairing(mesh, a, a))); }

}  // namespace

std::string_view correction_kind_name(CorrectionKind k) { return k == CorrectionKind::dfp ? "dfp" : "bfg"; }

CorrectionKind parse_correction_kind(std::string_view s) {
    if (s == "dfp") return CorrectionKind::dfp;
    if (s == "bfg") return CorrectionKind::bfg;
    throw ConfigError("unknown correction kind '" + std::string(s) + "'");
}

std::string_view resolver_init_name(ResolverInitKind k) {
    switch (k) {
        case ResolverInitKind::distance_power: return "distance_power";
        case ResolverInitKind::fundamental_grad_l2: return "fundamental_grad_l2";
        case ResolverInitKind::fundamental_grad_h1_cubed: return "fundamental_grad_h1_cubed";
    }
    return "?";
}

ResolverInitKind parse_resolver_init(std::string_view s) {
    for (auto k : {ResolverInitKind::distance_power, ResolverInitKind::fundamental_grad_l2,
                   ResolverInitKind::fundamental_grad_h1_cubed})
        if (resolver_init_name(k) == s) return k;
    throw ConfigError("unknown resolver init kind '" + std::string(s) + "'");
}

double pairing(const Mesh& mesh, const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionError("pairing: size mismatch");
    const std::size_t n = mesh.node_count();
    const std::size_t channels = channels_of(mesh, a);
    double s = 0.0;
    for (std::size_t c = 0; c < channels; ++c)
        s += kernels::weighted_dot(mesh.lumped_mass(), block(a, c, n), block(b, c, n));
    return s;
}

double l1_norm(const Mesh& mesh, const Vector& a) {
    const std::size_t n = mesh.node_count();
    const std::size_t channels = channels_of(mesh, a);
    double s = 0.0;
    for (std::size_t c = 0; c < channels; ++c) s += kernels::weighted_abs_sum(mesh.lumped_mass(), block(a, c, n));
    return s;
}

// ---------------------------------------------------------------------------
// Resolver

Resolver::Resolver(const Mesh& mesh, Vector base) : mesh_(&mesh), base_(std::move(base)) {
    channels_of(mesh, base_);
}

Vector Resolver::apply(const Vector& xi) const {
    if (xi.size() != base_.size()) throw DimensionError("resolver: field size mismatch");
    Vector out(xi.size());
    kernels::multiply(view(base_), view(xi), view(out));
    for (const Term& t : terms_) {
        const double a = pairing(*mesh_, xi, t.u);
        const double b = pairing(*mesh_, xi, t.r_zeta);
        if (t.kind == CorrectionKind::dfp) {
            kernels::axpy(a / t.zeta_u, view(t.u), view(out));
            kernels::axpy(-b / t.zeta_r_zeta, view(t.r_zeta), view(out));
        } else {
            const double rho = 1.0 / t.zeta_u;
            kernels::axpy(-rho * a, view(t.r_zeta), view(out));
            kernels::axpy(rho * (1.0 + rho * t.zeta_r_zeta) * a - rho * b, view(t.u), view(out));
        }
    }
    return out;
}

double Resolver::rescale(const Vector& u1, const Vector& zeta1) {
    if (!terms_.empty()) throw std::logic_error("resolver: rescale after a correction");
    const double denom = l1_norm(*mesh_, apply(zeta1));
    const double num = l1_norm(*mesh_, u1);
    if (!(denom > 1e-14 * l1_norm(*mesh_, zeta1)) || denom == 0.0)
        throw DegenerateScalingError("resolver: |R zeta|_1 vanishes");
    if (num == 0.0) throw DegenerateScalingError("resolver: |u|_1 vanishes");
    const double factor = num / denom;
    kernels::scale(factor, view(base_));
    return factor;
}

bool Resolver::update(CorrectionKind kind, const Vector& u, const Vector& zeta, double threshold) {
    if (u.size() != base_.size() || zeta.size() != base_.size()) throw DimensionError("resolver: field size mismatch");
    Term t{kind, u, apply(zeta), pairing(*mesh_, zeta, u), 0.0};
    t.zeta_r_zeta = pairing(*mesh_, zeta, t.r_zeta);
    const double nz = pairing_norm(*mesh_, zeta);
    if (t.zeta_u == 0.0 || std::abs(t.zeta_u) <= threshold * nz * pairing_norm(*mesh_, u)) return false;
    if (t.zeta_r_zeta == 0.0 || std::abs(t.zeta_r_zeta) <= threshold * nz * pairing_norm(*mesh_, t.r_zeta)) return false;
    terms_.push_back(std::move(t));
    return true;
}

Vector resolver_base(ResolverInitKind kind, const Mesh& mesh, double gamma) {
    if (!(gamma >= 0.0)) throw ConfigError("resolver: gamma must be non-negative");
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    Vector base(n);
    if (kind == ResolverInitKind::distance_power) {
        const auto d = distance_to_boundary(mesh);
        for (Eigen::Index i = 0; i < n; ++i) base[i] = std::pow(d[static_cast<std::size_t>(i)], gamma);
        return base;
    }

    const auto& bn = mesh.boundary_nodes();
    const std::size_t nb = bn.size();
    std::vector<double> weight(nb);
    for (std::size_t i = 0; i < nb; ++i)
        weight[i] = 0.5 * (mesh.boundary_edge_length(i) + mesh.boundary_edge_length((i + nb - 1) % nb));
    const double c = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);

    std::vector<int> interior;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (mesh.is_boundary(static_cast<int>(i))) continue;
        interior.push_back(static_cast<int>(i));
        const Vec2 x = mesh.nodes()[static_cast<std::size_t>(i)];
        double s = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
            const Vec2 d = x - mesh.nodes()[static_cast<std::size_t>(bn[j])];
            const double r2 = dot(d, d);
            s += kind == ResolverInitKind::fundamental_grad_l2 ? weight[j] * c / r2
                                                               : weight[j] * c * (1.0 / r2 + 1.0 / (r2 * r2));
        }
        base[i] = kind == ResolverInitKind::fundamental_grad_l2 ? std::sqrt(s) : std::pow(s, 1.5);
    }
    if (interior.empty()) throw MeshError("resolver: mesh has no interior nodes");
    for (int b : bn) {
        const Vec2 x = mesh.nodes()[static_cast<std::size_t>(b)];
        double best = std::numeric_limits<double>::infinity();
        int arg = interior.front();
        for (int i : interior) {
            const Vec2 d = x - mesh.nodes()[static_cast<std::size_t>(i)];
            const double r2 = dot(d, d);
            if (r2 < best) {
                best = r2;
                arg = i;
            }
        }
        base[b] = base[arg];
    }
    return base;
}

Resolver resolver_init(ResolverInitKind kind, const Mesh& mesh, double gamma, int channels) {
    if (channels < 1) throw DimensionError("resolver: channel count must be positive");
    const Vector one = resolver_base(kind, mesh, gamma);
    return Resolver(mesh, one.replicate(channels, 1));
}

// ---------------------------------------------------------------------------
// Projection

void ProjectionRule::validate(int channels) const {
    if (kind == Kind::box_clamp) {
        if (static_cast<int>(lower.size()) != channels || static_cast<int>(upper.size()) != channels)
            throw ConfigError("projection: expected " + std::to_string(channels) + " lower/upper bounds");
        for (int c = 0; c < channels; ++c)
            if (!(lower[static_cast<std::size_t>(c)] <= upper[static_cast<std::size_t>(c)]))
                throw ConfigError("projection: lower bound exceeds upper bound");
    } else if (!(keep >= 0.0 && keep <= 1.0)) {
        throw ConfigError("projection: keep weight must lie in [0, 1]");
    }
}

ProjectionRule ProjectionRule::default_for(const ModelSpec& model) {
    ProjectionRule r;
    switch (model.kind) {
        case ModelKind::eit:
            r.lower = {0.01 - model.sigma0};
            r.upper = {1.0 - model.sigma0};
            break;
        case ModelKind::cond_pot:
            r.lower = {-0.99, 0.0};
            r.upper = {0.0, 9.0};
            break;
        case ModelKind::dot:
            r.lower = {0.0};
            r.upper = {10.0};
            break;
        case ModelKind::cardiac:
            r.kind = Kind::relaxed_normalize;
            r.keep = 0.8;
            break;
        case ModelKind::nonsmooth:
            r.lower = {0.0};
            r.upper = {50.0};
            break;
    }
    return r;
}

Inhomogeneity apply_projection(const ProjectionRule& rule, const Inhomogeneity& eta, const Inhomogeneity& u_prev,
                               std::size_t nodes, bool* flagged) {
    if (nodes == 0 || static_cast<std::size_t>(eta.size()) % nodes != 0)
        throw DimensionError("projection: field size does not match node count");
    const auto channels = static_cast<int>(static_cast<std::size_t>(eta.size()) / nodes);
    rule.validate(channels);
    const auto n = static_cast<Eigen::Index>(nodes);
    Inhomogeneity out(eta.size());
    if (flagged) *flagged = false;
    if (rule.kind == ProjectionRule::Kind::box_clamp) {
        for (int c = 0; c < channels; ++c) {
            const double lo = rule.lower[static_cast<std::size_t>(c)], hi = rule.upper[static_cast<std::size_t>(c)];
            for (Eigen::Index i = c * n; i < (c + 1) * n; ++i) out[i] = std::clamp(eta[i], lo, hi);
        }
        return out;
    }
    if (u_prev.size() != eta.size()) throw DimensionError("projection: previous iterate size mismatch");
    for (int c = 0; c < channels; ++c) {
        const auto seg = eta.segment(c * n, n);
        const double lo = seg.minCoeff(), hi = seg.maxCoeff();
        const bool degenerate = !(hi - lo > 1e-14 * std::max(std::abs(hi), std::abs(lo)));
        if (degenerate && flagged) *flagged = true;
        for (Eigen::Index i = c * n; i < (c + 1) * n; ++i) {
            const double normalized = degenerate ? 0.5 : (eta[i] - lo) / (hi - lo);
            out[i] = rule.keep * u_prev[i] + (1.0 - rule.keep) * normalized;
        }
    }
    return out;
}

void IdsmConfig::validate(int channels) const {
    if (!(alpha > 0.0)) throw ConfigError("idsm: alpha must be positive");
    if (iterations < 1) throw ConfigError("idsm: iterations must be at least 1");
    if (!(gamma >= 0.0)) throw ConfigError("idsm: gamma must be non-negative");
    if (!(curvature_threshold >= 0.0)) throw ConfigError("idsm: curvature threshold must be non-negative");
    projection.validate(channels);
}

// ---------------------------------------------------------------------------
// Iteration

Inhomogeneity aggregate_zeta(const Model& model, const std::vector<Vector>& states, const std::vector<Vector>& pullbacks) {
    if (states.size() != pullbacks.size() || states.empty()) throw DimensionError("aggregate_zeta: pair count mismatch");
    Inhomogeneity z = model.apply_btau_star(states[0], pullbacks[0]);
    for (std::size_t l = 1; l < states.size(); ++l) z += model.apply_btau_star(states[l], pullbacks[l]);
    return z;
}

namespace {

/// Per-pair linearization: state, background solution and DtN factorization.
struct Linearization {
    Vector state;
    Vector background;
    std::unique_ptr<DtnContext> dtn;
};

Linearization linearize(const Model& model, const Inhomogeneity& u, const SourceSpec& f, double alpha,
                        const Vector* init) {
    Linearization lin;
    lin.state = forward_solve(model, u, f, init);
    const SparseMatrix a = model.background_matrix(lin.state);
    const Constraint constraint = model.background_constraint(lin.state);
    lin.background = solve_spd(model.mesh(), a, model.source_load(f), constraint);
    lin.dtn = std::make_unique<DtnContext>(model.mesh(), a, alpha, constraint == Constraint::mean_zero_on_boundary);
    return lin;
}

IterationTrace run(const Model& model, const IdsmConfig& config, const std::vector<CauchyPair>& pairs,
                   bool relinearize) {
    const Mesh& mesh = model.mesh();
    const int channels = model.spec().channel_count();
    config.validate(channels);
    if (pairs.empty()) throw DimensionError("idsm: no data pairs");
    for (const auto& p : pairs)
        if (static_cast<std::size_t>(p.measurement.size()) != mesh.boundary_count())
            throw DimensionError("idsm: measurement size does not match the mesh boundary");
    const std::size_t npairs = pairs.size();

    Resolver resolver = resolver_init(config.resolver, mesh, config.gamma, channels);
    Inhomogeneity u = model.zero_inhomogeneity();

    std::vector<Linearization> lin;
    for (const auto& p : pairs) lin.push_back(linearize(model, u, p.source, config.alpha, nullptr));
    // For a linear background, the background solution and DtN factorization
    // computed at u = 0 are reused throughout.
    std::vector<Vector> states(npairs), pullbacks(npairs);
    for (std::size_t l = 0; l < npairs; ++l) states[l] = lin[l].state;

    IterationTrace trace_out;
    bool rescaled = false;
    std::string where;
    for (int k = 0; k < config.iterations; ++k) {
        try {
            IterationRecord rec;
            if (relinearize || k == 0)
                for (std::size_t l = 0; l < npairs; ++l)
                    pullbacks[l] = lin[l].dtn->pullback(trace(mesh, lin[l].background) - pairs[l].measurement);
            rec.zeta = aggregate_zeta(model, states, pullbacks);
            rec.eta = resolver.apply(rec.zeta);
            rec.u = apply_projection(config.projection, rec.eta, u, mesh.node_count(), &rec.projection_flagged);
            rec.data_misfit = std::numeric_limits<double>::quiet_NaN();

            if (k + 1 < config.iterations) {
                std::vector<Vector> next(npairs), tilde(npairs);
                rec.data_misfit = 0.0;
                for (std::size_t l = 0; l < npairs; ++l) {
                    if (relinearize) {
                        lin[l] = linearize(model, rec.u, pairs[l].source, config.alpha, &states[l]);
                        next[l] = lin[l].state;
                    } else {
                        next[l] = forward_solve(model, rec.u, pairs[l].source, &states[l]);
                    }
                    const Vector tr = trace(mesh, next[l]);
                    rec.data_misfit += norm_l2_boundary(mesh, tr - pairs[l].measurement);
                    tilde[l] = lin[l].dtn->pullback(trace(mesh, lin[l].background) - tr);
                }
                rec.zeta_tilde = aggregate_zeta(model, next, tilde);
                states = std::move(next);

                bool usable = true;
                if (!rescaled) {
                    try {
                        rec.rescale = resolver.rescale(rec.u, rec.zeta_tilde);
                        rec.rescale_applied = true;
                        rescaled = true;
                    } catch (const DegenerateScalingError&) {
                        usable = false;
                    }
                }
                rec.update_skipped =
                    !usable || !resolver.update(config.correction, rec.u, rec.zeta_tilde, config.curvature_threshold);
            }
            u = rec.u;
            trace_out.iterations.push_back(std::move(rec));
        } catch (const NonlinearSolveError& e) {
            throw NonlinearSolveError("iteration " + std::to_string(k + 1) + ": " + e.what(), e.last_residual,
                                      e.iterations);
        } catch (const SolverError& e) {
            throw SolverError("iteration " + std::to_string(k + 1) + ": " + e.what());
        }
    }
    return trace_out;
}

}  // namespace

IterationTrace idsm_run_linear(const Model& model, const IdsmConfig& config, const std::vector<CauchyPair>& pairs) {
    if (!model.spec().linear_background()) throw ConfigError("idsm_run_linear: model has a nonlinear background");
    return run(model, config, pairs, false);
}

IterationTrace idsm_run_nonlinear(const Model& model, const IdsmConfig& config, const std::vector<CauchyPair>& pairs) {
    return run(model, config, pairs, true);
}

IterationTrace idsm_run(const Model& model, const IdsmConfig& config, const std::vector<CauchyPair>& pairs) {
    return model.spec().linear_background() ? idsm_run_linear(model, config, pairs)
                                            : idsm_run_nonlinear(model, config, pairs);
}

// ---------------------------------------------------------------------------
// Classical index

namespace {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

/// Periodic piecewise-linear evaluation of samples at positions s (sorted,
/// starting at 0) on [0, period).
double periodic_lerp(const std::vector<double>& s, const Vector& v, double period, double t, std::size_t& seg) {
    const std::size_t n = s.size();
    while (seg + 1 < n && s[seg + 1] <= t) ++seg;
    const double s0 = s[seg];
    const double s1 = seg + 1 < n ? s[seg + 1] : period;
    const double v0 = v[static_cast<Eigen::Index>(seg)];
    const double v1 = v[static_cast<Eigen::Index>((seg + 1) % n)];
    const double th = (t - s0) / (s1 - s0);
    return (1.0 - th) * v0 + th * v1;
}

}  // namespace

Vector boundary_fractional_laplacian(const Mesh& mesh, const Vector& v, double gamma) {
    const std::size_t nb = mesh.boundary_count();
    if (static_cast<std::size_t>(v.size()) != nb) throw DimensionError("fractional laplacian: boundary size mismatch");
    if (!(gamma >= 0.0)) throw ConfigError("fractional laplacian: gamma must be non-negative");
    std::size_t m = 1;
    while (m < 4 * nb) m <<= 1;
    const double length = mesh.boundary_length();
    const auto& s = mesh.arclength();

    std::unique_ptr<double, FftwFree> grid(static_cast<double*>(fftw_malloc(sizeof(double) * m)));
    std::unique_ptr<fftw_complex, FftwFree> spec(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (m / 2 + 1))));
    fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(m), grid.get(), spec.get(), FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_c2r_1d(static_cast<int>(m), spec.get(), grid.get(), FFTW_ESTIMATE);

    std::size_t seg = 0;
    for (std::size_t j = 0; j < m; ++j) grid.get()[j] = periodic_lerp(s, v, length, length * j / m, seg);
    fftw_execute(fwd);
    const std::size_t kmax = nb / 2;
    for (std::size_t k = 0; k <= m / 2; ++k) {
        double symbol = 0.0;
        if (k >= 1 && k <= kmax) symbol = std::pow(2.0 * std::numbers::pi * k / length, 2.0 * gamma);
        spec.get()[k][0] *= symbol / m;
        spec.get()[k][1] *= symbol / m;
    }
    fftw_execute(bwd);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);

    std::vector<double> grid_pos(m);
    Vector grid_v(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
        grid_pos[j] = length * j / m;
        grid_v[static_cast<Eigen::Index>(j)] = grid.get()[j];
    }
    Vector out(static_cast<Eigen::Index>(nb));
    seg = 0;
    for (std::size_t i = 0; i < nb; ++i) out[static_cast<Eigen::Index>(i)] = periodic_lerp(grid_pos, grid_v, length, s[i], seg);
    return out;
}

Inhomogeneity dsm_index_baseline(const Model& model, const std::vector<CauchyPair>& pairs, double gamma) {
    const Mesh& mesh = model.mesh();
    if (pairs.empty()) throw DimensionError("dsm: no data pairs");
    const auto n = static_cast<Eigen::Index>(mesh.node_count());

    const auto d = distance_to_boundary(mesh);

    Vector eta = Vector::Zero(n);
    for (const auto& p : pairs) {
        if (static_cast<std::size_t>(p.measurement.size()) != mesh.boundary_count())
            throw DimensionError("dsm: measurement size does not match the mesh boundary");
        Vector y_ref = Vector::Zero(n);
        if (!model.spec().linear_background()) y_ref = forward_solve(model, model.zero_inhomogeneity(), p.source);
        const LinearSolver a(mesh, model.background_matrix(y_ref), model.background_constraint(y_ref));
        const Vector y_bg = a.solve(model.source_load(p.source));
        const Vector g = boundary_fractional_laplacian(mesh, trace(mesh, y_bg) - p.measurement, gamma);
        eta += a.solve_projected(assemble_boundary_load(mesh, g));
    }
    for (Eigen::Index i = 0; i < n; ++i) eta[i] *= std::pow(d[static_cast<std::size_t>(i)], gamma);
    return eta.replicate(model.spec().channel_count(), 1);
}

}  // namespace idsm

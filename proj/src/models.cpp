#include "idsm/models.hpp"

#include "idsm/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace idsm {

namespace {

constexpr double kAdmissibilityTol = 1e-12;

Vector lumped_times(const Mesh& mesh, const Vector& a) {
    const auto& m = mesh.lumped_mass();
    Vector r(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) r[i] = m[static_cast<std::size_t>(i)] * a[i];
    return r;
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::eit: return "eit";
        case ModelKind::cond_pot: return "cond_pot";
        case ModelKind::dot: return "dot";
        case ModelKind::cardiac: return "cardiac";
        case ModelKind::nonsmooth: return "nonsmooth";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    for (auto k : {ModelKind::eit, ModelKind::cond_pot, ModelKind::dot, ModelKind::cardiac, ModelKind::nonsmooth})
        if (model_kind_name(k) == name) return k;
    throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

std::vector<std::string> ModelSpec::channel_names() const {
    switch (kind) {
        case ModelKind::eit: return {"conductivity"};
        case ModelKind::cond_pot: return {"conductivity", "potential"};
        case ModelKind::dot: return {"absorption"};
        case ModelKind::cardiac: return {"ischemia"};
        case ModelKind::nonsmooth: return {"coefficient"};
    }
    return {};
}

bool ModelSpec::boundary_source() const {
    return kind == ModelKind::eit || kind == ModelKind::cond_pot || kind == ModelKind::dot;
}

void ModelSpec::validate() const {
    if (kind == ModelKind::eit && !(sigma0 > 0.0)) throw ConfigError("model: sigma0 must be positive");
    if (kind == ModelKind::cardiac && !(sigma_inclusion > 0.0 && sigma_inclusion <= 1.0))
        throw ConfigError("model: sigma_inclusion must lie in (0, 1]");
}

SourceSpec SourceSpec::for_model(const ModelSpec& model, std::string_view text) {
    return SourceSpec{Expression::parse(text), model.boundary_source()};
}

Vector evaluate_nodal(const Mesh& mesh, const Expression& e) {
    Vector v(static_cast<Eigen::Index>(mesh.node_count()));
    for (std::size_t i = 0; i < mesh.node_count(); ++i) v[static_cast<Eigen::Index>(i)] = e(mesh.nodes()[i].x, mesh.nodes()[i].y);
    return v;
}

Vector evaluate_boundary(const Mesh& mesh, const Expression& e) {
    const auto& bn = mesh.boundary_nodes();
    Vector v(static_cast<Eigen::Index>(bn.size()));
    for (std::size_t i = 0; i < bn.size(); ++i) {
        const Vec2 p = mesh.nodes()[static_cast<std::size_t>(bn[i])];
        v[static_cast<Eigen::Index>(i)] = e(p.x, p.y);
    }
    return v;
}

Vector gradient_product(const Mesh& mesh, const ElementGeometry& geo, const Vector& a, const Vector& b) {
    Vector acc = Vector::Zero(static_cast<Eigen::Index>(mesh.node_count()));
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
        const double g = dot(geo.gradient(mesh, t, a), geo.gradient(mesh, t, b));
        const double w = geo.areas[t] / 3.0 * g;
        for (int v : mesh.triangles()[t]) acc[v] += w;
    }
    const auto& m = mesh.lumped_mass();
    for (Eigen::Index i = 0; i < acc.size(); ++i) acc[i] /= m[static_cast<std::size_t>(i)];
    return acc;
}

Model::Model(ModelSpec spec, const Mesh& mesh)
    : spec_(spec), mesh_(&mesh), geometry_(mesh) {
    spec_.validate();
    const Vector one = constant(1.0);
    stiffness_ = assemble_weighted_stiffness(mesh, one);
    mass_ = assemble_weighted_mass(mesh, one);
}

Vector Model::channel(const Inhomogeneity& u, int c) const {
    const auto n = static_cast<Eigen::Index>(node_count());
    return u.segment(c * n, n);
}

void Model::check_admissible(const Inhomogeneity& u) const {
    if (static_cast<std::size_t>(u.size()) != field_size())
        throw DimensionError("inhomogeneity has " + std::to_string(u.size()) + " entries, expected " +
                             std::to_string(field_size()));
    auto require = [&](const Vector& v, double lo, double hi, const char* what) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i]) || v[i] < lo - kAdmissibilityTol || v[i] > hi + kAdmissibilityTol)
                throw AdmissibilityError(std::string(what) + " out of range at node " + std::to_string(i) + ": " +
                                         std::to_string(v[i]));
        }
    };
    const double inf = std::numeric_limits<double>::infinity();
    switch (spec_.kind) {
        case ModelKind::eit: require(u, 0.01 - spec_.sigma0, inf, "conductivity perturbation"); break;
        case ModelKind::cond_pot:
            require(channel(u, 0), -0.99, inf, "conductivity perturbation");
            require(channel(u, 1), -0.99, inf, "potential perturbation");
            break;
        case ModelKind::dot: require(u, 0.0, inf, "absorption"); break;
        case ModelKind::cardiac: require(u, 0.0, 1.0, "ischemia indicator"); break;
        case ModelKind::nonsmooth: require(u, 0.0, inf, "coefficient"); break;
    }
}

Vector Model::source_load(const SourceSpec& f) const {
    if (f.on_boundary) return assemble_boundary_load(*mesh_, evaluate_boundary(*mesh_, f.expression));
    return assemble_domain_load(*mesh_, evaluate_nodal(*mesh_, f.expression));
}

SparseMatrix Model::background_matrix(const Vector& y_ref) const {
    switch (spec_.kind) {
        case ModelKind::eit: return assemble_weighted_stiffness(*mesh_, constant(spec_.sigma0));
        case ModelKind::dot: return stiffness_;
        case ModelKind::cond_pot:
        case ModelKind::nonsmooth: return SparseMatrix(stiffness_ + mass_);
        case ModelKind::cardiac: {
            if (y_ref.size() != static_cast<Eigen::Index>(node_count())) throw DimensionError("background: y_ref size");
            return SparseMatrix(stiffness_ + assemble_lumped_mass(*mesh_, y_ref.cwiseProduct(y_ref)));
        }
    }
    return stiffness_;
}

bool Model::background_singular(const Vector& y_ref) const {
    switch (spec_.kind) {
        case ModelKind::eit:
        case ModelKind::dot: return true;
        case ModelKind::cardiac: return y_ref.size() == 0 || y_ref.cwiseAbs().maxCoeff() == 0.0;
        default: return false;
    }
}

SparseMatrix Model::linear_system(const Inhomogeneity& u) const {
    const Vector none = constant(0.0);
    switch (spec_.kind) {
        case ModelKind::eit: return SparseMatrix(background_matrix(none) + assemble_weighted_stiffness(*mesh_, u));
        case ModelKind::dot: return SparseMatrix(stiffness_ + assemble_lumped_mass(*mesh_, u));
        case ModelKind::cond_pot:
            return SparseMatrix(background_matrix(none) +
                                SparseMatrix(assemble_weighted_stiffness(*mesh_, channel(u, 0)) +
                                             assemble_lumped_mass(*mesh_, channel(u, 1))));
        default: throw SolverError("linear_system: model is nonlinear in y");
    }
}

Vector Model::apply_b(const Inhomogeneity& u, const Vector& y) const {
    switch (spec_.kind) {
        case ModelKind::eit: return assemble_weighted_stiffness(*mesh_, u) * y;
        case ModelKind::dot: return lumped_times(*mesh_, u.cwiseProduct(y));
        case ModelKind::cond_pot:
            return assemble_weighted_stiffness(*mesh_, channel(u, 0)) * y +
                   lumped_times(*mesh_, channel(u, 1).cwiseProduct(y));
        case ModelKind::cardiac: {
            const Vector y3 = y.cwiseProduct(y).cwiseProduct(y);
            return (spec_.sigma_inclusion - 1.0) * (assemble_weighted_stiffness(*mesh_, u) * y) -
                   lumped_times(*mesh_, u.cwiseProduct(y3));
        }
        case ModelKind::nonsmooth: return lumped_times(*mesh_, u.cwiseProduct(y.cwiseAbs().cwiseProduct(y)));
    }
    return Vector();
}

Vector Model::residual(const Inhomogeneity& u, const Vector& y, const Vector& load) const {
    Vector ay;
    if (spec_.kind == ModelKind::cardiac)
        ay = stiffness_ * y + lumped_times(*mesh_, y.cwiseProduct(y).cwiseProduct(y));
    else
        ay = background_matrix(y) * y;
    return ay + apply_b(u, y) - load;
}

SparseMatrix Model::jacobian(const Inhomogeneity& u, const Vector& y) const {
    switch (spec_.kind) {
        case ModelKind::cardiac: {
            const Vector w = constant(1.0) + (spec_.sigma_inclusion - 1.0) * u;
            const Vector d = 3.0 * y.cwiseProduct(y).cwiseProduct(constant(1.0) - u);
            return SparseMatrix(assemble_weighted_stiffness(*mesh_, w) + assemble_lumped_mass(*mesh_, d));
        }
        case ModelKind::nonsmooth:
            return SparseMatrix(stiffness_ + mass_ + assemble_lumped_mass(*mesh_, 2.0 * u.cwiseProduct(y.cwiseAbs())));
        default: return linear_system(u);
    }
}

Inhomogeneity Model::apply_btau_star(const Vector& y, const Vector& w) const {
    const auto n = static_cast<Eigen::Index>(node_count());
    if (y.size() != n || w.size() != n) throw DimensionError("apply_btau_star: field size mismatch");
    switch (spec_.kind) {
        case ModelKind::eit: return gradient_product(*mesh_, geometry_, y, w);
        case ModelKind::dot: return y.cwiseProduct(w);
        case ModelKind::cond_pot: {
            Inhomogeneity z(2 * n);
            z.head(n) = gradient_product(*mesh_, geometry_, y, w);
            z.tail(n) = y.cwiseProduct(w);
            return z;
        }
        case ModelKind::cardiac:
            return (spec_.sigma_inclusion - 1.0) * gradient_product(*mesh_, geometry_, y, w) -
                   y.cwiseProduct(y).cwiseProduct(y).cwiseProduct(w);
        case ModelKind::nonsmooth: return y.cwiseAbs().cwiseProduct(y).cwiseProduct(w);
    }
    return Inhomogeneity();
}

NewtonResult newton_solve(const Model& model, const Inhomogeneity& u, const Vector& load, const Vector& init) {
    constexpr int kMaxIterations = 50;
    constexpr int kMaxHalvings = 10;
    const double tol = 1e-10 * load.norm();
    NewtonResult r;
    r.y = init;
    if (load.norm() == 0.0) {
        r.y = Vector::Zero(load.size());
        return r;
    }
    Vector res = model.residual(u, r.y, load);
    r.residual = res.norm();
    while (true) {
        const SparseMatrix jac = model.jacobian(u, r.y);
        // Rounding floor of the residual evaluation, which dominates for tiny loads.
        const double floor = 100.0 * std::numeric_limits<double>::epsilon() *
                             (SparseMatrix(jac.cwiseAbs()) * r.y.cwiseAbs()).norm();
        if (r.residual <= std::max(tol, floor)) break;
        if (r.iterations >= kMaxIterations)
            throw NonlinearSolveError("newton: no convergence after " + std::to_string(kMaxIterations) + " iterations",
                                      r.residual, r.iterations);
        Vector step;
        try {
            step = solve_spd(model.mesh(), jac, res, Constraint::none);
        } catch (const SolverError& e) {
            throw NonlinearSolveError(std::string("newton: singular Jacobian: ") + e.what(), r.residual, r.iterations);
        }
        double t = 1.0;
        Vector trial = r.y - step;
        Vector trial_res = model.residual(u, trial, load);
        for (int h = 0; h < kMaxHalvings && trial_res.norm() >= r.residual; ++h) {
            t *= 0.5;
            trial = r.y - t * step;
            trial_res = model.residual(u, trial, load);
        }
        r.y = std::move(trial);
        res = std::move(trial_res);
        r.residual = res.norm();
        ++r.iterations;
    }
    return r;
}

Vector forward_solve(const Model& model, const Inhomogeneity& u, const SourceSpec& f, const Vector* init) {
    model.check_admissible(u);
    const Vector load = model.source_load(f);
    const Mesh& mesh = model.mesh();
    switch (model.spec().kind) {
        case ModelKind::eit:
            return solve_spd(mesh, model.linear_system(u), load, Constraint::mean_zero_on_boundary);
        case ModelKind::dot: {
            const bool singular = u.size() == 0 || u.maxCoeff() <= 0.0;
            return solve_spd(mesh, model.linear_system(u), load,
                             singular ? Constraint::mean_zero_on_boundary : Constraint::none);
        }
        case ModelKind::cond_pot: return solve_spd(mesh, model.linear_system(u), load, Constraint::none);
        case ModelKind::nonsmooth: {
            const Vector y0 = init ? *init : solve_spd(mesh, model.stiffness() + model.mass(), load, Constraint::none);
            return newton_solve(model, u, load, y0).y;
        }
        case ModelKind::cardiac: {
            Vector y0;
            if (init && init->size() == load.size() && init->cwiseAbs().maxCoeff() > 0.0) {
                y0 = *init;
            } else {
                double denom = 0.0;
                const auto& m = mesh.lumped_mass();
                for (std::size_t i = 0; i < m.size(); ++i) denom += m[i] * (1.0 - u[static_cast<Eigen::Index>(i)]);
                double c = denom > 0.0 ? std::cbrt(load.sum() / denom) : 1.0;
                if (c == 0.0) c = 1.0;
                y0 = model.constant(c);
            }
            return newton_solve(model, u, load, y0).y;
        }
    }
    return Vector();
}

Vector background_solve(const Model& model, const Vector& y_ref, const SourceSpec& f) {
    return solve_spd(model.mesh(), model.background_matrix(y_ref), model.source_load(f),
                     model.background_constraint(y_ref));
}

}  // namespace idsm

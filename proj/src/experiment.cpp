#include "idsm/experiment.hpp"

#include "idsm/errors.hpp"
#include "idsm/io.hpp"

#include <cstdio>

namespace idsm {

namespace {

std::map<std::string, std::string> parse_meta(const std::string& text) {
    std::map<std::string, std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        const auto eq = line.find(" = ");
        if (line.empty()) continue;
        if (eq == std::string::npos) throw BundleMismatchError("meta: malformed line '" + line + "'");
        out[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return out;
}

std::string fmt_metric(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

GeneratedData finish(const ExperimentConfig& config, Mesh coarse, Mesh fine, bool same_mesh) {
    GeneratedData d{std::move(coarse), std::move(fine), {}, {}, {}};
    const int channels = config.model.channel_count();
    d.truth = rasterize_truth(config.truth, d.coarse, channels);
    const auto sources = config.source_specs();
    for (std::size_t l = 0; l < sources.size(); ++l) {
        SimulatedTrace t;
        if (same_mesh) {
            const Model model(config.model, d.coarse);
            t.exact = trace(d.coarse, forward_solve(model, d.truth, sources[l]));
            t.background = trace(d.coarse, forward_solve(model, model.zero_inhomogeneity(), sources[l]));
        } else {
            t = simulate_measurement(config.model, config.truth, sources[l], d.fine, d.coarse);
        }
        const std::uint64_t seed = pair_seed(config.seed, l);
        d.pairs.push_back({sources[l], add_noise(t.exact, t.background, config.epsilon, seed), config.epsilon, seed});
        d.exact.push_back(std::move(t.exact));
    }
    return d;
}

}  // namespace

GeneratedData generate_data(const ExperimentConfig& config) {
    config.validate();
    return finish(config, build_ellipse_mesh(config.domain), build_ellipse_mesh(config.fine_domain()), false);
}

GeneratedData generate_data_on_coarse(const ExperimentConfig& config) {
    config.validate();
    Mesh coarse = build_ellipse_mesh(config.domain);
    Mesh copy = coarse;
    return finish(config, std::move(coarse), std::move(copy), true);
}

std::string channel_file(const std::string& prefix, int k, const ModelSpec& model, int channel) {
    std::string name = prefix;
    if (k >= 0) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "_%02d", k);
        name += buf;
    }
    if (model.channel_count() > 1 || k < 0) name += "_" + model.channel_names()[static_cast<std::size_t>(channel)];
    return name + ".csv";
}

std::string bundle_meta(const ExperimentConfig& config, const GeneratedData& data) {
    std::string o;
    auto kv = [&](const std::string& k, const std::string& v) { o += k + " = " + v + "\n"; };
    kv("model.kind", std::string(model_kind_name(config.model.kind)));
    kv("noise.epsilon", format_double(config.epsilon));
    kv("noise.seed", std::to_string(config.seed));
    kv("pairs", std::to_string(data.pairs.size()));
    for (std::size_t l = 0; l < data.pairs.size(); ++l) kv("pair." + std::to_string(l) + ".seed", std::to_string(data.pairs[l].seed));
    kv("mesh.hash", hex64(mesh_hash(data.coarse)));
    kv("mesh.nodes", std::to_string(data.coarse.node_count()));
    kv("mesh_fine.hash", hex64(mesh_hash(data.fine)));
    kv("mesh_fine.nodes", std::to_string(data.fine.node_count()));
    kv("truth.count", std::to_string(config.truth.shapes.size()));
    for (std::size_t i = 0; i < config.truth.shapes.size(); ++i)
        kv("truth.shape." + std::to_string(i), format_shape(config.truth.shapes[i]));
    return o;
}

void write_bundle(const std::filesystem::path& dir, const ExperimentConfig& config, const GeneratedData& data) {
    std::filesystem::create_directories(dir);
    write_mesh(dir / "mesh.txt", data.coarse);
    write_mesh(dir / "mesh_fine.txt", data.fine);
    const auto n = static_cast<Eigen::Index>(data.coarse.node_count());
    for (int c = 0; c < config.model.channel_count(); ++c)
        write_nodal_csv(dir / channel_file("truth", -1, config.model, c), data.truth.segment(c * n, n));
    for (std::size_t l = 0; l < data.pairs.size(); ++l) {
        const auto pd = dir / ("pair_" + std::to_string(l));
        write_text(pd / "source.txt", data.pairs[l].source.expression.text() + "\n");
        write_boundary_csv(pd / "measurement.csv", data.coarse, data.pairs[l].measurement);
        write_boundary_csv(pd / "exact.csv", data.coarse, data.exact[l]);
    }
    write_text(dir / "meta", bundle_meta(config, data));
}

Bundle read_bundle(const std::filesystem::path& dir, const ExperimentConfig& config) {
    if (!std::filesystem::is_directory(dir)) throw BundleMismatchError("bundle '" + dir.string() + "' does not exist");
    try {
        Bundle b;
        b.meta = parse_meta(read_text(dir / "meta"));
        b.mesh = build_ellipse_mesh(config.domain);
        const std::string expected = hex64(mesh_hash(b.mesh));
        if (b.meta["mesh.hash"] != expected)
            throw BundleMismatchError("bundle mesh hash " + b.meta["mesh.hash"] + " does not match config mesh " + expected);
        if (hex64(mesh_hash(read_mesh(dir / "mesh.txt"))) != expected)
            throw BundleMismatchError("bundle mesh.txt does not match its recorded hash");
        if (b.meta["model.kind"] != model_kind_name(config.model.kind))
            throw BundleMismatchError("bundle model '" + b.meta["model.kind"] + "' differs from config");
        const std::size_t n = b.mesh.node_count();
        const int channels = config.model.channel_count();
        b.truth = Vector::Zero(static_cast<Eigen::Index>(n) * channels);
        for (int c = 0; c < channels; ++c)
            b.truth.segment(c * static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) =
                read_nodal_csv(dir / channel_file("truth", -1, config.model, c), n);
        const std::size_t npairs = static_cast<std::size_t>(parse_u64(b.meta["pairs"], "meta pairs"));
        for (std::size_t l = 0; l < npairs; ++l) {
            const auto pd = dir / ("pair_" + std::to_string(l));
            CauchyPair p{SourceSpec::for_model(config.model, read_text(pd / "source.txt")),
                         read_boundary_csv(pd / "measurement.csv", b.mesh.boundary_count()),
                         parse_double(b.meta["noise.epsilon"], "meta noise.epsilon"),
                         parse_u64(b.meta["pair." + std::to_string(l) + ".seed"], "meta seed")};
            b.pairs.push_back(std::move(p));
        }
        if (b.pairs.empty()) throw BundleMismatchError("bundle has no data pairs");
        return b;
    } catch (const BundleMismatchError&) {
        throw;
    } catch (const Error& e) {
        throw BundleMismatchError(std::string("bundle '") + dir.string() + "': " + e.what());
    }
}

Reconstruction reconstruct(const ExperimentConfig& config, const Mesh& mesh, const Inhomogeneity& truth,
                           const std::vector<CauchyPair>& pairs) {
    const Model model(config.model, mesh);
    Reconstruction r;
    r.trace = idsm_run(model, config.idsm, pairs);
    for (const auto& it : r.trace.iterations) r.metrics.push_back(evaluate_metrics(mesh, it.u, truth));
    return r;
}

std::string run_summary(const ExperimentConfig& config, const Reconstruction& r) {
    std::string o;
    auto kv = [&](const std::string& k, const std::string& v) { o += k + " = " + v + "\n"; };
    kv("model.kind", std::string(model_kind_name(config.model.kind)));
    kv("iterations", std::to_string(r.trace.iterations.size()));
    for (std::size_t k = 0; k < r.trace.iterations.size(); ++k) {
        const auto& it = r.trace.iterations[k];
        const std::string p = "iteration." + std::to_string(k + 1) + ".";
        kv(p + "l2_error", fmt_metric(r.metrics[k].l2_error));
        kv(p + "centroid_error", fmt_metric(r.metrics[k].centroid_error));
        kv(p + "jaccard", fmt_metric(r.metrics[k].jaccard));
        kv(p + "rescale", it.rescale_applied ? fmt_metric(it.rescale) : "none");
        kv(p + "update_skipped", it.update_skipped ? "1" : "0");
        kv(p + "projection_flagged", it.projection_flagged ? "1" : "0");
        kv(p + "data_misfit", fmt_metric(it.data_misfit));
    }
    const auto& last = r.metrics.back();
    kv("final.l2_error", fmt_metric(last.l2_error));
    kv("final.centroid_error", fmt_metric(last.centroid_error));
    kv("final.jaccard", fmt_metric(last.jaccard));
    return o;
}

void write_reconstruction(const std::filesystem::path& dir, const ExperimentConfig& config, const Mesh& mesh,
                          const Reconstruction& r) {
    std::filesystem::create_directories(dir);
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    for (std::size_t k = 0; k < r.trace.iterations.size(); ++k) {
        const auto& it = r.trace.iterations[k];
        for (int c = 0; c < config.model.channel_count(); ++c) {
            write_nodal_csv(dir / channel_file("u", static_cast<int>(k + 1), config.model, c), it.u.segment(c * n, n));
            write_nodal_csv(dir / channel_file("eta", static_cast<int>(k), config.model, c), it.eta.segment(c * n, n));
        }
    }
    write_text(dir / "summary.txt", run_summary(config, r));
}

ProjectionRule comparison_box(const ExperimentConfig& config) {
    if (config.idsm.projection.kind == ProjectionRule::Kind::box_clamp) return config.idsm.projection;
    ProjectionRule r;
    r.lower.assign(static_cast<std::size_t>(config.model.channel_count()), 0.0);
    r.upper.assign(static_cast<std::size_t>(config.model.channel_count()), 1.0);
    return r;
}

Comparison compare(const ExperimentConfig& config, const Mesh& mesh, const Inhomogeneity& truth,
                   const std::vector<CauchyPair>& pairs) {
    const Model model(config.model, mesh);
    Comparison c;
    const Inhomogeneity eta = dsm_index_baseline(model, pairs, config.dsm_gamma);
    c.dsm_scale = best_scale(mesh, eta, truth);
    c.dsm_estimate = apply_projection(comparison_box(config), c.dsm_scale * eta, model.zero_inhomogeneity(), mesh.node_count());
    c.dsm = evaluate_metrics(mesh, c.dsm_estimate, truth);
    const Reconstruction r = reconstruct(config, mesh, truth, pairs);
    c.idsm_estimate = r.trace.iterations.back().u;
    c.idsm = r.metrics.back();
    return c;
}

std::string comparison_report(const Comparison& c) {
    std::string o;
    auto kv = [&](const std::string& k, const std::string& v) { o += k + " = " + v + "\n"; };
    kv("dsm.scale", fmt_metric(c.dsm_scale));
    kv("dsm.l2_error", fmt_metric(c.dsm.l2_error));
    kv("dsm.centroid_error", fmt_metric(c.dsm.centroid_error));
    kv("dsm.jaccard", fmt_metric(c.dsm.jaccard));
    kv("idsm.l2_error", fmt_metric(c.idsm.l2_error));
    kv("idsm.centroid_error", fmt_metric(c.idsm.centroid_error));
    kv("idsm.jaccard", fmt_metric(c.idsm.jaccard));
    return o;
}

}  // namespace idsm

// idsm: generate synthetic data bundles, reconstruct, compare, plot.
//
// Exit codes: 0 success, 2 config or parse error, 3 solver failure,
// 4 bundle mismatch, 1 anything else (I/O).

#include "idsm/config.hpp"
#include "idsm/errors.hpp"
#include "idsm/experiment.hpp"
#include "idsm/io.hpp"
#include "idsm/plot.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace idsm;

namespace {

struct Options {
    std::string config;
    std::string bundle;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string field;
    std::string mesh;
};

ExperimentConfig load(const Options& o) {
    ExperimentConfig c = load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    return c;
}

fs::path out_dir(const Options& o, const ExperimentConfig& c, const char* sub) {
    return o.out.empty() ? fs::path(c.output_dir) / sub : fs::path(o.out);
}

int cmd_generate(const Options& o) {
    const ExperimentConfig c = load(o);
    const fs::path dir = out_dir(o, c, "bundle");
    write_bundle(dir, c, generate_data(c));
    std::cout << dir.string() << "\n";
    return 0;
}

int cmd_reconstruct(const Options& o) {
    const ExperimentConfig c = load(o);
    const Bundle b = read_bundle(o.bundle, c);
    const fs::path dir = out_dir(o, c, "reconstruction");
    const Reconstruction r = reconstruct(c, b.mesh, b.truth, b.pairs);
    write_reconstruction(dir, c, b.mesh, r);
    std::cout << run_summary(c, r);
    return 0;
}

int cmd_compare(const Options& o) {
    const ExperimentConfig c = load(o);
    const Bundle b = read_bundle(o.bundle, c);
    const std::string report = comparison_report(compare(c, b.mesh, b.truth, b.pairs));
    write_text(out_dir(o, c, "compare") / "report.txt", report);
    std::cout << report;
    return 0;
}

int cmd_plot(const Options& o) {
    Mesh mesh;
    try {
        mesh = read_mesh(o.mesh);
    } catch (const MeshError& e) {
        throw ParseError(e.what());
    }
    const Vector field = read_nodal_csv(o.field, mesh.node_count());
    std::optional<ExperimentConfig> c;
    if (!o.config.empty()) c = load(o);
    const Image img = render_field(mesh, field, c ? &c->truth : nullptr);
    const fs::path path = o.out.empty() ? fs::path(o.field).replace_extension(".ppm") : fs::path(o.out);
    write_text(path, to_ppm(img));
    std::cout << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iterative direct sampling reconstructions on elliptical domains"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;

    auto* gen = app.add_subcommand("generate", "simulate Cauchy data and write a bundle");
    auto* rec = app.add_subcommand("reconstruct", "run the iterative reconstruction on a bundle");
    auto* cmp = app.add_subcommand("compare", "compare the classical and iterative indicators");
    auto* plt = app.add_subcommand("plot", "render a nodal field as a PPM image");
    for (auto* s : {gen, rec, cmp}) {
        s->add_option("--config", o.config, "experiment config")->required()->check(CLI::ExistingFile);
        s->add_option("--out", o.out, "output directory");
        s->add_option("--seed", seed, "noise seed, overrides the config");
    }
    for (auto* s : {rec, cmp}) s->add_option("--bundle", o.bundle, "data bundle directory")->required();
    plt->add_option("--field", o.field, "nodal CSV")->required();
    plt->add_option("--mesh", o.mesh, "mesh file")->required();
    plt->add_option("--config", o.config, "config whose truth geometry is drawn");
    plt->add_option("--out", o.out, "output image");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    for (auto* s : {gen, rec, cmp})
        if (s->count("--seed")) o.seed = seed;

    try {
        if (*gen) return cmd_generate(o);
        if (*rec) return cmd_reconstruct(o);
        if (*cmp) return cmd_compare(o);
        return cmd_plot(o);
    } catch (const BundleMismatchError& e) {
        std::cerr << "bundle error: " << e.what() << "\n";
        return 4;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const CompatibilityError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const AdmissibilityError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

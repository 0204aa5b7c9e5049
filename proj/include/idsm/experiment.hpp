#pragma once

// End-to-end pipeline: data generation, bundles on disk, reconstruction and
// comparison against the classical index.
//
// Bundle layout:
//   mesh.txt, mesh_fine.txt            reconstruction and data meshes
//   truth_<channel>.csv                u* on the reconstruction mesh
//   pair_<l>/source.txt                source expression
//   pair_<l>/measurement.csv           noisy trace
//   pair_<l>/exact.csv                 noise-free trace
//   meta                               key = value record of the generation

#include "idsm/config.hpp"
#include "idsm/metrics.hpp"
#include "idsm/sampling.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace idsm {

struct GeneratedData {
    Mesh coarse;
    Mesh fine;
    Inhomogeneity truth;
    std::vector<CauchyPair> pairs;
    std::vector<Vector> exact;
};

GeneratedData generate_data(const ExperimentConfig& config);

/// Same data on the reconstruction mesh itself (no fine mesh). Test fixture.
GeneratedData generate_data_on_coarse(const ExperimentConfig& config);

std::string bundle_meta(const ExperimentConfig& config, const GeneratedData& data);
void write_bundle(const std::filesystem::path& dir, const ExperimentConfig& config, const GeneratedData& data);

struct Bundle {
    Mesh mesh;
    Inhomogeneity truth;
    std::vector<CauchyPair> pairs;
    std::map<std::string, std::string> meta;
};

/// Reads a bundle and checks it against the mesh the config produces.
/// Missing, truncated or mismatched content throws BundleMismatchError.
Bundle read_bundle(const std::filesystem::path& dir, const ExperimentConfig& config);

struct Reconstruction {
    IterationTrace trace;
    std::vector<Metrics> metrics;  // one per iterate u_1..u_K
};

Reconstruction reconstruct(const ExperimentConfig& config, const Mesh& mesh, const Inhomogeneity& truth,
                           const std::vector<CauchyPair>& pairs);
std::string run_summary(const ExperimentConfig& config, const Reconstruction& r);
void write_reconstruction(const std::filesystem::path& dir, const ExperimentConfig& config, const Mesh& mesh,
                          const Reconstruction& r);

struct Comparison {
    Metrics idsm;
    Metrics dsm;
    double dsm_scale = 0.0;
    Inhomogeneity dsm_estimate;
    Inhomogeneity idsm_estimate;
};

/// Classical index scaled by its best fit to the truth and projected with
/// the box rule; the iterative estimate is the last iterate.
Comparison compare(const ExperimentConfig& config, const Mesh& mesh, const Inhomogeneity& truth,
                   const std::vector<CauchyPair>& pairs);
std::string comparison_report(const Comparison& c);

/// Box used for the classical estimate (the admissible box for CARDIAC).
ProjectionRule comparison_box(const ExperimentConfig& config);

std::string channel_file(const std::string& prefix, int k, const ModelSpec& model, int channel);

}  // namespace idsm

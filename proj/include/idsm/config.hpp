#pragma once

// Experiment configuration: flat "key = value" text with dotted keys.
//
//   model.kind              eit | cond_pot | dot | cardiac | nonsmooth
//   model.sigma0            background conductivity (eit)
//   model.sigma_inclusion   conductivity inside the ischemic region (cardiac)
//   domain.a, domain.b      ellipse semi-axes
//   mesh.h, mesh.h_fine     reconstruction and data-generation edge lengths
//   truth.count             number of shapes, then truth.shape.<i>:
//                             "square cx cy half_width v0 [v1]"
//                             "circle cx cy radius v0 [v1]"
//   sources.count           number of sources, then sources.<i> = expression
//   noise.epsilon, noise.seed
//   idsm.alpha, idsm.iterations, idsm.correction (dfp | bfg),
//   idsm.resolver (distance_power | fundamental_grad_l2 | fundamental_grad_h1_cubed),
//   idsm.gamma, idsm.curvature_threshold
//   projection.kind         box_clamp | relaxed_normalize
//   projection.lower, projection.upper   one value per channel, space separated
//   projection.keep         relaxed_normalize weight of the previous iterate
//   dsm.gamma               exponent of the classical index
//   output.dir
//
// Lines starting with '#' and blank lines are ignored. Serialization writes
// every key in the order above, so serialize(parse(serialize(c))) is
// byte-identical to serialize(c).

#include "idsm/mesh.hpp"
#include "idsm/models.hpp"
#include "idsm/sampling.hpp"
#include "idsm/synthdata.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace idsm {

struct ExperimentConfig {
    ModelSpec model;
    DomainSpec domain;
    double h_fine = 0.02;
    InclusionGeometry truth;
    std::vector<std::string> sources;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    IdsmConfig idsm;
    double dsm_gamma = 1.0;
    std::string output_dir = "out";

    /// Throws ConfigError (or GeometryError, InvalidDomainError) on any violation.
    void validate() const;

    std::vector<SourceSpec> source_specs() const;
    DomainSpec fine_domain() const {
        DomainSpec d = domain;
        d.edge_length = h_fine;
        return d;
    }
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

std::string format_shape(const Shape& s);
Shape parse_shape(std::string_view text);

}  // namespace idsm

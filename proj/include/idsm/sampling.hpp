#pragma once

// Index functions: the classical direct sampling estimate and the iterative
// scheme with a quasi-Newton resolver.
//
// Every pairing <a, b> in this module is the lumped-mass domain product summed
// over channels.

#include "idsm/dtn.hpp"
#include "idsm/models.hpp"
#include "idsm/synthdata.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace idsm {

enum class CorrectionKind { dfp, bfg };
enum class ResolverInitKind { distance_power, fundamental_grad_l2, fundamental_grad_h1_cubed };

std::string_view correction_kind_name(CorrectionKind k);
CorrectionKind parse_correction_kind(std::string_view s);
std::string_view resolver_init_name(ResolverInitKind k);
ResolverInitKind parse_resolver_init(std::string_view s);

/// Duality product on channel-major fields.
double pairing(const Mesh& mesh, const Vector& a, const Vector& b);
double l1_norm(const Mesh& mesh, const Vector& a);

/// Approximate inverse of the kernel operator: a nodal multiplier plus a list
/// of rank-two corrections.
class Resolver {
public:
    Resolver(const Mesh& mesh, Vector base);

    const Mesh& mesh() const { return *mesh_; }
    const Vector& base() const { return base_; }
    std::size_t correction_count() const { return terms_.size(); }

    Vector apply(const Vector& xi) const;

    /// Scales the multiplier by |u1|_1 / |R zeta1|_1. Only valid before any
    /// correction; throws DegenerateScalingError when the denominator vanishes.
    double rescale(const Vector& u1, const Vector& zeta1);

    /// Adds a correction so that R zeta = u afterwards. Returns false (and
    /// leaves R unchanged) when a curvature pairing is below
    /// threshold * |zeta| |u| (resp. |zeta| |R zeta|).
    bool update(CorrectionKind kind, const Vector& u, const Vector& zeta, double threshold = 1e-12);
    bool dfp_update(const Vector& u, const Vector& zeta, double threshold = 1e-12) {
        return update(CorrectionKind::dfp, u, zeta, threshold);
    }
    bool bfg_update(const Vector& u, const Vector& zeta, double threshold = 1e-12) {
        return update(CorrectionKind::bfg, u, zeta, threshold);
    }

private:
    struct Term {
        CorrectionKind kind;
        Vector u;
        Vector r_zeta;
        double zeta_u;
        double zeta_r_zeta;
    };
    const Mesh* mesh_;
    Vector base_;
    std::vector<Term> terms_;
};

/// Multiplier per node, replicated over channels. Boundary nodes of the
/// fundamental-solution kinds take the value of the nearest interior node.
Vector resolver_base(ResolverInitKind kind, const Mesh& mesh, double gamma);
Resolver resolver_init(ResolverInitKind kind, const Mesh& mesh, double gamma, int channels);

struct ProjectionRule {
    enum class Kind { box_clamp, relaxed_normalize };
    Kind kind = Kind::box_clamp;
    /// Per-channel bounds (box_clamp).
    std::vector<double> lower;
    std::vector<double> upper;
    /// Weight of the previous iterate (relaxed_normalize).
    double keep = 0.8;

    void validate(int channels) const;
    /// Default rule for a model: box on the admissible range, relaxed for CARDIAC.
    static ProjectionRule default_for(const ModelSpec& model);
};

/// Returns P(eta). `flagged` is set when relaxed normalization meets a
/// constant indicator (the normalized part is then 0.5).
Inhomogeneity apply_projection(const ProjectionRule& rule, const Inhomogeneity& eta, const Inhomogeneity& u_prev,
                               std::size_t nodes, bool* flagged = nullptr);

struct IdsmConfig {
    double alpha = 1.0;
    int iterations = 11;
    CorrectionKind correction = CorrectionKind::dfp;
    ResolverInitKind resolver = ResolverInitKind::distance_power;
    double gamma = 1.0;
    double curvature_threshold = 1e-12;
    ProjectionRule projection;

    void validate(int channels) const;
};

struct IterationRecord {
    Inhomogeneity zeta;
    Inhomogeneity eta;
    /// u_{k+1} = P(eta_k).
    Inhomogeneity u;
    /// Empty on the last iteration, where no update is computed.
    Inhomogeneity zeta_tilde;
    double rescale = 1.0;
    bool rescale_applied = false;
    bool update_skipped = false;
    bool projection_flagged = false;
    /// Boundary misfit sum_l |T y_{k+1,l} - y_d,l|_Gamma (NaN when not computed).
    double data_misfit = 0.0;
};

struct IterationTrace {
    std::vector<IterationRecord> iterations;
};

/// Sum of per-pair B_tau^* fields in the order given.
Inhomogeneity aggregate_zeta(const Model& model, const std::vector<Vector>& states, const std::vector<Vector>& pullbacks);

/// Iterative scheme for models with linear background operator.
IterationTrace idsm_run_linear(const Model& model, const IdsmConfig& config, const std::vector<CauchyPair>& pairs);
/// Iterative scheme with the background re-linearized at every iterate.
IterationTrace idsm_run_nonlinear(const Model& model, const IdsmConfig& config, const std::vector<CauchyPair>& pairs);
/// Dispatches on the model.
IterationTrace idsm_run(const Model& model, const IdsmConfig& config, const std::vector<CauchyPair>& pairs);

/// (-Delta_Gamma)^gamma of a boundary field by FFT on a uniform arclength
/// grid. The symbol is truncated above the Nyquist frequency of the boundary
/// node count, and the mean mode is removed.
Vector boundary_fractional_laplacian(const Mesh& mesh, const Vector& v, double gamma);

/// Classical index function summed over pairs and weighted by d(x, Gamma)^gamma,
/// replicated over channels.
Inhomogeneity dsm_index_baseline(const Model& model, const std::vector<CauchyPair>& pairs, double gamma);

}  // namespace idsm

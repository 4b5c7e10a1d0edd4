#pragma once

#include "roughdrift/heat.hpp"

#include <optional>
#include <string>
#include <vector>

namespace roughdrift {

enum class LadderMode { holder, lqp };

const char* to_string(LadderMode mode);
LadderMode ladder_mode_from_string(const std::string& s);

/// T(Phi) = (b . grad) U_Phi where U_Phi solves the backward heat equation
/// with forcing -Phi. The drift is read at the grid time nodes.
GridField apply_T(const DriftField& b, const Forcing& phi, const SpaceTimeBox& box,
                  const HeatOptions& opts = {});
/// Contraction of b with a precomputed gradient field (c*d + j layout).
GridField contract_gradient(const DriftField& b, const GridField& grad);

struct LadderLevel {
    GridField phi;      // T^k(b)
    HeatSolution U;     // U_{T^k(b)}
    double phi_norm = 0.0;
    double grad_sup = 0.0;
    double hess_norm = 0.0;
};

struct ZvonkinLadder {
    DriftField drift;
    SpaceTimeBox box;
    LadderMode mode = LadderMode::lqp;
    double alpha = 0.5;  // Hölder exponent in holder mode
    std::vector<LadderLevel> levels;  // k = 0..n
    GridField residual;               // T^{n+1}(b) = b^{(n)}
    double residual_norm = 0.0;

    int depth() const { return static_cast<int>(levels.size()) - 1; }
    double horizon() const { return box.horizon; }
    /// 2^{n+1} T^{n+1}(b).
    GridField scaled_residual() const;
};

struct LadderOptions {
    HeatOptions heat{};
    std::size_t holder_probes = 256;
    std::uint64_t holder_seed = 0x5eed;
};

/// Levels 0..depth and the residual drift. Norms follow the mode: Hölder
/// norms and sup-norm Hessians, or mixed norms for both.
ZvonkinLadder build_ladder(const DriftField& b, int depth, const SpaceTimeBox& box, LadderMode mode,
                           const LadderOptions& opts = {});

struct TransformedFields {
    GridField U;      // U^{(n)}
    GridField grad;   // grad U^{(n)}
    GridField drift;  // b^{(n)}
};
TransformedFields transformed_fields(const ZvonkinLadder& ladder);
/// Same sums truncated at level n <= depth, with b^{(n)} = T^{n+1}(b).
TransformedFields transformed_fields(const ZvonkinLadder& ladder, int n);

struct LevelRow {
    int k = 0;
    double phi_norm = 0.0;
    double grad_sup = 0.0;
    double hess_norm = 0.0;
    double ratio = 0.0;      // ||Phi_{k+1}|| / ||Phi_k||
    double eps_chain = 0.0;  // eps^k ||b||^{k+1}
};

struct HorizonRow {
    double horizon = 0.0;
    std::vector<LevelRow> levels;
    std::vector<double> C_partial;  // C_k = sum_{j<=k} ||grad U_j||
    std::vector<double> D_partial;
    double C_n = 0.0;
    double D_n = 0.0;
    double b_norm = 0.0;
    double epsilon = 0.0;           // (4 ||b||)^-1, 0 when b = 0
    double residual_norm = 0.0;
    double fitted_prefactor = 0.0;  // max_k ||Phi_k|| 2^k
    double max_ratio = 0.0;
    double max_eps_ratio_excess = 0.0;  // max_k ratio_k - eps ||b||
    bool contracting = false;           // C_n <= 1/2
};

struct ContractionReport {
    LadderMode mode = LadderMode::lqp;
    int depth = 0;
    std::vector<HorizonRow> rows;  // in the order given
    std::optional<double> T0;      // largest horizon with C_n <= 1/2
};

HorizonRow summarize(const ZvonkinLadder& ladder);

/// Rebuilds the ladder at every horizon on `box` with the horizon replaced.
ContractionReport contraction_report(const DriftField& b, int depth, const SpaceTimeBox& box, LadderMode mode,
                                     const std::vector<double>& horizons, const LadderOptions& opts = {});

/// |Psi(x) - Psi(x')| / |x - x'| for Psi = id + U^{(n)}(t, .) over random node
/// pairs at every time slice; returns the observed (min, max).
std::pair<double, double> comparability_range(const GridField& U, std::size_t pairs, std::uint64_t seed);

}  // namespace roughdrift

#pragma once

#include "roughdrift/field.hpp"
#include "roughdrift/zvonkin.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace roughdrift {

/// Euler–Maruyama settings for dX = b(t, X) dt + dW on [0, T].
struct SimConfig {
    double horizon = 1.0;
    std::size_t steps = 100;
    std::size_t paths = 1000;
    std::uint64_t seed = 1;
    std::optional<int> depth;
    std::vector<double> moment_orders{2.0};

    double step() const { return horizon / static_cast<double>(steps); }
    /// steps = T / h; throws unless h divides T to within one ulp of the count.
    static std::size_t steps_for(double horizon, double h);
    void validate() const;
};

/// Brownian increments dW[path][step][axis], generated once and shared by
/// every batch that consumes them.
struct Increments {
    int dim = 1;
    std::size_t paths = 0;
    std::size_t steps = 0;
    double h = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> dW;
    std::uint64_t checksum = 0;  // FNV-1a over the raw bytes

    double at(std::size_t p, std::size_t s, int a) const {
        return dW[(p * steps + s) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(a)];
    }
};

std::shared_ptr<const Increments> make_increments(int dim, const SimConfig& cfg);
std::uint64_t checksum(const std::vector<double>& values);

struct PathBatch {
    int dim = 1;
    std::size_t paths = 0;
    std::size_t steps = 0;
    double h = 0.0;
    std::vector<double> start;
    std::vector<double> traj;  // [path][step 0..steps][axis]
    std::shared_ptr<const Increments> increments;
    std::vector<double> drift_energy;  // int |b(s, X_s)|^2 ds per path
    std::vector<double> sup_distance;  // sup_t |X_t - partner_t|, coupled runs only

    double horizon() const { return h * static_cast<double>(steps); }
    const double* state(std::size_t p, std::size_t s) const {
        return traj.data() + (p * (steps + 1) + s) * static_cast<std::size_t>(dim);
    }
};

/// Left-point Euler–Maruyama. Non-finite drift values raise a singularity
/// error naming the path and step.
PathBatch simulate(const DriftField& b, const SimConfig& cfg, std::span<const double> x);
PathBatch simulate(const DriftField& b, std::shared_ptr<const Increments> inc, std::span<const double> x);

/// Two starts driven by the same increments; fills sup_distance in both.
std::pair<PathBatch, PathBatch> simulate_coupled(const DriftField& b, const SimConfig& cfg,
                                                 std::span<const double> x1, std::span<const double> x2);

/// Monte Carlo result with the inequality it was checked against.
struct EstimateReport {
    std::string quantity;
    double estimate = 0.0;
    double se = 0.0;
    std::size_t samples = 0;
    std::string inequality;
    double bound = 0.0;
    bool pass = true;
    bool report_only = false;
    std::vector<std::string> warnings;
};

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};
MeanSe mean_se(std::span<const double> v);

/// Values of X at every step, Y = X + U^{(n)}(t, X), sigma = grad U^{(n)}(t, X)
/// and b^{(n)}(t, X), evaluated with the grid conventions of GridField.
struct Transform {
    int dim = 1;
    std::size_t paths = 0;
    std::size_t steps = 0;
    std::vector<double> Y;      // [path][step][axis]
    std::vector<double> sigma;  // [path][step][c*d + j]
    std::vector<double> drift;  // [path][step][axis]
    double sigma_sup = 0.0;     // max Frobenius norm of sigma

    const double* y(std::size_t p, std::size_t s) const {
        return Y.data() + (p * (steps + 1) + s) * static_cast<std::size_t>(dim);
    }
    const double* sig(std::size_t p, std::size_t s) const {
        return sigma.data() + (p * (steps + 1) + s) * static_cast<std::size_t>(dim * dim);
    }
    const double* bn(std::size_t p, std::size_t s) const {
        return drift.data() + (p * (steps + 1) + s) * static_cast<std::size_t>(dim);
    }
};

Transform transformed_process(const PathBatch& batch, const TransformedFields& fields);
Transform transformed_process(const PathBatch& batch, const ZvonkinLadder& ladder);

struct ComparabilityStats {
    double sigma_sup = 0.0;
    std::size_t sigma_violations = 0;  // steps with |sigma| > 1/2
    double ratio_min = 1.0;            // min |dY| / |dX|
    double ratio_max = 1.0;
    std::size_t ratio_violations = 0;  // steps outside [1/2, 3/2]
    std::size_t checked = 0;
};

/// Pathwise comparison of coupled transforms at every step.
ComparabilityStats comparability(const PathBatch& b1, const Transform& t1, const PathBatch& b2, const Transform& t2);

/// E[sup_t |r_t|] of the discretized Itô reformulation
///   r_t = Y_t - Y_0 - sum b^{(n)} h - sum (sigma + I) dW.
EstimateReport ito_residual(const PathBatch& batch, const Transform& tr);

struct OrderFit {
    double order = 0.0;      // slope of log(value) against log(h)
    double prefactor = 0.0;
};
/// Least squares on (log x, log y).
OrderFit fit_power(std::span<const double> x, std::span<const double> y);

/// A_T^{(n)} per path: left-point sum of |sigma^1 - sigma^2|^2 / |Y^1 - Y^2|^2 h,
/// with terms dropped when |Y^1 - Y^2| < 1e-14 max(1, |Y^1|).
std::vector<double> a_process(const PathBatch& b1, const Transform& t1, const PathBatch& b2, const Transform& t2);

/// Ito constant of the p-th moment inequality, p (p - 1) / 2.
double ito_constant(double p);

/// E[exp(k A_T)] with standard error.
EstimateReport exp_a_estimate(std::span<const double> A, double k);

struct HolderRow {
    double separation = 0.0;
    double ratio = 0.0;  // E[sup|dX|^p]^{1/p} / |x1 - x2|
    double se = 0.0;
};
struct HolderMomentReport {
    double p = 2.0;
    std::vector<HolderRow> rows;  // in the order of the given pairs
    EstimateReport summary;       // max R over two smallest vs 2 x max R over two largest
};

HolderMomentReport holder_moment_estimate(const DriftField& b, const SimConfig& cfg,
                                          const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                                          double p);

/// E[int |dX|^{p-1} |b^{(n)}(s, X^1) - b^{(n)}(s, X^2)| ds] for coupled transforms.
EstimateReport drift_difference(const PathBatch& b1, const Transform& t1, const PathBatch& b2, const Transform& t2,
                                double p);

/// Sample moments E|X_T|^p on the first half and on all paths.
std::vector<EstimateReport> moment_stability(const PathBatch& batch, const std::vector<double>& orders);

/// Share of paths whose int |b(X)|^2 exceeds twice the 99.9th percentile
/// of the same functional along driftless paths from the same start.
EstimateReport integrability_monitor(const DriftField& b, const PathBatch& batch);

double percentile(std::vector<double> v, double q);

}  // namespace roughdrift

#pragma once

#include "roughdrift/sde.hpp"

#include <functional>
#include <string>
#include <vector>

namespace roughdrift {

/// Read-only view of one trajectory: (steps + 1) states of `dim` values.
struct PathView {
    const double* data = nullptr;
    std::size_t steps = 0;
    int dim = 1;
    double h = 0.0;
    const double* state(std::size_t s) const { return data + s * static_cast<std::size_t>(dim); }
};

using PathFunctional = std::function<double(const PathView&)>;

struct NamedFunctional {
    std::string name;
    PathFunctional fn;
};

/// max(0, X_T . e1), X_T . e1, and max_t X_t . e1.
std::vector<NamedFunctional> standard_functionals();

/// Brownian paths x + W and their discretized log-weights
///   log rho_T = sum b(t_s, x + W_s) . dW_s - 1/2 sum |b(t_s, x + W_s)|^2 h.
struct GirsanovWeights {
    PathBatch brownian;
    std::vector<double> log_rho;
    std::vector<double> energy;  // sum |b(t_s, x + W_s)|^2 h
};

GirsanovWeights girsanov_weights(const DriftField& b, std::shared_ptr<const Increments> inc, std::span<const double> x);
GirsanovWeights girsanov_weights(const DriftField& b, const SimConfig& cfg, std::span<const double> x);

/// E[Phi(x + W) rho_T]; carries the effective sample size and a warning when
/// it falls below 1% of the paths.
EstimateReport girsanov_expectation(const PathFunctional& phi, const GirsanovWeights& w);
/// Plain average of Phi over Euler paths.
EstimateReport direct_expectation(const PathFunctional& phi, const PathBatch& batch);
/// Sample mean of rho_T against 1.
EstimateReport martingale_check(const GirsanovWeights& w);

double effective_sample_size(std::span<const double> log_weights);

/// Direct and weighted estimates on common increments; passes when they
/// differ by less than 3 combined standard errors.
struct TwoEstimatorRow {
    std::string functional;
    EstimateReport direct;
    EstimateReport weighted;
    bool pass = false;
};
std::vector<TwoEstimatorRow> two_estimator_check(const DriftField& b, const SimConfig& cfg, std::span<const double> x,
                                                 const std::vector<NamedFunctional>& functionals);

/// Gaussian smoothing E[f(t, x + sqrt(v) Z)] of a scalar field by tensor
/// composite Gauss–Legendre over |z_a| <= 8, weights normalized to one.
struct GaussSettings {
    std::size_t panels = 0;  // 0 picks by dimension: 256, 48, 16
    std::size_t points = 4;
};
double gaussian_expectation(const FieldFn& f, double t, std::span<const double> x, double v,
                            const GaussSettings& gs = {});

/// int_s^t E[f(r, x + W_{r-s})] dr with r - s = (t - s) u^2 and composite
/// Gauss–Legendre in u.
double additive_functional(const FieldFn& f, double s, double t, std::span<const double> x,
                           std::size_t time_panels = 16, const GaussSettings& gs = {});

/// beta with 2 beta = 2 - 2/q' - d/p'.
double kernel_beta(double p_prime, double q_prime, int dim);

struct KernelBound {
    double p_prime = 0.0;
    double q_prime = 0.0;
    double beta = 0.0;
    double constant = 0.0;         // fitted prefactor over ||f||
    double fitted_exponent = 0.0;
    double f_norm = 0.0;
    std::vector<std::pair<double, double>> horizons;  // (s, t)
    std::vector<double> values;                       // sup over probes per pair
    std::vector<double> running_sup;                  // sup after each probe, largest pair
    bool pass = false;                                // fitted exponent >= beta - 0.1
};

/// Left side of the kernel estimate over (s, t) pairs, sup over probes,
/// least-squares fit in (t - s). `norm_box` supplies ||f||_{L^q'_p'} on
/// [0, max t].
KernelBound kernel_bound_estimate(const FieldFn& f, double p_prime, double q_prime,
                                  const std::vector<std::pair<double, double>>& pairs,
                                  const std::vector<std::vector<double>>& probes, const SpaceTimeBox& norm_box);

struct KhasminskiiReport {
    double alpha = 0.0;  // sup over probes of int_0^T E f(s, x + W_s) ds
    std::vector<double> alpha_per_probe;
    EstimateReport mc;   // sup over probes of E exp(int_0^T f(s, x + W_s) ds)
};

/// Quadrature alpha, then Monte Carlo with left-point Riemann sums on
/// Brownian paths from each probe; asserted only when alpha < 1.
KhasminskiiReport khasminskii_check(const FieldFn& f, const SimConfig& cfg,
                                    const std::vector<std::vector<double>>& probes);

/// E[exp(k int_0^T |f(s, x + W_s)|^2 ds)] for each k and E[rho_T^a] for
/// a in {-1, 1/2, 2}, each checked for stability between N/2 and N paths.
std::vector<EstimateReport> exp_moment_check(const DriftField& f, const std::vector<double>& ks, const SimConfig& cfg,
                                             std::span<const double> x);

}  // namespace roughdrift

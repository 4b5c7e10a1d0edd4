#include "roughdrift/girsanov.hpp"

#include "roughdrift/error.hpp"
#include "roughdrift/parallel.hpp"
#include "roughdrift/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace roughdrift {

std::vector<NamedFunctional> standard_functionals() {
    return {
        {"positive_part_terminal", [](const PathView& v) { return std::max(0.0, v.state(v.steps)[0]); }},
        {"terminal", [](const PathView& v) { return v.state(v.steps)[0]; }},
        {"running_max",
         [](const PathView& v) {
             double m = v.state(0)[0];
             for (std::size_t s = 1; s <= v.steps; ++s) m = std::max(m, v.state(s)[0]);
             return m;
         }},
    };
}

namespace {

PathView view(const PathBatch& b, std::size_t p) { return {b.state(p, 0), b.steps, b.dim, b.h}; }

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

}  // namespace

GirsanovWeights girsanov_weights(const DriftField& b, std::shared_ptr<const Increments> inc, std::span<const double> x) {
    GirsanovWeights w;
    w.brownian = simulate(DriftField::zero(b.dim()), inc, x);
    const auto& B = w.brownian;
    const std::size_t d = static_cast<std::size_t>(B.dim);
    w.log_rho.assign(B.paths, 0.0);
    w.energy.assign(B.paths, 0.0);
    if (b.identically_zero()) return w;
    parallel_for(B.paths, [&](std::size_t p) {
        std::array<double, kMaxDim> bv{};
        double stoch = 0.0, energy = 0.0;
        for (std::size_t s = 0; s < B.steps; ++s) {
            b.evaluate(B.h * static_cast<double>(s), std::span<const double>(B.state(p, s), d),
                       std::span<double>(bv.data(), d));
            for (std::size_t a = 0; a < d; ++a) {
                if (!std::isfinite(bv[a])) {
                    throw SingularityError("girsanov_weights: drift '" + b.name() + "' is not finite at path " +
                                               std::to_string(p) + ", step " + std::to_string(s),
                                           static_cast<long>(p), static_cast<long>(s));
                }
                stoch += bv[a] * inc->at(p, s, static_cast<int>(a));
                energy += bv[a] * bv[a] * B.h;
            }
        }
        w.log_rho[p] = stoch - 0.5 * energy;
        w.energy[p] = energy;
    });
    return w;
}

GirsanovWeights girsanov_weights(const DriftField& b, const SimConfig& cfg, std::span<const double> x) {
    return girsanov_weights(b, make_increments(b.dim(), cfg), x);
}

double effective_sample_size(std::span<const double> log_weights) {
    if (log_weights.empty()) return 0.0;
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    double s1 = 0.0, s2 = 0.0;
    for (double l : log_weights) {
        const double w = std::exp(l - top);
        s1 += w;
        s2 += w * w;
    }
    return s1 * s1 / s2;
}

EstimateReport girsanov_expectation(const PathFunctional& phi, const GirsanovWeights& w) {
    const auto& B = w.brownian;
    std::vector<double> v(B.paths);
    for (std::size_t p = 0; p < B.paths; ++p) v[p] = phi(view(B, p)) * std::exp(w.log_rho[p]);
    const auto ms = mean_se(v);
    EstimateReport rep;
    rep.quantity = "girsanov_weighted";
    rep.estimate = ms.mean;
    rep.se = ms.se;
    rep.samples = B.paths;
    rep.inequality = "E[Phi(x+W) rho_T]";
    rep.report_only = true;
    const double ess = effective_sample_size(w.log_rho);
    rep.bound = ess;
    if (ess < 0.01 * static_cast<double>(B.paths)) {
        rep.warnings.push_back("effective sample size " + std::to_string(ess) + " is below 1% of the paths");
    }
    return rep;
}

EstimateReport direct_expectation(const PathFunctional& phi, const PathBatch& batch) {
    std::vector<double> v(batch.paths);
    for (std::size_t p = 0; p < batch.paths; ++p) v[p] = phi(view(batch, p));
    const auto ms = mean_se(v);
    EstimateReport rep;
    rep.quantity = "direct";
    rep.estimate = ms.mean;
    rep.se = ms.se;
    rep.samples = batch.paths;
    rep.inequality = "E[Phi(X)]";
    rep.report_only = true;
    return rep;
}

EstimateReport martingale_check(const GirsanovWeights& w) {
    std::vector<double> rho(w.log_rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::exp(w.log_rho[i]);
    const auto ms = mean_se(rho);
    EstimateReport rep;
    rep.quantity = "mean_rho";
    rep.estimate = ms.mean;
    rep.se = ms.se;
    rep.samples = rho.size();
    rep.inequality = "|mean rho - 1| <= 3 se";
    rep.bound = 1.0;
    rep.pass = std::abs(ms.mean - 1.0) <= 3.0 * ms.se || (ms.se == 0.0 && ms.mean == 1.0);
    return rep;
}

std::vector<TwoEstimatorRow> two_estimator_check(const DriftField& b, const SimConfig& cfg, std::span<const double> x,
                                                 const std::vector<NamedFunctional>& functionals) {
    auto inc = make_increments(b.dim(), cfg);
    const auto direct = simulate(b, inc, x);
    const auto w = girsanov_weights(b, inc, x);
    std::vector<TwoEstimatorRow> rows;
    for (const auto& f : functionals) {
        TwoEstimatorRow r;
        r.functional = f.name;
        r.direct = direct_expectation(f.fn, direct);
        r.weighted = girsanov_expectation(f.fn, w);
        const double se = std::sqrt(r.direct.se * r.direct.se + r.weighted.se * r.weighted.se);
        r.pass = std::abs(r.direct.estimate - r.weighted.estimate) <= 3.0 * se;
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Quadrature

double gaussian_expectation(const FieldFn& f, double t, std::span<const double> x, double v, const GaussSettings& gs) {
    const int d = f.dim();
    require(f.components() == 1, "gaussian_expectation: field must be scalar");
    require(static_cast<int>(x.size()) == d, "gaussian_expectation: point has the wrong dimension");
    require(v >= 0.0, "gaussian_expectation: variance must be >= 0");
    if (v == 0.0) return f.scalar(t, x);
    static constexpr std::array<std::size_t, 3> kPanels{256, 48, 16};
    const std::size_t panels = gs.panels ? gs.panels : kPanels[static_cast<std::size_t>(d - 1)];
    const auto rule = composite_gauss(-8.0, 8.0, panels, gs.points);
    const std::size_t m = rule.nodes.size();
    std::vector<double> dens(m);
    double mass = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        dens[i] = rule.weights[i] * std::exp(-0.5 * rule.nodes[i] * rule.nodes[i]);
        mass += dens[i];
    }
    for (double& w : dens) w /= mass;
    const double sv = std::sqrt(v);
    std::array<double, kMaxDim> y{};
    std::array<std::size_t, kMaxDim> idx{};
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= m;
    double acc = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        double w = 1.0;
        for (int a = d - 1; a >= 0; --a) {
            idx[a] = rest % m;
            rest /= m;
            y[a] = x[a] + sv * rule.nodes[idx[a]];
            w *= dens[idx[a]];
        }
        acc += w * f.scalar(t, std::span<const double>(y.data(), static_cast<std::size_t>(d)));
    }
    return acc;
}

double additive_functional(const FieldFn& f, double s, double t, std::span<const double> x, std::size_t time_panels,
                           const GaussSettings& gs) {
    require(t >= s, "additive_functional: need s <= t");
    if (t == s) return 0.0;
    const double len = t - s;
    const auto rule = composite_gauss(0.0, 1.0, time_panels, 4);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double u = rule.nodes[i];
        const double v = len * u * u;
        acc += rule.weights[i] * 2.0 * len * u * gaussian_expectation(f, s + v, x, v, gs);
    }
    return acc;
}

double kernel_beta(double p_prime, double q_prime, int dim) {
    return 0.5 * (2.0 - 2.0 / q_prime - static_cast<double>(dim) / p_prime);
}

KernelBound kernel_bound_estimate(const FieldFn& f, double p_prime, double q_prime,
                                  const std::vector<std::pair<double, double>>& pairs,
                                  const std::vector<std::vector<double>>& probes, const SpaceTimeBox& norm_box) {
    require(std::isfinite(p_prime) && std::isfinite(q_prime) && p_prime > 1.0 && q_prime > 1.0,
            "kernel_bound_estimate: exponents must lie in (1, inf)");
    const int d = f.dim();
    require(static_cast<double>(d) / p_prime + 2.0 / q_prime < 2.0,
            "kernel_bound_estimate: d/p' + 2/q' < 2 is violated");
    require(pairs.size() >= 2, "kernel_bound_estimate: need at least two (s, t) pairs");
    require(!probes.empty(), "kernel_bound_estimate: need at least one probe point");

    KernelBound kb;
    kb.p_prime = p_prime;
    kb.q_prime = q_prime;
    kb.beta = kernel_beta(p_prime, q_prime, d);
    kb.horizons = pairs;

    double tmax = 0.0;
    for (const auto& [s, t] : pairs) {
        require(t > s && s >= 0.0, "kernel_bound_estimate: pairs need 0 <= s < t");
        tmax = std::max(tmax, t);
    }
    std::vector<double> table(pairs.size() * probes.size());
    parallel_for(table.size(), [&](std::size_t k) {
        const auto& [s, t] = pairs[k / probes.size()];
        table[k] = additive_functional(f, s, t, probes[k % probes.size()]);
    });
    std::size_t widest = 0;
    std::vector<double> len;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        double sup = 0.0;
        for (std::size_t j = 0; j < probes.size(); ++j) sup = std::max(sup, table[i * probes.size() + j]);
        kb.values.push_back(sup);
        len.push_back(pairs[i].second - pairs[i].first);
        if (len.back() > len[widest]) widest = i;
    }
    double run = 0.0;
    for (std::size_t j = 0; j < probes.size(); ++j) {
        run = std::max(run, table[widest * probes.size() + j]);
        kb.running_sup.push_back(run);
    }
    kb.f_norm = lqp_norm(f, {p_prime, q_prime}, norm_box.with_horizon(tmax)).value;
    if (std::all_of(kb.values.begin(), kb.values.end(), [](double v) { return v > 0.0; })) {
        const auto fit = fit_power(len, kb.values);
        kb.fitted_exponent = fit.order;
        kb.constant = kb.f_norm > 0.0 ? fit.prefactor / kb.f_norm : 0.0;
        kb.pass = kb.fitted_exponent >= kb.beta - 0.1;
    } else {
        // f vanishes on every probe: the bound holds with any exponent.
        kb.fitted_exponent = std::numeric_limits<double>::infinity();
        kb.pass = true;
    }
    return kb;
}

KhasminskiiReport khasminskii_check(const FieldFn& f, const SimConfig& cfg, const std::vector<std::vector<double>>& probes) {
    require(f.components() == 1, "khasminskii_check: field must be scalar");
    require(!probes.empty(), "khasminskii_check: need at least one probe");
    const int d = f.dim();
    KhasminskiiReport rep;
    rep.alpha_per_probe.resize(probes.size());
    for (std::size_t j = 0; j < probes.size(); ++j) {
        rep.alpha_per_probe[j] = additive_functional(f, 0.0, cfg.horizon, probes[j]);
    }
    rep.alpha = *std::max_element(rep.alpha_per_probe.begin(), rep.alpha_per_probe.end());

    auto inc = make_increments(d, cfg);
    const std::size_t du = static_cast<std::size_t>(d);
    MeanSe best{-1.0, 0.0};
    for (const auto& x : probes) {
        require(x.size() == du, "khasminskii_check: probe has the wrong dimension");
        std::vector<double> v(cfg.paths);
        parallel_for(cfg.paths, [&](std::size_t p) {
            std::array<double, kMaxDim> y{};
            std::copy(x.begin(), x.end(), y.begin());
            double acc = 0.0;
            for (std::size_t s = 0; s < cfg.steps; ++s) {
                const double val = f.scalar(inc->h * static_cast<double>(s), std::span<const double>(y.data(), du));
                require(val >= 0.0, "khasminskii_check: field must be nonnegative");
                acc += val * inc->h;
                for (std::size_t a = 0; a < du; ++a) y[a] += inc->at(p, s, static_cast<int>(a));
            }
            v[p] = std::exp(acc);
        });
        const auto ms = mean_se(v);
        if (ms.mean > best.mean) best = ms;
    }
    auto& mc = rep.mc;
    mc.quantity = "sup_x E exp(int f)";
    mc.estimate = best.mean;
    mc.se = best.se;
    mc.samples = cfg.paths;
    mc.inequality = "estimate <= 1/(1 - alpha) + 3 se";
    if (rep.alpha < 1.0) {
        mc.bound = 1.0 / (1.0 - rep.alpha);
        mc.pass = mc.estimate <= mc.bound + 3.0 * mc.se;
    } else {
        mc.bound = std::numeric_limits<double>::infinity();
        mc.report_only = true;
        mc.pass = true;
        mc.warnings.push_back("alpha >= 1: the bound does not apply");
    }
    return rep;
}

std::vector<EstimateReport> exp_moment_check(const DriftField& f, const std::vector<double>& ks, const SimConfig& cfg,
                                             std::span<const double> x) {
    const auto w = girsanov_weights(f, cfg, x);
    const std::size_t n = w.log_rho.size();
    require(n >= 2, "exp_moment_check: need at least two paths");
    const std::size_t half = n / 2;
    std::vector<EstimateReport> out;
    auto check = [&](const std::string& name, const std::vector<double>& v) {
        const auto part = mean_se(std::span<const double>(v.data(), half));
        const auto all = mean_se(v);
        EstimateReport rep;
        rep.quantity = name;
        rep.estimate = all.mean;
        rep.se = all.se;
        rep.samples = n;
        rep.inequality = "|m(N) - m(N/2)| <= 3 se";
        rep.bound = 3.0 * std::sqrt(part.se * part.se + all.se * all.se);
        rep.pass = std::isfinite(all.mean) && std::abs(all.mean - part.mean) <= rep.bound;
        if (!rep.pass) rep.warnings.push_back("unstable under path doubling");
        out.push_back(std::move(rep));
    };
    for (double k : ks) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(k * w.energy[i]);
        check("E exp(" + num(k) + " int|f|^2)", v);
    }
    for (double a : {-1.0, 0.5, 2.0}) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(a * w.log_rho[i]);
        check("E rho^" + num(a), v);
    }
    return out;
}

}  // namespace roughdrift

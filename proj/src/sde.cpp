#include "roughdrift/sde.hpp"

#include "roughdrift/error.hpp"
#include "roughdrift/parallel.hpp"
#include "roughdrift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

namespace roughdrift {

std::size_t SimConfig::steps_for(double horizon, double h) {
    require(horizon > 0.0 && h > 0.0 && std::isfinite(horizon) && std::isfinite(h),
            "SimConfig: horizon and step must be positive");
    const double ratio = horizon / h;
    const double n = std::round(ratio);
    require(n >= 1.0, "SimConfig: step exceeds the horizon");
    const double ulp = std::nextafter(n, std::numeric_limits<double>::infinity()) - n;
    require(std::abs(ratio - n) <= ulp, "SimConfig: step does not divide the horizon");
    return static_cast<std::size_t>(n);
}

void SimConfig::validate() const {
    require(horizon > 0.0 && std::isfinite(horizon), "SimConfig.horizon: must be positive");
    require(steps >= 1, "SimConfig.steps: must be >= 1");
    require(paths >= 1, "SimConfig.paths: must be >= 1");
    for (double p : moment_orders) require(p >= 2.0, "SimConfig.moment_orders: every order must be >= 2");
    if (depth) require(*depth >= 0, "SimConfig.depth: must be >= 0");
}

std::uint64_t checksum(const std::vector<double>& values) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
    for (std::size_t i = 0; i < values.size() * sizeof(double); ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::shared_ptr<const Increments> make_increments(int dim, const SimConfig& cfg) {
    cfg.validate();
    require(dim >= 1 && dim <= kMaxDim, "make_increments: dimension must be 1, 2 or 3");
    auto inc = std::make_shared<Increments>();
    inc->dim = dim;
    inc->paths = cfg.paths;
    inc->steps = cfg.steps;
    inc->h = cfg.step();
    inc->seed = cfg.seed;
    const std::size_t d = static_cast<std::size_t>(dim);
    inc->dW.resize(cfg.paths * cfg.steps * d);
    const double sq = std::sqrt(inc->h);
    const NormalStream rng(cfg.seed, Stream::brownian);
    parallel_for(cfg.paths, [&](std::size_t p) {
        double* dst = inc->dW.data() + p * cfg.steps * d;
        for (std::size_t s = 0; s < cfg.steps; ++s) {
            for (std::size_t a = 0; a < d; a += 2) {
                const auto z = rng.pair(p, static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(a / 2));
                dst[s * d + a] = sq * z[0];
                if (a + 1 < d) dst[s * d + a + 1] = sq * z[1];
            }
        }
    });
    inc->checksum = checksum(inc->dW);
    return inc;
}

PathBatch simulate(const DriftField& b, std::shared_ptr<const Increments> inc, std::span<const double> x) {
    const int dim = b.dim();
    const std::size_t d = static_cast<std::size_t>(dim);
    require(inc && inc->dim == dim, "simulate: increments and drift dimensions differ");
    require(x.size() == d, "simulate: initial point has the wrong dimension");
    PathBatch batch;
    batch.dim = dim;
    batch.paths = inc->paths;
    batch.steps = inc->steps;
    batch.h = inc->h;
    batch.start.assign(x.begin(), x.end());
    batch.traj.resize(inc->paths * (inc->steps + 1) * d);
    batch.drift_energy.assign(inc->paths, 0.0);
    const double h = inc->h;
    const bool zero = b.identically_zero();

    parallel_for(inc->paths, [&](std::size_t p) {
        double* X = batch.traj.data() + p * (inc->steps + 1) * d;
        std::copy(x.begin(), x.end(), X);
        std::array<double, kMaxDim> bv{};
        double energy = 0.0;
        for (std::size_t s = 0; s < inc->steps; ++s) {
            const double* cur = X + s * d;
            double* nxt = X + (s + 1) * d;
            const double* dW = inc->dW.data() + (p * inc->steps + s) * d;
            if (zero) {
                for (std::size_t a = 0; a < d; ++a) nxt[a] = cur[a] + dW[a];
                continue;
            }
            b.evaluate(h * static_cast<double>(s), std::span<const double>(cur, d), std::span<double>(bv.data(), d));
            double b2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                if (!std::isfinite(bv[a])) {
                    throw SingularityError("simulate: drift '" + b.name() + "' is not finite at path " +
                                               std::to_string(p) + ", step " + std::to_string(s) +
                                               "; set a cap or mollification",
                                           static_cast<long>(p), static_cast<long>(s));
                }
                b2 += bv[a] * bv[a];
                nxt[a] = cur[a] + bv[a] * h + dW[a];
            }
            energy += b2 * h;
        }
        batch.drift_energy[p] = energy;
    });
    batch.increments = std::move(inc);
    return batch;
}

PathBatch simulate(const DriftField& b, const SimConfig& cfg, std::span<const double> x) {
    return simulate(b, make_increments(b.dim(), cfg), x);
}

std::pair<PathBatch, PathBatch> simulate_coupled(const DriftField& b, const SimConfig& cfg,
                                                 std::span<const double> x1, std::span<const double> x2) {
    auto inc = make_increments(b.dim(), cfg);
    auto b1 = simulate(b, inc, x1);
    auto b2 = simulate(b, inc, x2);
    if (b1.increments.get() != b2.increments.get() || checksum(b2.increments->dW) != inc->checksum) {
        fail(ErrorKind::mismatch, "simulate_coupled: batches do not share their increments");
    }
    const std::size_t d = static_cast<std::size_t>(b.dim());
    b1.sup_distance.assign(b1.paths, 0.0);
    parallel_for(b1.paths, [&](std::size_t p) {
        double sup = 0.0;
        for (std::size_t s = 0; s <= b1.steps; ++s) {
            const double* u = b1.state(p, s);
            const double* v = b2.state(p, s);
            double r = 0.0;
            for (std::size_t a = 0; a < d; ++a) r += (u[a] - v[a]) * (u[a] - v[a]);
            sup = std::max(sup, std::sqrt(r));
        }
        b1.sup_distance[p] = sup;
    });
    b2.sup_distance = b1.sup_distance;
    return {std::move(b1), std::move(b2)};
}

MeanSe mean_se(std::span<const double> v) {
    MeanSe r;
    if (v.empty()) return r;
    const double n = static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / n;
    if (v.size() > 1) {
        double q = 0.0;
        for (double x : v) q += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(q / (n - 1.0) / n);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Transform

Transform transformed_process(const PathBatch& batch, const TransformedFields& f) {
    const std::size_t d = static_cast<std::size_t>(batch.dim);
    const auto& box = f.U.box();
    require(box.dim == batch.dim, "transformed_process: ladder and batch dimensions differ");
    if (std::abs(box.horizon - batch.horizon()) > 1e-12 * std::max(1.0, box.horizon)) {
        fail(ErrorKind::mismatch, "transformed_process: ladder horizon " + std::to_string(box.horizon) +
                                      " differs from the batch horizon " + std::to_string(batch.horizon()));
    }
    require(f.U.components() == d && f.grad.components() == d * d && f.drift.components() == d,
            "transformed_process: field layouts do not match the dimension");
    Transform tr;
    tr.dim = batch.dim;
    tr.paths = batch.paths;
    tr.steps = batch.steps;
    const std::size_t cells = batch.paths * (batch.steps + 1);
    tr.Y.resize(cells * d);
    tr.sigma.resize(cells * d * d);
    tr.drift.resize(cells * d);
    std::vector<double> sup(batch.paths, 0.0);
    parallel_for(batch.paths, [&](std::size_t p) {
        std::array<double, kMaxDim> u{};
        double best = 0.0;
        for (std::size_t s = 0; s <= batch.steps; ++s) {
            const std::size_t at = p * (batch.steps + 1) + s;
            const double t = batch.h * static_cast<double>(s);
            const std::size_t ti = box.time_index(t);
            const std::span<const double> x(batch.state(p, s), d);
            f.U.evaluate_slice(ti, x, std::span<double>(u.data(), d));
            for (std::size_t a = 0; a < d; ++a) tr.Y[at * d + a] = x[a] + u[a];
            std::span<double> sg(tr.sigma.data() + at * d * d, d * d);
            f.grad.evaluate_slice(ti, x, sg);
            f.drift.evaluate_slice(ti, x, std::span<double>(tr.drift.data() + at * d, d));
            double fro = 0.0;
            for (double v : sg) fro += v * v;
            best = std::max(best, std::sqrt(fro));
        }
        sup[p] = best;
    });
    tr.sigma_sup = sup.empty() ? 0.0 : *std::max_element(sup.begin(), sup.end());
    return tr;
}

Transform transformed_process(const PathBatch& batch, const ZvonkinLadder& ladder) {
    return transformed_process(batch, transformed_fields(ladder));
}

ComparabilityStats comparability(const PathBatch& b1, const Transform& t1, const PathBatch& b2, const Transform& t2) {
    require(b1.paths == b2.paths && b1.steps == b2.steps && t1.paths == b1.paths && t2.paths == b2.paths,
            "comparability: batches and transforms must have the same shape");
    const std::size_t d = static_cast<std::size_t>(b1.dim);
    struct Local {
        double lo = 1.0, hi = 1.0;
        std::size_t bad_ratio = 0, bad_sigma = 0, checked = 0;
    };
    std::vector<Local> loc(b1.paths);
    parallel_for(b1.paths, [&](std::size_t p) {
        Local L;
        for (std::size_t s = 0; s <= b1.steps; ++s) {
            for (const Transform* t : {&t1, &t2}) {
                double fro = 0.0;
                const double* sg = t->sig(p, s);
                for (std::size_t k = 0; k < d * d; ++k) fro += sg[k] * sg[k];
                if (std::sqrt(fro) > 0.5) ++L.bad_sigma;
            }
            double dx2 = 0.0, dy2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double dx = b1.state(p, s)[a] - b2.state(p, s)[a];
                const double dy = t1.y(p, s)[a] - t2.y(p, s)[a];
                dx2 += dx * dx;
                dy2 += dy * dy;
            }
            if (dx2 == 0.0) continue;
            const double r = std::sqrt(dy2 / dx2);
            ++L.checked;
            L.lo = std::min(L.lo, r);
            L.hi = std::max(L.hi, r);
            if (r < 0.5 || r > 1.5) ++L.bad_ratio;
        }
        loc[p] = L;
    });
    ComparabilityStats st;
    st.sigma_sup = std::max(t1.sigma_sup, t2.sigma_sup);
    for (const auto& L : loc) {
        st.ratio_min = std::min(st.ratio_min, L.lo);
        st.ratio_max = std::max(st.ratio_max, L.hi);
        st.ratio_violations += L.bad_ratio;
        st.sigma_violations += L.bad_sigma;
        st.checked += L.checked;
    }
    return st;
}

EstimateReport ito_residual(const PathBatch& batch, const Transform& tr) {
    require(tr.paths == batch.paths && tr.steps == batch.steps, "ito_residual: transform does not match the batch");
    const std::size_t d = static_cast<std::size_t>(batch.dim);
    const double h = batch.h;
    const auto& inc = *batch.increments;
    std::vector<double> sup(batch.paths, 0.0);
    parallel_for(batch.paths, [&](std::size_t p) {
        std::array<double, kMaxDim> acc{};
        double best = 0.0;
        for (std::size_t s = 0; s < batch.steps; ++s) {
            const double* bn = tr.bn(p, s);
            const double* sg = tr.sig(p, s);
            double r2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                double inc_c = bn[c] * h + inc.at(p, s, static_cast<int>(c));
                for (std::size_t j = 0; j < d; ++j) inc_c += sg[c * d + j] * inc.at(p, s, static_cast<int>(j));
                acc[c] += inc_c;
                const double r = tr.y(p, s + 1)[c] - tr.y(p, 0)[c] - acc[c];
                r2 += r * r;
            }
            best = std::max(best, std::sqrt(r2));
        }
        sup[p] = best;
    });
    const auto ms = mean_se(sup);
    EstimateReport rep;
    rep.quantity = "ito_residual";
    rep.estimate = ms.mean;
    rep.se = ms.se;
    rep.samples = batch.paths;
    rep.inequality = "E sup|r_t|";
    rep.report_only = true;
    return rep;
}

OrderFit fit_power(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "fit_power: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, "fit_power: values must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, std::exp((sy - slope * sx) / n)};
}

std::vector<double> a_process(const PathBatch& b1, const Transform& t1, const PathBatch& b2, const Transform& t2) {
    require(b1.paths == b2.paths && b1.steps == b2.steps && t1.paths == b1.paths && t2.paths == b2.paths,
            "a_process: batches and transforms must have the same shape");
    const std::size_t d = static_cast<std::size_t>(b1.dim);
    const double h = b1.h;
    std::vector<double> A(b1.paths, 0.0);
    parallel_for(b1.paths, [&](std::size_t p) {
        double acc = 0.0;
        for (std::size_t s = 0; s < b1.steps; ++s) {
            double dy2 = 0.0, y2 = 0.0, ds2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double dy = t1.y(p, s)[a] - t2.y(p, s)[a];
                dy2 += dy * dy;
                y2 += t1.y(p, s)[a] * t1.y(p, s)[a];
            }
            const double thresh = 1e-14 * std::max(1.0, std::sqrt(y2));
            if (std::sqrt(dy2) < thresh) continue;
            for (std::size_t k = 0; k < d * d; ++k) {
                const double ds = t1.sig(p, s)[k] - t2.sig(p, s)[k];
                ds2 += ds * ds;
            }
            acc += ds2 / dy2 * h;
        }
        A[p] = acc;
    });
    return A;
}

double ito_constant(double p) { return p * (p - 1.0) / 2.0; }

EstimateReport exp_a_estimate(std::span<const double> A, double k) {
    std::vector<double> e(A.size());
    for (std::size_t i = 0; i < A.size(); ++i) e[i] = std::exp(k * A[i]);
    const auto ms = mean_se(e);
    EstimateReport rep;
    rep.quantity = "E exp(k A_T)";
    rep.estimate = ms.mean;
    rep.se = ms.se;
    rep.samples = A.size();
    rep.inequality = "finite";
    rep.pass = std::isfinite(ms.mean);
    return rep;
}

// ---------------------------------------------------------------------------
// Moment estimates

HolderMomentReport holder_moment_estimate(const DriftField& b, const SimConfig& cfg,
                                          const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
                                          double p) {
    require(pairs.size() >= 3, "holder_moment_estimate: need at least three pairs");
    require(p >= 2.0, "holder_moment_estimate: order must be >= 2");
    HolderMomentReport rep;
    rep.p = p;
    for (const auto& [x1, x2] : pairs) {
        double sep2 = 0.0;
        for (std::size_t a = 0; a < x1.size(); ++a) sep2 += (x1[a] - x2[a]) * (x1[a] - x2[a]);
        const double sep = std::sqrt(sep2);
        require(sep > 0.0, "holder_moment_estimate: pairs must have distinct points");
        const auto [c1, c2] = simulate_coupled(b, cfg, x1, x2);
        std::vector<double> m(c1.paths);
        for (std::size_t i = 0; i < c1.paths; ++i) m[i] = std::pow(c1.sup_distance[i], p);
        const auto ms = mean_se(m);
        const double R = std::pow(ms.mean, 1.0 / p) / sep;
        // Delta method for M^{1/p}.
        const double se = ms.mean > 0.0 ? ms.se * std::pow(ms.mean, 1.0 / p - 1.0) / p / sep : 0.0;
        rep.rows.push_back({sep, R, se});
    }
    auto sorted = rep.rows;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.separation < b.separation; });
    const double small = std::max(sorted[0].ratio, sorted[1].ratio);
    const double large = std::max(sorted[sorted.size() - 1].ratio, sorted[sorted.size() - 2].ratio);
    auto& s = rep.summary;
    s.quantity = "holder_moment_ratio_p" + std::to_string(static_cast<int>(p));
    s.estimate = small;
    s.se = std::max(sorted[0].se, sorted[1].se);
    s.samples = cfg.paths;
    s.inequality = "max R(small) <= 2 max R(large)";
    s.bound = 2.0 * large;
    s.pass = small <= s.bound;
    return rep;
}

EstimateReport drift_difference(const PathBatch& b1, const Transform& t1, const PathBatch& b2, const Transform& t2,
                                double p) {
    require(b1.paths == b2.paths && b1.steps == b2.steps, "drift_difference: batches must have the same shape");
    const std::size_t d = static_cast<std::size_t>(b1.dim);
    std::vector<double> v(b1.paths, 0.0);
    parallel_for(b1.paths, [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t s = 0; s < b1.steps; ++s) {
            double dx2 = 0.0, db2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double dx = b1.state(i, s)[a] - b2.state(i, s)[a];
                const double db = t1.bn(i, s)[a] - t2.bn(i, s)[a];
                dx2 += dx * dx;
                db2 += db * db;
            }
            acc += std::pow(std::sqrt(dx2), p - 1.0) * std::sqrt(db2) * b1.h;
        }
        v[i] = acc;
    });
    const auto ms = mean_se(v);
    EstimateReport rep;
    rep.quantity = "drift_difference";
    rep.estimate = ms.mean;
    rep.se = ms.se;
    rep.samples = b1.paths;
    rep.inequality = "E int |dX|^{p-1} |db^(n)| ds";
    rep.report_only = true;
    return rep;
}

std::vector<EstimateReport> moment_stability(const PathBatch& batch, const std::vector<double>& orders) {
    require(batch.paths >= 2, "moment_stability: need at least two paths");
    const std::size_t d = static_cast<std::size_t>(batch.dim);
    const std::size_t half = batch.paths / 2;
    std::vector<EstimateReport> out;
    for (double p : orders) {
        std::vector<double> v(batch.paths);
        for (std::size_t i = 0; i < batch.paths; ++i) {
            const double* x = batch.state(i, batch.steps);
            double r2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) r2 += x[a] * x[a];
            v[i] = std::pow(std::sqrt(r2), p);
        }
        const auto part = mean_se(std::span<const double>(v.data(), half));
        const auto all = mean_se(v);
        EstimateReport rep;
        rep.quantity = "E|X_T|^" + std::to_string(static_cast<int>(p));
        rep.estimate = all.mean;
        rep.se = all.se;
        rep.samples = batch.paths;
        rep.inequality = "|m(N) - m(N/2)| < 3 se";
        rep.bound = 3.0 * std::sqrt(part.se * part.se + all.se * all.se);
        rep.pass = std::isfinite(all.mean) && std::abs(all.mean - part.mean) < rep.bound;
        out.push_back(rep);
    }
    return out;
}

double percentile(std::vector<double> v, double q) {
    require(!v.empty(), "percentile: empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double f = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - f) + v[hi] * f;
}

EstimateReport integrability_monitor(const DriftField& b, const PathBatch& batch) {
    const std::size_t d = static_cast<std::size_t>(batch.dim);
    const auto& inc = *batch.increments;
    std::vector<double> base(batch.paths, 0.0);
    parallel_for(batch.paths, [&](std::size_t p) {
        std::array<double, kMaxDim> x{}, bv{};
        std::copy(batch.start.begin(), batch.start.end(), x.begin());
        double acc = 0.0;
        for (std::size_t s = 0; s < batch.steps; ++s) {
            b.evaluate(batch.h * static_cast<double>(s), std::span<const double>(x.data(), d),
                       std::span<double>(bv.data(), d));
            double b2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) b2 += bv[a] * bv[a];
            acc += b2 * batch.h;
            for (std::size_t a = 0; a < d; ++a) x[a] += inc.at(p, s, static_cast<int>(a));
        }
        base[p] = acc;
    });
    const double threshold = 2.0 * percentile(base, 0.999);
    std::size_t above = 0;
    for (double e : batch.drift_energy) above += e > threshold ? 1 : 0;
    EstimateReport rep;
    rep.quantity = "drift_energy_exceedance";
    rep.estimate = static_cast<double>(above) / static_cast<double>(batch.paths);
    rep.se = std::sqrt(rep.estimate * (1.0 - rep.estimate) / static_cast<double>(batch.paths));
    rep.samples = batch.paths;
    rep.inequality = "share(int|b(X)|^2 > 2 q99.9(int|b(x+W)|^2)) < 0.01";
    rep.bound = 0.01;
    rep.pass = rep.estimate < rep.bound;
    return rep;
}

}  // namespace roughdrift

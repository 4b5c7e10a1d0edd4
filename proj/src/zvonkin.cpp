#include "roughdrift/zvonkin.hpp"

#include "roughdrift/error.hpp"
#include "roughdrift/parallel.hpp"
#include "roughdrift/rng.hpp"

#include <algorithm>
#include <cmath>

namespace roughdrift {

const char* to_string(LadderMode mode) { return mode == LadderMode::holder ? "holder" : "lqp"; }

LadderMode ladder_mode_from_string(const std::string& s) {
    if (s == "holder") return LadderMode::holder;
    if (s == "lqp") return LadderMode::lqp;
    fail(ErrorKind::config, "mode: expected 'holder' or 'lqp', got '" + s + "'");
}

GridField contract_gradient(const DriftField& b, const GridField& grad) {
    const auto& box = grad.box();
    const int d = box.dim;
    const std::size_t du = static_cast<std::size_t>(d);
    require(b.dim() == d, "contract_gradient: drift and grid dimensions differ");
    require(grad.components() % du == 0, "contract_gradient: gradient layout must be (component, direction)");
    const std::size_t m = grad.components() / du;
    const std::size_t n = box.spatial_size();
    GridField out(box, m);
    if (b.identically_zero()) return out;
    parallel_for(box.time_nodes, [&](std::size_t ti) {
        const double t = box.time(ti);
        std::array<double, kMaxDim> x{}, bv{};
        const auto g = grad.slice(ti);
        auto dst = out.slice(ti);
        for (std::size_t k = 0; k < n; ++k) {
            box.node_position(k, x);
            b.evaluate(t, std::span<const double>(x.data(), du), std::span<double>(bv.data(), du));
            for (std::size_t j = 0; j < du; ++j) {
                if (!std::isfinite(bv[j])) {
                    throw SingularityError("contract_gradient: drift '" + b.name() +
                                           "' is not finite on a grid node; set a cap or mollification");
                }
            }
            for (std::size_t c = 0; c < m; ++c) {
                double s = 0.0;
                for (std::size_t j = 0; j < du; ++j) s += bv[j] * g[(k * m + c) * du + j];
                dst[k * m + c] = s;
            }
        }
    });
    return out;
}

namespace {

GridField negated(GridField g) {
    g *= -1.0;
    return g;
}

HeatSolution zero_solution(const SpaceTimeBox& box, std::size_t m, const HeatOptions& opts) {
    HeatSolution s;
    const std::size_t d = static_cast<std::size_t>(box.dim);
    s.u = GridField(box, m);
    s.grad = GridField(box, m * d);
    if (opts.hessian) s.hessian = GridField(box, m * d * d);
    s.forcing_norm = {0.0, opts.exponents, box.time_nodes, box.spatial_size()};
    s.damping = opts.damping;
    return s;
}

}  // namespace

GridField apply_T(const DriftField& b, const Forcing& phi, const SpaceTimeBox& box, const HeatOptions& opts) {
    require(b.dim() == box.dim, "apply_T: drift and box dimensions differ");
    Forcing minus = phi.grid() ? Forcing(negated(*phi.grid())) : Forcing(phi.function()->scaled(-1.0));
    const auto U = solve_backward_heat(minus, box, opts);
    return contract_gradient(b, U.grad);
}

GridField ZvonkinLadder::scaled_residual() const {
    GridField f = residual;
    f *= std::ldexp(1.0, depth() + 1);
    return f;
}

ZvonkinLadder build_ladder(const DriftField& b, int depth, const SpaceTimeBox& box, LadderMode mode,
                           const LadderOptions& opts) {
    require(depth >= 0, "build_ladder: depth must be >= 0");
    require(b.dim() == box.dim, "build_ladder: drift and box dimensions differ");
    box.validate();
    ZvonkinLadder L{b, box, mode, 0.5, {}, {}, 0.0};
    if (mode == LadderMode::lqp) {
        b.require_admissible();
    } else {
        if (!b.holder_exponent() && !b.identically_zero()) {
            fail(ErrorKind::config, "build_ladder: holder mode needs a drift with a Hölder exponent");
        }
        L.alpha = b.holder_exponent().value_or(0.5);
    }

    HeatOptions heat = opts.heat;
    heat.hessian = true;
    heat.exponents = b.exponents();
    const std::size_t d = static_cast<std::size_t>(box.dim);

    auto phi_norm = [&](const GridField& phi) {
        if (mode == LadderMode::lqp) return lqp_norm(phi, b.exponents()).value;
        return holder_norm(phi.as_field(), L.alpha, box, opts.holder_probes, opts.holder_seed);
    };
    auto hess_norm = [&](const GridField& h) {
        if (mode == LadderMode::lqp) return lqp_norm(h, b.exponents()).value;
        return h.sup_norm();
    };

    GridField phi = GridField::sample(b.as_field(), box);
    for (int k = 0; k <= depth; ++k) {
        LadderLevel lvl;
        if (b.identically_zero()) {
            lvl.U = zero_solution(box, d, heat);
        } else if (k == 0) {
            lvl.U = solve_backward_heat(b.as_field().scaled(-1.0), box, heat);
        } else {
            lvl.U = solve_backward_heat(negated(phi), box, heat);
        }
        lvl.phi_norm = phi_norm(phi);
        lvl.grad_sup = lvl.U.grad.sup_norm();
        lvl.hess_norm = hess_norm(*lvl.U.hessian);
        GridField next = contract_gradient(b, lvl.U.grad);
        lvl.phi = std::move(phi);
        L.levels.push_back(std::move(lvl));
        phi = std::move(next);
    }
    L.residual_norm = phi_norm(phi);
    L.residual = std::move(phi);
    return L;
}

TransformedFields transformed_fields(const ZvonkinLadder& ladder) { return transformed_fields(ladder, ladder.depth()); }

TransformedFields transformed_fields(const ZvonkinLadder& ladder, int n) {
    require(n >= 0 && n <= ladder.depth(), "transformed_fields: level outside the ladder");
    TransformedFields tf{ladder.levels[0].U.u, ladder.levels[0].U.grad, {}};
    for (int k = 1; k <= n; ++k) {
        tf.U += ladder.levels[static_cast<std::size_t>(k)].U.u;
        tf.grad += ladder.levels[static_cast<std::size_t>(k)].U.grad;
    }
    tf.drift = n == ladder.depth() ? ladder.residual : ladder.levels[static_cast<std::size_t>(n + 1)].phi;
    return tf;
}

HorizonRow summarize(const ZvonkinLadder& L) {
    HorizonRow row;
    row.horizon = L.horizon();
    row.b_norm = L.levels.front().phi_norm;
    row.epsilon = row.b_norm > 0.0 ? 1.0 / (4.0 * row.b_norm) : 0.0;
    row.residual_norm = L.residual_norm;
    double C = 0.0, D = 0.0;
    const int n = L.depth();
    for (int k = 0; k <= n; ++k) {
        const auto& lvl = L.levels[static_cast<std::size_t>(k)];
        LevelRow r;
        r.k = k;
        r.phi_norm = lvl.phi_norm;
        r.grad_sup = lvl.grad_sup;
        r.hess_norm = lvl.hess_norm;
        const double next = k == n ? L.residual_norm : L.levels[static_cast<std::size_t>(k + 1)].phi_norm;
        r.ratio = lvl.phi_norm > 0.0 ? next / lvl.phi_norm : 0.0;
        r.eps_chain = row.b_norm * std::pow(0.25, k);
        C += lvl.grad_sup;
        D += lvl.hess_norm;
        row.C_partial.push_back(C);
        row.D_partial.push_back(D);
        row.fitted_prefactor = std::max(row.fitted_prefactor, lvl.phi_norm * std::ldexp(1.0, k));
        row.max_ratio = std::max(row.max_ratio, r.ratio);
        if (row.b_norm > 0.0) row.max_eps_ratio_excess = std::max(row.max_eps_ratio_excess, r.ratio - 0.25);
        row.levels.push_back(r);
    }
    row.C_n = C;
    row.D_n = D;
    row.contracting = C <= 0.5;
    return row;
}

ContractionReport contraction_report(const DriftField& b, int depth, const SpaceTimeBox& box, LadderMode mode,
                                     const std::vector<double>& horizons, const LadderOptions& opts) {
    require(depth >= 1, "contraction_report: depth must be >= 1");
    require(!horizons.empty(), "contraction_report: need at least one horizon");
    ContractionReport rep;
    rep.mode = mode;
    rep.depth = depth;
    for (double T : horizons) {
        const auto L = build_ladder(b, depth, box.with_horizon(T), mode, opts);
        rep.rows.push_back(summarize(L));
        if (rep.rows.back().contracting && (!rep.T0 || T > *rep.T0)) rep.T0 = T;
    }
    return rep;
}

std::pair<double, double> comparability_range(const GridField& U, std::size_t pairs, std::uint64_t seed) {
    const auto& box = U.box();
    const std::size_t d = static_cast<std::size_t>(box.dim);
    require(U.components() == d, "comparability_range: U must have one component per axis");
    const std::size_t n = box.spatial_size();
    const NormalStream rng(seed, Stream::probes);
    std::vector<double> lo(box.time_nodes, 1.0), hi(box.time_nodes, 1.0);
    parallel_for(box.time_nodes, [&](std::size_t ti) {
        std::array<double, kMaxDim> x{}, y{};
        for (std::size_t p = 0; p < pairs; ++p) {
            const auto i = static_cast<std::size_t>(rng.uniform(p, static_cast<std::uint32_t>(ti), 0) * static_cast<double>(n));
            const auto j = static_cast<std::size_t>(rng.uniform(p, static_cast<std::uint32_t>(ti), 1) * static_cast<double>(n));
            if (i == j) continue;
            box.node_position(i, x);
            box.node_position(j, y);
            double dx2 = 0.0, dy2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double dx = x[a] - y[a];
                const double dy = dx + U.at(ti, i, a) - U.at(ti, j, a);
                dx2 += dx * dx;
                dy2 += dy * dy;
            }
            const double r = std::sqrt(dy2 / dx2);
            lo[ti] = std::min(lo[ti], r);
            hi[ti] = std::max(hi[ti], r);
        }
    });
    return {*std::min_element(lo.begin(), lo.end()), *std::max_element(hi.begin(), hi.end())};
}

}  // namespace roughdrift

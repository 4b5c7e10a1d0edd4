#include "roughdrift/heat.hpp"

#include "roughdrift/error.hpp"
#include "roughdrift/parallel.hpp"
#include "roughdrift/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace roughdrift {

Forcing::Forcing(FieldFn f) : src_(std::move(f)) {}
Forcing::Forcing(GridField g) : src_(std::move(g)) {}

int Forcing::dim() const {
    return std::visit([](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, GridField>) {
            return s.box().dim;
        } else {
            return s.dim();
        }
    }, src_);
}

std::size_t Forcing::components() const {
    return std::visit([](const auto& s) { return s.components(); }, src_);
}

MixedNorm Forcing::norm(const SpaceTimeBox& box, Exponents e) const {
    if (const auto* g = grid()) return lqp_norm(*g, e);
    return lqp_norm(*function(), e, box);
}

// ---------------------------------------------------------------------------
// Kernels

namespace {

// Dense solve with partial pivoting; n <= 3.
std::array<double, 3> solve_small(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b, int n) {
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        }
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::array<double, 3> x{};
    for (int c = n - 1; c >= 0; --c) {
        double s = b[c];
        for (int k = c + 1; k < n; ++k) s -= a[c][k] * x[k];
        x[c] = s / a[c][c];
    }
    return x;
}

}  // namespace

Kernel1D heat_kernel_1d(double tau, double h, int order) {
    require(tau > 0.0 && std::isfinite(tau), "heat_kernel_1d: tau must be positive");
    require(h > 0.0, "heat_kernel_1d: spacing must be positive");
    require(order >= 0 && order <= 2, "heat_kernel_1d: order must be 0, 1 or 2");

    // Variance in cells. Below one cell the shape stays one cell wide and the
    // polynomial correction alone carries the moments.
    const double r = tau / (h * h);
    const double v = std::max(r, 1.0);
    const int K = std::max(3, static_cast<int>(std::ceil(6.0 * std::sqrt(v))) + 1);

    const bool odd = order == 1;
    const int n = odd ? 2 : 3;
    auto basis = [&](int col, int k) {
        const double kk = static_cast<double>(k);
        const double g = std::exp(-kk * kk / (2.0 * v));
        const double s = kk * kk / v;
        double out = odd ? kk * g : g;
        for (int i = 0; i < col; ++i) out *= s;
        return out;
    };
    // Row i tests the moment of degree 2i (even) or 2i+1 (odd), scaled by v^-i.
    std::array<std::array<double, 3>, 3> a{};
    for (int row = 0; row < n; ++row) {
        for (int col = 0; col < n; ++col) {
            double s = 0.0;
            for (int k = -K; k <= K; ++k) {
                const double kk = static_cast<double>(k);
                double mono = odd ? kk : 1.0;
                for (int i = 0; i < row; ++i) mono *= kk * kk / v;
                s += basis(col, k) * mono;
            }
            a[row][col] = s;
        }
    }
    std::array<double, 3> rhs{};
    double scale = 1.0;
    switch (order) {
        case 0: rhs = {1.0, r / v, 3.0 * r * r / (v * v)}; break;
        case 1: rhs = {-1.0, -3.0 * r / v, 0.0}; scale = 1.0 / h; break;
        default: rhs = {0.0, 2.0 / v, 12.0 * r / (v * v)}; scale = 1.0 / (h * h); break;
    }
    const auto c = solve_small(a, rhs, n);

    Kernel1D ker;
    ker.half_width = K;
    ker.w.resize(2 * static_cast<std::size_t>(K) + 1);
    for (int k = -K; k <= K; ++k) {
        double s = 0.0;
        for (int col = 0; col < n; ++col) s += c[col] * basis(col, k);
        ker.w[static_cast<std::size_t>(k + K)] = scale * s;
    }
    return ker;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

// out[x] = sum_k w_k in[x - k] along `axis`, for a buffer laid out as
// [node][component]. Values past either end are continued linearly.
void convolve_axis(const SpaceTimeBox& box, std::size_t comps, int axis, const Kernel1D& ker,
                   const double* in, double* out, std::vector<double>& line) {
    const std::size_t N = box.nodes[axis];
    const std::size_t s = box.stride(axis) * comps;
    const std::size_t block = N * s;
    const std::size_t total = box.spatial_size() * comps;
    const int K = ker.half_width;
    const std::size_t Ku = static_cast<std::size_t>(K);
    line.resize(N + 2 * Ku);
    const double* w = ker.w.data();

    for (std::size_t hi = 0; hi < total; hi += block) {
        for (std::size_t lo = 0; lo < s; ++lo) {
            const std::size_t base = hi + lo;
            for (std::size_t j = 0; j < N; ++j) line[Ku + j] = in[base + j * s];
            const double left = line[Ku + 1] - line[Ku];
            const double right = line[Ku + N - 1] - line[Ku + N - 2];
            for (std::size_t j = 1; j <= Ku; ++j) {
                line[Ku - j] = line[Ku] - static_cast<double>(j) * left;
                line[Ku + N - 1 + j] = line[Ku + N - 1] + static_cast<double>(j) * right;
            }
            for (std::size_t x = 0; x < N; ++x) {
                // in[x - k] for k = K..-K sits at line[Ku + x - k].
                const double* src = line.data() + x;  // line[x] pairs with k = K
                double acc = 0.0;
                for (std::size_t k = 0; k <= 2 * Ku; ++k) acc += w[2 * Ku - k] * src[k];
                out[base + x * s] = acc;
            }
        }
    }
}

struct Plan {
    int dim = 1;
    std::size_t comps = 1;
    std::size_t nodes = 0;
    int max_order = 1;
};

struct Accumulators {
    std::vector<double> u, grad, hess;
};

class Tree {
public:
    Tree(const SpaceTimeBox& box, const Plan& plan) : box_(box), plan_(plan) {
        const std::size_t sz = plan.nodes * plan.comps;
        for (auto& level : scratch_) {
            for (auto& b : level) b.resize(sz);
        }
    }

    // kernels[axis][order]
    void run(const double* src, const std::array<std::array<const Kernel1D*, 3>, kMaxDim>& kernels, double weight,
             Accumulators& acc) {
        kernels_ = &kernels;
        weight_ = weight;
        acc_ = &acc;
        descend(0, src, {0, 0, 0}, 0);
    }

private:
    void descend(int axis, const double* buf, std::array<int, kMaxDim> ord, int used) {
        if (axis == plan_.dim) {
            accumulate(buf, ord, used);
            return;
        }
        for (int o = 0; o <= plan_.max_order - used; ++o) {
            double* out = scratch_[static_cast<std::size_t>(axis)][static_cast<std::size_t>(o)].data();
            convolve_axis(box_, plan_.comps, axis, *(*kernels_)[axis][o], buf, out, line_);
            ord[axis] = o;
            descend(axis + 1, out, ord, used + o);
        }
    }

    void accumulate(const double* buf, const std::array<int, kMaxDim>& ord, int total) {
        const std::size_t m = plan_.comps;
        const std::size_t d = static_cast<std::size_t>(plan_.dim);
        const std::size_t n = plan_.nodes;
        const double wt = weight_;
        if (total == 0) {
            double* u = acc_->u.data();
            for (std::size_t e = 0; e < n * m; ++e) u[e] += wt * buf[e];
            return;
        }
        std::size_t j = d, k = d;
        for (std::size_t a = 0; a < d; ++a) {
            for (int r = 0; r < ord[a]; ++r) (j == d ? j : k) = a;
        }
        if (total == 1) {
            double* g = acc_->grad.data();
            for (std::size_t node = 0; node < n; ++node) {
                for (std::size_t c = 0; c < m; ++c) g[(node * m + c) * d + j] += wt * buf[node * m + c];
            }
            return;
        }
        double* hs = acc_->hess.data();
        for (std::size_t node = 0; node < n; ++node) {
            for (std::size_t c = 0; c < m; ++c) {
                const double v = wt * buf[node * m + c];
                const std::size_t b = (node * m + c) * d * d;
                hs[b + j * d + k] += v;
                if (j != k) hs[b + k * d + j] += v;
            }
        }
    }

    const SpaceTimeBox& box_;
    Plan plan_;
    std::array<std::array<std::vector<double>, 3>, kMaxDim> scratch_;
    std::vector<double> line_;
    const std::array<std::array<const Kernel1D*, 3>, kMaxDim>* kernels_ = nullptr;
    double weight_ = 0.0;
    Accumulators* acc_ = nullptr;
};

}  // namespace

HeatSolution solve_backward_heat(const Forcing& phi, const SpaceTimeBox& box, const HeatOptions& opts) {
    box.validate();
    require(phi.dim() == box.dim, "solve_backward_heat: forcing and box dimensions differ");
    require(std::isfinite(opts.damping) && opts.damping >= 0.0, "solve_backward_heat: damping must be >= 0");
    if (const auto* g = phi.grid(); g && !g->box().same_grid(box)) {
        fail(ErrorKind::mismatch, "solve_backward_heat: grid forcing lives on a different box");
    }
    const double hmin = box.min_spacing();
    if (std::sqrt(box.horizon) < hmin) {
        throw ResolutionError("solve_backward_heat: kernel scale sqrt(T) = " + std::to_string(std::sqrt(box.horizon)) +
                                  " is below the grid spacing " + std::to_string(hmin),
                              std::sqrt(box.horizon), hmin);
    }

    const int d = box.dim;
    const std::size_t m = phi.components();
    const std::size_t n = box.spatial_size();
    const std::size_t Nt = box.time_nodes;
    const std::size_t cells = Nt - 1;
    const double dt = box.dt();
    const double lambda = opts.damping;
    const auto rule = gauss_legendre_unit(opts.gauss_points);
    const std::size_t Q = rule.nodes.size();

    // Offsets within a cell: first cell uses tau = dt xi^2.
    std::vector<double> off_first(Q), w_first(Q), off_rest(Q), w_rest(Q);
    for (std::size_t q = 0; q < Q; ++q) {
        const double xi = rule.nodes[q];
        off_first[q] = dt * xi * xi;
        w_first[q] = 2.0 * dt * xi * rule.weights[q];
        off_rest[q] = dt * xi;
        w_rest[q] = dt * rule.weights[q];
    }

    const int max_order = opts.hessian ? 2 : 1;
    // kernels[cell][q][axis][order]
    std::vector<Kernel1D> kernel_store(cells * Q * static_cast<std::size_t>(d) * 3);
    auto kidx = [&](std::size_t c, std::size_t q, int a, int o) {
        return ((c * Q + q) * static_cast<std::size_t>(d) + static_cast<std::size_t>(a)) * 3 + static_cast<std::size_t>(o);
    };
    parallel_for(cells, [&](std::size_t c) {
        for (std::size_t q = 0; q < Q; ++q) {
            const double tau = c == 0 ? off_first[q] : static_cast<double>(c) * dt + off_rest[q];
            for (int a = 0; a < d; ++a) {
                for (int o = 0; o <= max_order; ++o) kernel_store[kidx(c, q, a, o)] = heat_kernel_1d(tau, box.spacing(a), o);
            }
        }
    });

    // Forcing values at t_j + offset for every cell j and node q.
    const std::size_t slab = n * m;
    std::vector<double> samples;
    if (const auto* f = phi.function()) {
        samples.resize(cells * 2 * Q * slab);
        parallel_for(cells, [&](std::size_t j) {
            std::array<double, kMaxDim> x{};
            for (std::size_t variant = 0; variant < 2; ++variant) {
                for (std::size_t q = 0; q < Q; ++q) {
                    const double t = box.time(j) + (variant == 0 ? off_first[q] : off_rest[q]);
                    double* dst = samples.data() + ((j * 2 + variant) * Q + q) * slab;
                    for (std::size_t k = 0; k < n; ++k) {
                        box.node_position(k, x);
                        (*f)(t, std::span<const double>(x.data(), static_cast<std::size_t>(d)),
                             std::span<double>(dst + k * m, m));
                    }
                }
            }
        });
    }
    auto source = [&](std::size_t j, bool first, std::size_t q) -> const double* {
        if (const auto* g = phi.grid()) return g->slice(j).data();
        return samples.data() + ((j * 2 + (first ? 0 : 1)) * Q + q) * slab;
    };

    HeatSolution sol;
    sol.damping = lambda;
    sol.u = GridField(box, m);
    sol.grad = GridField(box, m * static_cast<std::size_t>(d));
    if (opts.hessian) sol.hessian = GridField(box, m * static_cast<std::size_t>(d * d));

    const Plan plan{d, m, n, max_order};
    parallel_for(cells, [&](std::size_t i) {
        Accumulators acc;
        acc.u.assign(slab, 0.0);
        acc.grad.assign(slab * static_cast<std::size_t>(d), 0.0);
        if (opts.hessian) acc.hess.assign(slab * static_cast<std::size_t>(d * d), 0.0);
        Tree tree(box, plan);
        std::array<std::array<const Kernel1D*, 3>, kMaxDim> ks{};
        for (std::size_t c = 0; c + i < cells; ++c) {
            const std::size_t j = i + c;
            for (std::size_t q = 0; q < Q; ++q) {
                const double tau = c == 0 ? off_first[q] : static_cast<double>(c) * dt + off_rest[q];
                const double w = (c == 0 ? w_first[q] : w_rest[q]) * std::exp(-lambda * tau);
                for (int a = 0; a < d; ++a) {
                    for (int o = 0; o <= max_order; ++o) ks[a][o] = &kernel_store[kidx(c, q, a, o)];
                }
                tree.run(source(j, c == 0, q), ks, -w, acc);
            }
        }
        std::copy(acc.u.begin(), acc.u.end(), sol.u.slice(i).begin());
        std::copy(acc.grad.begin(), acc.grad.end(), sol.grad.slice(i).begin());
        if (opts.hessian) std::copy(acc.hess.begin(), acc.hess.end(), sol.hessian->slice(i).begin());
    });

    sol.forcing_norm = phi.norm(box, opts.exponents);
    return sol;
}

GridField gradient_field(const HeatSolution& sol) { return sol.grad; }

std::vector<RegularityConstants> measure_constants(const FieldFn& phi, const SpaceTimeBox& box,
                                                   std::vector<double> horizons, HeatOptions opts) {
    require(horizons.size() >= 2, "measure_constants: need at least two horizons");
    for (double T : horizons) require(T > 0.0 && std::isfinite(T), "measure_constants: horizons must be positive");
    std::sort(horizons.begin(), horizons.end());
    opts.hessian = true;
    std::vector<RegularityConstants> out;
    out.reserve(horizons.size());
    for (double T : horizons) {
        const auto sol = solve_backward_heat(phi, box.with_horizon(T), opts);
        RegularityConstants rc;
        rc.horizon = T;
        rc.forcing_norm = sol.forcing_norm.value;
        rc.grad_sup = sol.grad.sup_norm();
        rc.hess_norm = lqp_norm(*sol.hessian, opts.exponents).value;
        rc.zero_norm = rc.forcing_norm == 0.0;
        if (!rc.zero_norm) {
            rc.gradient = rc.grad_sup / rc.forcing_norm;
            rc.hessian = rc.hess_norm / rc.forcing_norm;
        }
        out.push_back(rc);
    }
    return out;
}

}  // namespace roughdrift

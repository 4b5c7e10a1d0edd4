#include "roughdrift/field.hpp"

#include "roughdrift/error.hpp"
#include "roughdrift/parallel.hpp"
#include "roughdrift/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace roughdrift {

ProdiSerrin prodi_serrin_check(double p, double q, int dim) {
    require(dim >= 1, "prodi_serrin_check: dimension must be >= 1");
    require(std::isfinite(p) && std::isfinite(q), "prodi_serrin_check: exponents must be finite");
    require(p > 1.0 && q > 1.0, "prodi_serrin_check: exponents must lie in (1, inf)");
    const double margin = 1.0 - static_cast<double>(dim) / p - 2.0 / q;
    return {margin > 0.0, margin};
}

// ---------------------------------------------------------------------------
// FieldFn

FieldFn::FieldFn(int dim, std::size_t components, Evaluator eval)
    : dim_(dim), components_(components), eval_(std::make_shared<const Evaluator>(std::move(eval))) {
    require(dim >= 1 && dim <= kMaxDim, "FieldFn: dimension must be 1, 2 or 3");
    require(components >= 1, "FieldFn: at least one component");
}

FieldFn FieldFn::zero(int dim, std::size_t components) {
    return FieldFn(dim, components, [](double, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    });
}

FieldFn FieldFn::constant(int dim, std::vector<double> value) {
    const std::size_t m = value.size();
    return FieldFn(dim, m, [v = std::move(value)](double, std::span<const double>, std::span<double> out) {
        std::copy(v.begin(), v.end(), out.begin());
    });
}

FieldFn FieldFn::squared_magnitude(const FieldFn& f) {
    return FieldFn(f.dim(), 1, [f](double t, std::span<const double> x, std::span<double> out) {
        std::array<double, kMaxDim * kMaxDim> buf{};
        std::vector<double> heap;
        std::span<double> v;
        if (f.components() <= buf.size()) {
            v = std::span<double>(buf.data(), f.components());
        } else {
            heap.resize(f.components());
            v = heap;
        }
        f(t, x, v);
        double s = 0.0;
        for (double c : v) s += c * c;
        out[0] = s;
    });
}

double FieldFn::scalar(double t, std::span<const double> x) const {
    require(components_ == 1, "FieldFn::scalar on a vector field");
    double v = 0.0;
    (*this)(t, x, std::span<double>(&v, 1));
    return v;
}

FieldFn FieldFn::scaled(double factor) const {
    FieldFn self = *this;
    return FieldFn(dim_, components_, [self, factor](double t, std::span<const double> x, std::span<double> out) {
        self(t, x, out);
        for (double& v : out) v *= factor;
    });
}

// ---------------------------------------------------------------------------
// DriftField

DriftField::DriftField(std::string name, int dim, Evaluator core, Exponents declared,
                       SingularityPolicy policy, std::optional<double> support_radius,
                       std::optional<double> holder_exponent, bool identically_zero)
    : name_(std::move(name)),
      dim_(dim),
      core_(std::make_shared<const Evaluator>(std::move(core))),
      declared_(declared),
      policy_(policy),
      support_radius_(support_radius),
      holder_exponent_(holder_exponent),
      zero_(identically_zero) {
    require(dim >= 1 && dim <= kMaxDim, "DriftField: dimension must be 1, 2 or 3");
    if (policy_.cap) require(*policy_.cap > 0.0, "DriftField: cap must be positive");
    if (policy_.mollification) require(*policy_.mollification > 0.0, "DriftField: mollification must be positive");
    if (support_radius_) require(*support_radius_ > 0.0, "DriftField: support radius must be positive");
    if (holder_exponent_) {
        require(*holder_exponent_ > 0.0 && *holder_exponent_ < 1.0, "DriftField: Hölder exponent must lie in (0, 1)");
    }
}

DriftField DriftField::zero(int dim) {
    return DriftField("zero", dim,
                      [](double, std::span<const double>, std::span<double> out) {
                          std::fill(out.begin(), out.end(), 0.0);
                      },
                      Exponents{}, {}, 1.0, 0.5, true);
}

ProdiSerrin DriftField::prodi_serrin() const {
    return prodi_serrin_check(declared_.p, declared_.q, dim_);
}

void DriftField::require_admissible() const {
    const auto ps = prodi_serrin();
    require(ps.admissible, "drift '" + name_ + "': declared exponents fail d/p + 2/q < 1 (margin " +
                               std::to_string(ps.margin) + ")");
}

void DriftField::evaluate(double t, std::span<const double> x, std::span<double> out) const {
    if (support_radius_) {
        double r2 = 0.0;
        for (int a = 0; a < dim_; ++a) r2 += x[a] * x[a];
        if (r2 > *support_radius_ * *support_radius_) {
            std::fill(out.begin(), out.begin() + dim_, 0.0);
            return;
        }
    }
    (*core_)(t, x, out);
    if (!policy_.cap) return;

    const double cap = *policy_.cap;
    bool infinite = false;
    for (int a = 0; a < dim_; ++a) {
        if (std::isnan(out[a])) return;
        if (std::isinf(out[a])) infinite = true;
    }
    if (infinite) {
        for (int a = 0; a < dim_; ++a) out[a] = std::isinf(out[a]) ? std::copysign(1.0, out[a]) : 0.0;
    }
    double n2 = 0.0;
    for (int a = 0; a < dim_; ++a) n2 += out[a] * out[a];
    const double n = std::sqrt(n2);
    if (n > cap) {
        const double s = cap / n;
        for (int a = 0; a < dim_; ++a) out[a] *= s;
    }
}

FieldFn DriftField::as_field() const {
    DriftField self = *this;
    return FieldFn(dim_, static_cast<std::size_t>(dim_),
                   [self](double t, std::span<const double> x, std::span<double> out) {
                       self.evaluate(t, x, out);
                   });
}

// ---------------------------------------------------------------------------
// GridField

GridField::GridField(const SpaceTimeBox& box, std::size_t components, Interpolation interp)
    : box_(box), components_(components), interp_(interp) {
    box_.validate();
    require(components >= 1, "GridField: at least one component");
    values_.assign(box_.time_nodes * box_.spatial_size() * components_, 0.0);
}

GridField::GridField(const SpaceTimeBox& box, std::size_t components, std::vector<double> values,
                     Interpolation interp)
    : box_(box), components_(components), interp_(interp), values_(std::move(values)) {
    box_.validate();
    require(components >= 1, "GridField: at least one component");
    require(values_.size() == box_.time_nodes * box_.spatial_size() * components_,
            "GridField: value array does not match (time nodes) x (spatial nodes) x (components)");
}

GridField GridField::sample(const FieldFn& f, const SpaceTimeBox& box) {
    require(f.dim() == box.dim, "GridField::sample: field and box dimensions differ");
    GridField g(box, f.components());
    const std::size_t n = box.spatial_size();
    parallel_for(box.time_nodes, [&](std::size_t ti) {
        const double t = box.time(ti);
        std::array<double, kMaxDim> x{};
        auto s = g.slice(ti);
        for (std::size_t k = 0; k < n; ++k) {
            box.node_position(k, x);
            f(t, std::span<const double>(x.data(), box.dim), s.subspan(k * g.components_, g.components_));
        }
    });
    return g;
}

std::span<const double> GridField::slice(std::size_t ti) const {
    return std::span<const double>(values_).subspan(ti * slice_size(), slice_size());
}

std::span<double> GridField::slice(std::size_t ti) {
    return std::span<double>(values_).subspan(ti * slice_size(), slice_size());
}

void GridField::evaluate(double t, std::span<const double> x, std::span<double> out) const {
    evaluate_slice(box_.time_index(t), x, out);
}

void GridField::evaluate_slice(std::size_t ti, std::span<const double> x, std::span<double> out) const {
    const int d = box_.dim;
    const auto s = slice(ti);
    std::array<std::size_t, kMaxDim> cell{};
    std::array<double, kMaxDim> frac{};
    for (int a = 0; a < d; ++a) {
        const double h = box_.spacing(a);
        const double xa = std::clamp(x[a], box_.lower[a], box_.upper[a]);
        const double u = (xa - box_.lower[a]) / h;
        auto i = static_cast<std::size_t>(std::floor(u));
        if (i >= box_.nodes[a] - 1) i = box_.nodes[a] - 2;
        cell[a] = i;
        frac[a] = std::clamp(u - static_cast<double>(i), 0.0, 1.0);
    }

    if (interp_ == Interpolation::nearest) {
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            const std::size_t i = cell[a] + (frac[a] >= 0.5 ? 1 : 0);
            flat += i * box_.stride(a);
        }
        for (std::size_t c = 0; c < components_; ++c) out[c] = s[flat * components_ + c];
        return;
    }

    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(components_), 0.0);
    const unsigned corners = 1u << d;
    for (unsigned m = 0; m < corners; ++m) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            const bool up = (m >> a) & 1u;
            w *= up ? frac[a] : 1.0 - frac[a];
            flat += (cell[a] + (up ? 1 : 0)) * box_.stride(a);
        }
        if (w == 0.0) continue;
        for (std::size_t c = 0; c < components_; ++c) out[c] += w * s[flat * components_ + c];
    }
}

FieldFn GridField::as_field() const {
    auto self = std::make_shared<const GridField>(*this);
    return FieldFn(box_.dim, components_, [self](double t, std::span<const double> x, std::span<double> out) {
        self->evaluate(t, x, out);
    });
}

double GridField::sup_norm() const {
    double best = 0.0;
    const std::size_t points = values_.size() / components_;
    for (std::size_t k = 0; k < points; ++k) {
        double s = 0.0;
        for (std::size_t c = 0; c < components_; ++c) {
            const double v = values_[k * components_ + c];
            s += v * v;
        }
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

double GridField::max_abs() const {
    double best = 0.0;
    for (double v : values_) best = std::max(best, std::abs(v));
    return best;
}

GridField& GridField::operator+=(const GridField& other) {
    if (!box_.same_grid(other.box_) || components_ != other.components_) {
        fail(ErrorKind::mismatch, "GridField: cannot add fields on different grids");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

GridField& GridField::operator*=(double factor) {
    for (double& v : values_) v *= factor;
    return *this;
}

namespace {

static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) fail(ErrorKind::invalid_argument, "GridField: truncated binary stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void GridField::write(std::ostream& out) const {
    const int d = box_.dim;
    put_u64(out, static_cast<std::uint64_t>(d));
    for (int a = 0; a < d; ++a) put_u64(out, box_.nodes[a]);
    put_u64(out, box_.time_nodes);
    put_f64(out, 0.0);
    put_f64(out, box_.horizon);
    for (int a = 0; a < d; ++a) {
        put_f64(out, box_.lower[a]);
        put_f64(out, box_.upper[a]);
    }
    put_u64(out, components_);
    for (double v : values_) put_f64(out, v);
}

GridField GridField::read(std::istream& in) {
    SpaceTimeBox box;
    const std::uint64_t d = get_u64(in);
    if (d < 1 || d > kMaxDim) fail(ErrorKind::invalid_argument, "GridField: bad dimension in header");
    box.dim = static_cast<int>(d);
    for (int a = 0; a < box.dim; ++a) box.nodes[a] = get_u64(in);
    box.time_nodes = get_u64(in);
    const double t0 = get_f64(in);
    if (t0 != 0.0) fail(ErrorKind::invalid_argument, "GridField: time axis must start at 0");
    box.horizon = get_f64(in);
    for (int a = 0; a < box.dim; ++a) {
        box.lower[a] = get_f64(in);
        box.upper[a] = get_f64(in);
    }
    const std::uint64_t m = get_u64(in);
    box.validate();
    std::vector<double> values(box.time_nodes * box.spatial_size() * m);
    for (double& v : values) v = get_f64(in);
    return GridField(box, m, std::move(values));
}

void GridField::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::invalid_argument, "GridField: cannot open " + path);
    write(out);
}

GridField GridField::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::invalid_argument, "GridField: cannot open " + path);
    return read(in);
}

// ---------------------------------------------------------------------------
// Norms

namespace {

std::vector<double> trapezoid_weights(const SpaceTimeBox& box) {
    const std::size_t n = box.spatial_size();
    std::vector<double> w(n, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t rest = k;
        double wk = 1.0;
        for (int a = box.dim - 1; a >= 0; --a) {
            const std::size_t i = rest % box.nodes[a];
            rest /= box.nodes[a];
            const double h = box.spacing(a);
            wk *= (i == 0 || i + 1 == box.nodes[a]) ? 0.5 * h : h;
        }
        w[k] = wk;
    }
    return w;
}

void check_exponents(Exponents e) {
    require(std::isfinite(e.p) && std::isfinite(e.q) && e.p >= 1.0 && e.q >= 1.0,
            "lqp_norm: exponents must be finite and >= 1");
}

// (sum_i dt * (sum_k w_k m_ik^p)^{q/p})^{1/q}, with per-slice sums kept in
// slice order so the reduction does not depend on the worker count.
MixedNorm reduce_mixed(const std::function<double(std::size_t, std::size_t)>& magnitude, Exponents e,
                       const SpaceTimeBox& box, std::size_t slices) {
    check_exponents(e);
    const auto w = trapezoid_weights(box);
    const std::size_t n = w.size();
    std::vector<double> inner(slices, 0.0);
    parallel_for(slices, [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double m = magnitude(i, k);
            if (!std::isfinite(m)) {
                throw SingularityError("lqp_norm: non-finite field value on the quadrature grid; "
                                       "set a cap or mollification for singular fields");
            }
            if (m != 0.0) s += w[k] * std::pow(m, e.p);
        }
        if (!std::isfinite(s)) {
            throw SingularityError("lqp_norm: |f|^p overflows on the quadrature grid; "
                                   "the singularity is not integrable at this resolution");
        }
        inner[i] = s;
    });
    const double dt = box.dt();
    double total = 0.0;
    for (double s : inner) total += dt * std::pow(s, e.q / e.p);
    if (!std::isfinite(total)) throw SingularityError("lqp_norm: time integral overflows");
    return {std::pow(total, 1.0 / e.q), e, box.time_nodes, n};
}

}  // namespace

MixedNorm lqp_norm(const FieldFn& f, Exponents e, const SpaceTimeBox& box) {
    box.validate();
    require(f.dim() == box.dim, "lqp_norm: field and box dimensions differ");
    const std::size_t slices = box.time_nodes - 1;
    const std::size_t n = box.spatial_size();
    const std::size_t m = f.components();
    // Sample midpoint slices once, then reduce.
    std::vector<double> mags(slices * n);
    parallel_for(slices, [&](std::size_t i) {
        const double t = (static_cast<double>(i) + 0.5) * box.dt();
        std::array<double, kMaxDim> x{};
        std::vector<double> v(m);
        for (std::size_t k = 0; k < n; ++k) {
            box.node_position(k, x);
            f(t, std::span<const double>(x.data(), box.dim), v);
            double s = 0.0;
            for (double c : v) s += c * c;
            mags[i * n + k] = std::sqrt(s);
        }
    });
    return reduce_mixed([&](std::size_t i, std::size_t k) { return mags[i * n + k]; }, e, box, slices);
}

MixedNorm lqp_norm(const GridField& f, Exponents e) {
    const auto& box = f.box();
    const std::size_t m = f.components();
    const auto vals = f.values();
    const std::size_t n = box.spatial_size();
    return reduce_mixed(
        [&](std::size_t i, std::size_t k) {
            const double* p = vals.data() + (i * n + k) * m;
            double s = 0.0;
            for (std::size_t c = 0; c < m; ++c) s += p[c] * p[c];
            return std::sqrt(s);
        },
        e, box, box.time_nodes - 1);
}

MixedNorm lqp_norm(const std::function<double(std::size_t, std::size_t)>& magnitude, Exponents e,
                   const SpaceTimeBox& box) {
    box.validate();
    return reduce_mixed(magnitude, e, box, box.time_nodes - 1);
}

double holder_norm(const FieldFn& f, double alpha, const SpaceTimeBox& box, std::size_t probes,
                   std::uint64_t seed) {
    box.validate();
    require(alpha > 0.0 && alpha < 1.0, "holder_norm: exponent must lie in (0, 1)");
    require(f.dim() == box.dim, "holder_norm: field and box dimensions differ");
    const int d = box.dim;
    const std::size_t n = box.spatial_size();
    const std::size_t m = f.components();
    const NormalStream rng(seed, Stream::probes);

    double diameter2 = 0.0;
    for (int a = 0; a < d; ++a) diameter2 += std::pow(box.upper[a] - box.lower[a], 2);
    const double diameter = std::sqrt(diameter2);

    std::vector<double> per_slice(box.time_nodes, 0.0);
    parallel_for(box.time_nodes, [&](std::size_t ti) {
        const double t = box.time(ti);
        std::vector<double> vals(n * m);
        std::array<double, kMaxDim> x{};
        for (std::size_t k = 0; k < n; ++k) {
            box.node_position(k, x);
            f(t, std::span<const double>(x.data(), d), std::span<double>(vals).subspan(k * m, m));
        }
        auto dist = [m](const double* u, const double* v) {
            double s = 0.0;
            for (std::size_t c = 0; c < m; ++c) s += (u[c] - v[c]) * (u[c] - v[c]);
            return std::sqrt(s);
        };

        double sup = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double s = 0.0;
            for (std::size_t c = 0; c < m; ++c) s += vals[k * m + c] * vals[k * m + c];
            sup = std::max(sup, std::sqrt(s));
        }

        double semi = 0.0;
        for (int a = 0; a < d; ++a) {
            const std::size_t stride = box.stride(a);
            const std::size_t na = box.nodes[a];
            const double h = box.spacing(a);
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t ia = (k / stride) % na;
                for (std::size_t s = 1; ia + s < na; ++s) {
                    const double q = dist(&vals[k * m], &vals[(k + s * stride) * m]) /
                                     std::pow(static_cast<double>(s) * h, alpha);
                    semi = std::max(semi, q);
                }
            }
        }

        std::vector<double> fx(m), fy(m);
        std::array<double, kMaxDim> y{};
        for (std::size_t j = 0; j < probes; ++j) {
            std::uint32_t slot = 0;
            for (int a = 0; a < d; ++a) {
                x[a] = box.lower[a] + (box.upper[a] - box.lower[a]) * rng.uniform(j, static_cast<std::uint32_t>(ti), slot++);
            }
            const double scale = diameter * std::pow(10.0, -4.0 * rng.uniform(j, static_cast<std::uint32_t>(ti), slot++));
            double r2 = 0.0;
            std::array<double, kMaxDim> dir{};
            for (int a = 0; a < d; ++a) {
                dir[a] = rng.uniform(j, static_cast<std::uint32_t>(ti), slot++) - 0.5;
                r2 += dir[a] * dir[a];
            }
            const double r = std::sqrt(r2);
            if (r == 0.0) continue;
            double sep2 = 0.0;
            for (int a = 0; a < d; ++a) {
                y[a] = std::clamp(x[a] + scale * dir[a] / r, box.lower[a], box.upper[a]);
                sep2 += (y[a] - x[a]) * (y[a] - x[a]);
            }
            if (sep2 == 0.0) continue;
            f(t, std::span<const double>(x.data(), d), fx);
            f(t, std::span<const double>(y.data(), d), fy);
            double s = 0.0, nx = 0.0, ny = 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                s += (fx[c] - fy[c]) * (fx[c] - fy[c]);
                nx += fx[c] * fx[c];
                ny += fy[c] * fy[c];
            }
            sup = std::max(sup, std::sqrt(std::max(nx, ny)));
            semi = std::max(semi, std::sqrt(s) / std::pow(std::sqrt(sep2), alpha));
        }
        per_slice[ti] = sup + semi;
    });
    return *std::max_element(per_slice.begin(), per_slice.end());
}

}  // namespace roughdrift

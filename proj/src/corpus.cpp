#include "roughdrift/corpus.hpp"

#include "roughdrift/error.hpp"

#include <algorithm>
#include <cmath>

namespace roughdrift {

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"truncated_radial", "indicator_box", "gaussian_bump",
                                                "holder_kink", "zero"};
    return names;
}

namespace {

double norm2(std::span<const double> x, int d) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += x[a] * x[a];
    return s;
}

}  // namespace

double support_radius(const PresetParams& p) {
    if (p.preset == "indicator_box") return p.radius * std::sqrt(static_cast<double>(p.dim));
    return p.radius;
}

DriftField make_drift(const PresetParams& p) {
    if (p.dim < 1 || p.dim > kMaxDim) fail(ErrorKind::config, "drift.dim: must be 1, 2 or 3");
    if (!(p.radius > 0.0)) fail(ErrorKind::config, "drift.radius: must be positive");
    const int d = p.dim;
    const double A = p.amplitude;
    SingularityPolicy policy{p.cap, p.mollification};

    if (p.preset == "zero") return DriftField::zero(d);

    if (p.preset == "truncated_radial") {
        if (!p.cap && !p.mollification) {
            fail(ErrorKind::config, "drift: truncated_radial needs an explicit cap or mollification");
        }
        if (!(p.beta > 0.0)) fail(ErrorKind::config, "drift.beta: must be positive");
        const double beta = p.beta;
        const double delta = p.mollification.value_or(0.0);
        auto core = [d, A, beta, delta](double, std::span<const double> x, std::span<double> out) {
            const double r = std::sqrt(norm2(x, d) + delta * delta);
            if (r == 0.0) {
                std::fill(out.begin(), out.begin() + d, 0.0);
                return;
            }
            const double s = A / std::pow(r, beta + 1.0);
            for (int a = 0; a < d; ++a) out[a] = s * x[a];
        };
        return DriftField("truncated_radial", d, core, p.exponents, policy, p.radius);
    }

    if (p.preset == "indicator_box") {
        const double R = p.radius;
        auto core = [d, A, R](double, std::span<const double> x, std::span<double> out) {
            bool inside = true;
            for (int a = 0; a < d; ++a) inside = inside && std::abs(x[a]) <= R;
            std::fill(out.begin(), out.begin() + d, 0.0);
            out[0] = inside ? A : 0.0;
        };
        return DriftField("indicator_box", d, core, p.exponents, policy, support_radius(p));
    }

    if (p.preset == "gaussian_bump") {
        if (!(p.width > 0.0)) fail(ErrorKind::config, "drift.width: must be positive");
        const double w2 = p.width * p.width;
        auto core = [d, A, w2](double, std::span<const double> x, std::span<double> out) {
            std::fill(out.begin(), out.begin() + d, 0.0);
            out[0] = A * std::exp(-norm2(x, d) / (2.0 * w2));
        };
        // Smooth, so usable in both modes with any exponent in (0, 1).
        return DriftField("gaussian_bump", d, core, p.exponents, policy, p.radius, p.alpha);
    }

    if (p.preset == "holder_kink") {
        if (!(p.alpha > 0.0 && p.alpha < 1.0)) fail(ErrorKind::config, "drift.alpha: must lie in (0, 1)");
        const double R = p.radius;
        const double alpha = p.alpha;
        auto core = [d, A, R, alpha](double, std::span<const double> x, std::span<double> out) {
            std::fill(out.begin(), out.begin() + d, 0.0);
            const double r = std::sqrt(norm2(x, d));
            out[0] = r < R ? A * (1.0 - std::pow(r / R, alpha)) : 0.0;
        };
        return DriftField("holder_kink", d, core, p.exponents, policy, p.radius, p.alpha);
    }

    fail(ErrorKind::config, "drift.preset: unknown preset '" + p.preset + "'");
}

SpaceTimeBox box_for(const PresetParams& params, double horizon, std::size_t nodes_per_axis,
                     std::size_t time_nodes) {
    const double half = support_radius(params) + 6.0 * std::sqrt(horizon);
    return SpaceTimeBox::cube(params.dim, horizon, half, nodes_per_axis, time_nodes);
}

CorpusEntry corpus_entry(const PresetParams& params, const std::string& name) {
    CorpusEntry e;
    e.name = name;
    e.params = params;
    e.prodi_serrin = prodi_serrin_check(params.exponents.p, params.exponents.q, params.dim);
    e.holder_mode = params.preset == "holder_kink" || params.preset == "gaussian_bump" ||
                    params.preset == "zero";
    if (params.preset == "truncated_radial") {
        e.declared_membership_consistent = params.beta * params.exponents.p < static_cast<double>(params.dim);
    }
    return e;
}

std::vector<CorpusEntry> corpus_list() {
    std::vector<CorpusEntry> out;

    PresetParams radial;
    radial.preset = "truncated_radial";
    radial.beta = 0.3;
    radial.radius = 1.0;
    radial.cap = 10.0;
    radial.mollification = 0.01;
    out.push_back(corpus_entry(radial, "truncated_radial"));

    PresetParams box;
    box.preset = "indicator_box";
    box.radius = 0.5;
    out.push_back(corpus_entry(box, "indicator_box"));

    PresetParams bump;
    bump.preset = "gaussian_bump";
    bump.width = 0.25;
    bump.radius = 1.5;
    out.push_back(corpus_entry(bump, "gaussian_bump"));

    PresetParams kink;
    kink.preset = "holder_kink";
    kink.alpha = 0.5;
    kink.radius = 1.0;
    out.push_back(corpus_entry(kink, "holder_kink"));

    PresetParams zero;
    zero.preset = "zero";
    out.push_back(corpus_entry(zero, "zero"));

    return out;
}

}  // namespace roughdrift

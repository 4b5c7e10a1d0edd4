// One pass/fail line per acceptance criterion.

#include "roughdrift/corpus.hpp"
#include "roughdrift/harness.hpp"
#include "roughdrift/heat.hpp"
#include "roughdrift/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

using namespace roughdrift;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("error: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.pass && s < budget_s;
    failures += ok ? 0 : 1;
    std::printf("[%s] %2d %s | %s | %.1f s (budget %.0f s)\n", ok ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
                s, budget_s);
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Passes when every listed check passed; detail lists failing ones.
Outcome checks_pass(const SuiteResult& r, const std::vector<std::string>& ids) {
    Outcome o{true, ""};
    for (const auto& id : ids) {
        const auto* c = r.find(id);
        if (!c) {
            o.pass = false;
            o.detail += id + " missing; ";
            continue;
        }
        if (c->status != Status::pass) {
            o.pass = false;
            o.detail += id + "=" + to_string(c->status) + (c->error.empty() ? "" : " (" + c->error + ")") + "; ";
        }
    }
    return o;
}

Json drift_json(const PresetParams& p) {
    Json d{{"preset", p.preset}, {"dim", p.dim}, {"amplitude", p.amplitude}, {"beta", p.beta},
           {"radius", p.radius}, {"width", p.width}, {"alpha", p.alpha}, {"p", p.exponents.p},
           {"q", p.exponents.q}};
    d["cap"] = p.cap ? Json(*p.cap) : Json();
    d["mollification"] = p.mollification ? Json(*p.mollification) : Json();
    return d;
}

double bump_u(double s, double T, double t, double x) {
    using boost::math::quadrature::gauss_kronrod;
    if (T - t <= 0.0) return 0.0;
    return -gauss_kronrod<double, 61>::integrate(
        [&](double r) { return s / std::sqrt(s * s + r) * std::exp(-x * x / (2.0 * (s * s + r))); }, 0.0, T - t, 6,
        1e-12);
}

double bump_ux(double s, double T, double t, double x) {
    using boost::math::quadrature::gauss_kronrod;
    if (T - t <= 0.0) return 0.0;
    return gauss_kronrod<double, 61>::integrate(
        [&](double r) {
            const double v = s * s + r;
            return s / std::sqrt(v) * x / v * std::exp(-x * x / (2.0 * v));
        },
        0.0, T - t, 6, 1e-12);
}

std::map<std::string, SuiteResult> cache;

const SuiteResult& suite(const std::string& name) {
    auto it = cache.find(name);
    if (it == cache.end()) it = cache.emplace(name, run_suite(name, resolve_config(name, Json::object()))).first;
    return it->second;
}

}  // namespace

int main() {
    criterion(1, "heat solver vs quadrature oracle (bump, 256x128)", 10.0, [] {
        const double s = 0.25, T = 0.25;
        const auto box = SpaceTimeBox::cube(1, T, 8.0 * s + 6.0 * std::sqrt(T), 256, 128);
        const auto phi = FieldFn(1, 1, [s](double, std::span<const double> x, std::span<double> out) {
            out[0] = std::exp(-x[0] * x[0] / (2.0 * s * s));
        });
        const auto sol = solve_backward_heat(phi, box);
        double eu = 0, eg = 0, su = 0, sg = 0;
        for (std::size_t ti = 0; ti < box.time_nodes; ++ti) {
            for (std::size_t i = 0; i < box.nodes[0]; ++i) {
                const double t = box.time(ti), x = box.coord(0, i);
                const double u = bump_u(s, T, t, x), g = bump_ux(s, T, t, x);
                su = std::max(su, std::abs(u));
                sg = std::max(sg, std::abs(g));
                eu = std::max(eu, std::abs(sol.u.at(ti, i, 0) - u));
                eg = std::max(eg, std::abs(sol.grad.at(ti, i, 0) - g));
            }
        }
        const double ru = eu / su, rg = eg / sg;
        return Outcome{ru < 1e-4 && rg < 1e-4, "rel err u " + fmt("%.2e", ru) + ", grad " + fmt("%.2e", rg)};
    });

    criterion(2, "gradient constant decay and damping", 60.0, [] {
        const auto& r = suite("heat-constants");
        auto o = checks_pass(r, {"heat.small_C", "heat.damped"});
        if (const auto* c = r.find("heat.small_C")) o.detail += "C ratio " + fmt("%.3f", c->numbers.value("ratio", -1.0));
        if (const auto* c = r.find("heat.damped")) o.detail += ", damping ratio " + fmt("%.3f", c->numbers.value("max_ratio", -1.0));
        return o;
    });

    criterion(3, "Zvonkin contraction over the corpus", 300.0, [] {
        Outcome all{true, ""};
        for (const auto& e : corpus_list()) {
            const auto cfg = resolve_config("lemma1", Json{{"drift", drift_json(e.params)}});
            const auto r = run_suite("lemma1", cfg);
            auto o = checks_pass(r, {"lemma1.T0", "lemma1.C_n", "lemma1.ratios", "lemma1.D_stable"});
            const auto* t0 = r.find("lemma1.T0");
            all.detail += e.name + " T0=" + (t0 && t0->numbers["T0"].is_number() ? fmt("%g", t0->numbers["T0"].get<double>()) : "none");
            if (!o.pass) all.detail += " [" + o.detail + "]";
            all.detail += "; ";
            all.pass = all.pass && o.pass;
        }
        return all;
    });

    criterion(4, "transform comparability on coupled paths", 120.0, [] {
        const auto& r = suite("lemma2");
        auto o = checks_pass(r, {"lemma2.gradient_bound", "lemma2.grid_comparability", "lemma2.pathwise"});
        if (const auto* c = r.find("lemma2.pathwise"); c && c->status != Status::error) {
            o.detail += "paths " + c->numbers["paths"].dump() + ", sigma_sup " +
                        fmt("%.3f", c->numbers["sigma_sup"].get<double>()) + ", violations " +
                        c->numbers["sigma_violations"].dump() + "/" + c->numbers["ratio_violations"].dump();
        }
        return o;
    });

    criterion(5, "Ito reformulation residual order", 300.0, [] {
        const auto& r = suite("lemma2");
        auto o = checks_pass(r, {"lemma2.ito_order"});
        if (const auto* c = r.find("lemma2.ito_order")) o.detail += "order " + c->numbers.value("order", Json()).dump();
        return o;
    });

    criterion(6, "Hoelder moment ratio bounded (p = 2, 4)", 600.0, [] {
        const auto& r = suite("prop-estimate");
        auto o = checks_pass(r, {"prop.holder_p2", "prop.holder_p4"});
        for (const char* id : {"prop.holder_p2", "prop.holder_p4"}) {
            if (const auto* c = r.find(id); c && c->numbers.contains("ratio")) o.detail += std::string(id) + " " + c->numbers["ratio"].dump() + " ";
        }
        return o;
    });

    criterion(7, "drift-difference decay with depth", 600.0, [] {
        const auto& r = suite("lemma3");
        auto o = checks_pass(r, {"lemma3.decay"});
        if (const auto* c = r.find("lemma3.decay")) o.detail += "ratio " + c->numbers.value("ratio", Json()).dump();
        return o;
    });

    criterion(8, "exp(kA) uniform in depth", 600.0, [] {
        const auto& r = suite("lemma4");
        auto o = checks_pass(r, {"lemma4.uniform"});
        if (const auto* c = r.find("lemma4.uniform")) o.detail += "max z " + c->numbers.value("max_z", Json()).dump();
        return o;
    });

    criterion(9, "Girsanov two-estimator agreement and martingale", 300.0, [] {
        const auto& r = suite("appendix");
        std::vector<std::string> ids;
        for (const auto& e : corpus_list()) {
            ids.push_back("appendix.girsanov." + e.name);
            ids.push_back("appendix.martingale." + e.name);
        }
        auto o = checks_pass(r, ids);
        if (o.pass) o.detail = std::to_string(ids.size()) + " checks";
        return o;
    });

    criterion(10, "Khasminskii bound (alpha 0.5, 0.8)", 120.0, [] {
        const auto& r = suite("appendix");
        auto o = checks_pass(r, {"appendix.khasminskii.constant", "appendix.khasminskii.bump"});
        for (const char* id : {"appendix.khasminskii.constant", "appendix.khasminskii.bump"}) {
            if (const auto* c = r.find(id); c && c->numbers.contains("estimate")) {
                o.detail += fmt("%.4f", c->numbers["estimate"].get<double>()) + " <= " + c->numbers["bound"].dump() + "; ";
            }
        }
        return o;
    });

    criterion(11, "kernel estimate exponent", 60.0, [] {
        const auto& r = suite("appendix");
        auto o = checks_pass(r, {"appendix.kernel.indicator", "appendix.kernel.radial2d"});
        for (const char* id : {"appendix.kernel.indicator", "appendix.kernel.radial2d"}) {
            if (const auto* c = r.find(id); c && c->numbers.contains("beta")) {
                o.detail += fmt("%.3f", c->numbers["fitted_exponent"].get<double>()) + " vs beta " +
                            fmt("%.3f", c->numbers["beta"].get<double>()) + "; ";
            }
        }
        return o;
    });

    criterion(12, "byte-identical reports at 1 and 4 workers", 600.0, [] {
        Outcome o{true, ""};
        for (const std::string name : {"lemma2", "appendix"}) {
            const Json cfg = resolve_config(name, name == "lemma2"
                                                      ? Json{{"sde", {{"paths", 2000}, {"refine_paths", 1000}}}}
                                                      : Json{{"girsanov", {{"paths", 2000}}},
                                                             {"khasminskii", {{"paths", 2000}}}});
            set_worker_count(1);
            const auto a = report_jsonl(run_suite(name, cfg));
            set_worker_count(4);
            const auto b = report_jsonl(run_suite(name, cfg));
            set_worker_count(0);
            const bool same = a == b;
            o.pass = o.pass && same;
            o.detail += name + (same ? " identical (" + std::to_string(a.size()) + " bytes); " : " DIFFERS; ");
        }
        return o;
    });

    std::printf("%d of 12 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

#include "roughdrift/harness.hpp"

#include "roughdrift/error.hpp"
#include "roughdrift/girsanov.hpp"
#include "roughdrift/heat.hpp"
#include "roughdrift/sde.hpp"
#include "roughdrift/zvonkin.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace roughdrift {

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"lemma1", "lemma2", "lemma3", "lemma4",
                                                "prop-estimate", "heat-constants", "appendix"};
    return names;
}

// ---------------------------------------------------------------------------
// Config

namespace {

Json base_config() {
    return Json::parse(R"({
      "name": "default",
      "seed": 20240611,
      "drift": {"preset": "gaussian_bump", "dim": 1, "amplitude": 1.0, "beta": 0.3, "radius": 1.5,
                "cap": null, "mollification": null, "width": 0.25, "alpha": 0.5, "p": 7.0, "q": 15.0},
      "grid": {"nodes": 128, "time_nodes": 33, "half_width": null, "gauss_points": 3},
      "heat": {"horizons": [0.4, 0.2, 0.1, 0.05], "damping": [1.0, 4.0, 16.0, 64.0],
               "damping_horizon": 1.0, "lambda": 0.0},
      "ladder": {"mode": "auto", "depth": 8, "horizons": [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125],
                 "holder_probes": 256},
      "sde": {"horizon": null, "steps": 128, "paths": 10000, "x1": [0.2], "x2": [0.3], "depth": 4,
              "moment_orders": [2.0, 4.0], "stability_orders": [2.0, 4.0, 8.0],
              "separations": [0.2, 0.1, 0.05, 0.025], "center": [0.3],
              "refine_steps": [32, 64, 128], "refine_paths": 4000,
              "lemma3_depths": [0, 1, 2, 3, 4], "lemma4_depths": [1, 2, 4], "ito_p": 4.0},
      "girsanov": {"horizon": 1.0, "steps": 100, "paths": 20000, "x": [0.0], "k": [-1.0, 1.0, 2.0]},
      "khasminskii": {"horizon": 1.0, "steps": 200, "paths": 20000, "constant_alpha": 0.5,
                      "bump_alpha": 0.8, "bump_width": 0.3,
                      "probes": [[-0.5], [-0.25], [0.0], [0.25], [0.5]]},
      "kernel": {"pairs": [[0.0, 0.4], [0.0, 0.2], [0.0, 0.1], [0.0, 0.05]]}
    })");
}

Json suite_overrides(const std::string& suite) {
    if (suite == "heat-constants") {
        return Json::parse(R"({"drift": {"width": 0.5, "radius": 3.0}, "grid": {"nodes": 256, "time_nodes": 64}})");
    }
    if (suite == "lemma2") return Json::parse(R"({"grid": {"nodes": 256, "time_nodes": 129}})");
    if (suite == "lemma3" || suite == "lemma4") {
        return Json::parse(R"({"drift": {"preset": "truncated_radial", "beta": 0.1, "radius": 1.0,
                                         "cap": 10.0, "mollification": 0.01},
                               "grid": {"nodes": 256, "time_nodes": 65}})");
    }
    if (suite == "prop-estimate") {
        return Json::parse(R"({"drift": {"preset": "truncated_radial", "beta": 0.1, "radius": 1.0,
                                         "cap": 10.0, "mollification": 0.01},
                               "sde": {"horizon": 0.25, "steps": 200}})");
    }
    return Json::object();
}

const char* type_name(const Json& j) {
    if (j.is_number()) return "a number";
    if (j.is_string()) return "a string";
    if (j.is_boolean()) return "a boolean";
    if (j.is_array()) return "an array";
    if (j.is_object()) return "an object";
    return "null";
}

// Defaults define the schema: user keys must exist there, and values must
// have the default's type (null defaults accept numbers).
void overlay(Json& dst, const Json& src, const std::string& path) {
    if (!src.is_object()) fail(ErrorKind::config, path + ": expected an object");
    for (auto it = src.begin(); it != src.end(); ++it) {
        const std::string at = path + "." + it.key();
        if (!dst.contains(it.key())) fail(ErrorKind::config, at + ": unknown field");
        Json& d = dst[it.key()];
        const Json& v = it.value();
        if (d.is_object()) {
            overlay(d, v, at);
            continue;
        }
        const bool ok = (d.is_null() && (v.is_number() || v.is_null())) ||
                        (d.is_number() && v.is_number()) || (d.is_string() && v.is_string()) ||
                        (d.is_boolean() && v.is_boolean()) || (d.is_array() && v.is_array());
        if (!ok) fail(ErrorKind::config, at + ": expected " + std::string(type_name(d)) + ", got " + type_name(v));
        d = v;
    }
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

double num(const Json& cfg, const std::string& pointer) {
    const auto& v = cfg.at(Json::json_pointer(pointer));
    if (!v.is_number()) fail(ErrorKind::config, "config" + pointer + ": expected a number");
    return v.get<double>();
}

std::size_t count(const Json& cfg, const std::string& pointer) {
    const double v = num(cfg, pointer);
    if (!(v >= 1.0) || v != std::floor(v)) fail(ErrorKind::config, "config" + pointer + ": expected a positive integer");
    return static_cast<std::size_t>(v);
}

std::vector<double> numbers(const Json& cfg, const std::string& pointer) {
    const auto& v = cfg.at(Json::json_pointer(pointer));
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) fail(ErrorKind::config, "config" + pointer + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<std::vector<double>> points(const Json& cfg, const std::string& pointer) {
    std::vector<std::vector<double>> out;
    const auto& v = cfg.at(Json::json_pointer(pointer));
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(numbers(cfg, pointer + "/" + std::to_string(i)));
    return out;
}

}  // namespace

Json default_config(const std::string& suite) {
    Json cfg = base_config();
    if (!suite.empty()) {
        if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end()) {
            fail(ErrorKind::config, "suite: unknown suite '" + suite + "'");
        }
        overlay(cfg, suite_overrides(suite), "config");
    }
    return cfg;
}

Json resolve_config(const std::string& suite, const Json& user) {
    Json cfg = default_config(suite);
    if (!user.is_null()) overlay(cfg, user, "config");
    drift_params(cfg);  // validates the drift section
    return cfg;
}

Json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config, "cannot open config file '" + path + "'");
    try {
        return Json::parse(in, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        fail(ErrorKind::config, "config file '" + path + "': " + e.what());
    }
}

std::string canonical(const Json& cfg) { return cfg.dump(2) + "\n"; }

std::string fingerprint(const Json& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(cfg.dump())));
    return buf;
}

PresetParams drift_params(const Json& cfg) {
    const auto& d = cfg.at("drift");
    PresetParams p;
    p.preset = d.at("preset").get<std::string>();
    if (std::find(preset_names().begin(), preset_names().end(), p.preset) == preset_names().end()) {
        fail(ErrorKind::config, "config.drift.preset: unknown preset '" + p.preset + "'");
    }
    const double dim = num(cfg, "/drift/dim");
    if (dim != 1.0 && dim != 2.0 && dim != 3.0) fail(ErrorKind::config, "config.drift.dim: must be 1, 2 or 3");
    p.dim = static_cast<int>(dim);
    p.amplitude = num(cfg, "/drift/amplitude");
    p.beta = num(cfg, "/drift/beta");
    p.radius = num(cfg, "/drift/radius");
    if (!d.at("cap").is_null()) p.cap = d.at("cap").get<double>();
    if (!d.at("mollification").is_null()) p.mollification = d.at("mollification").get<double>();
    p.width = num(cfg, "/drift/width");
    p.alpha = num(cfg, "/drift/alpha");
    p.exponents = {num(cfg, "/drift/p"), num(cfg, "/drift/q")};
    return p;
}

// ---------------------------------------------------------------------------
// Results

const char* to_string(Status s) {
    switch (s) {
        case Status::pass: return "pass";
        case Status::fail: return "fail";
        case Status::report: return "report";
        case Status::error: return "error";
    }
    return "error";
}

bool SuiteResult::all_pass() const { return count(Status::fail) == 0 && count(Status::error) == 0; }

std::size_t SuiteResult::count(Status s) const {
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [s](const CheckResult& c) { return c.status == s; }));
}

const CheckResult* SuiteResult::find(const std::string& id) const {
    for (const auto& c : checks) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

int exit_code(const SuiteResult& r) {
    if (r.count(Status::error) > 0) return 1;
    if (r.count(Status::fail) > 0) return 2;
    return 0;
}

std::string report_jsonl(const SuiteResult& r) {
    std::string out;
    for (const auto& c : r.checks) {
        Json line{{"suite", r.suite}, {"check", c.id}, {"anchor", c.anchor}, {"status", to_string(c.status)},
                  {"numbers", c.numbers}, {"fingerprint", r.fingerprint}};
        if (!c.error.empty()) line["error"] = c.error;
        out += line.dump() + "\n";
    }
    Json summary{{"suite", r.suite},
                 {"fingerprint", r.fingerprint},
                 {"pass", r.count(Status::pass)},
                 {"fail", r.count(Status::fail)},
                 {"report", r.count(Status::report)},
                 {"error", r.count(Status::error)}};
    out += summary.dump() + "\n";
    return out;
}

std::string series_csv(const Series& s) {
    std::ostringstream os;
    for (std::size_t i = 0; i < s.columns.size(); ++i) os << (i ? "," : "") << s.columns[i];
    os << "\n";
    char buf[40];
    for (const auto& row : s.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            os << (i ? "," : "") << buf;
        }
        os << "\n";
    }
    return os.str();
}

void write_outputs(const SuiteResult& r, const Json& cfg, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "series");
    auto put = [](const fs::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        if (!out) fail(ErrorKind::config, "cannot write '" + p.string() + "'");
        out << text;
    };
    put(fs::path(dir) / "report.jsonl", report_jsonl(r));
    put(fs::path(dir) / "config.lock", canonical(cfg));
    for (const auto& [name, s] : r.series) put(fs::path(dir) / "series" / (name + ".csv"), series_csv(s));
}

Json corpus_json() {
    Json out = Json::array();
    for (const auto& e : corpus_list()) {
        const auto& p = e.params;
        Json params{{"dim", p.dim}, {"amplitude", p.amplitude}, {"radius", p.radius}};
        if (p.preset == "truncated_radial") params["beta"] = p.beta;
        if (p.preset == "gaussian_bump") params["width"] = p.width;
        if (p.preset == "holder_kink") params["alpha"] = p.alpha;
        params["cap"] = p.cap ? Json(*p.cap) : Json();
        params["mollification"] = p.mollification ? Json(*p.mollification) : Json();
        out.push_back({{"name", e.name},
                       {"preset", p.preset},
                       {"params", params},
                       {"p", p.exponents.p},
                       {"q", p.exponents.q},
                       {"prodi_serrin", e.prodi_serrin.admissible},
                       {"margin", e.prodi_serrin.margin},
                       {"holder_mode", e.holder_mode},
                       {"declared_membership_consistent", e.declared_membership_consistent}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Suites

namespace {

Json report_json(const EstimateReport& r) {
    Json j{{"quantity", r.quantity}, {"estimate", r.estimate}, {"se", r.se},
           {"samples", r.samples}, {"inequality", r.inequality}, {"pass", r.pass}};
    j["bound"] = std::isfinite(r.bound) ? Json(r.bound) : Json();
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    return j;
}

class Runner {
public:
    Runner(std::string suite, const Json& cfg) : cfg_(cfg) {
        res_.suite = std::move(suite);
        res_.fingerprint = fingerprint(cfg);
    }

    // body fills numbers and returns pass / fail / report.
    void check(const std::string& id, const std::string& anchor, const std::function<Status(Json&)>& body) {
        CheckResult c;
        c.id = id;
        c.anchor = anchor;
        try {
            c.status = body(c.numbers);
        } catch (const std::exception& e) {
            c.status = Status::error;
            c.error = e.what();
        }
        res_.checks.push_back(std::move(c));
    }

    Series& series(const std::string& name, std::vector<std::string> columns) {
        auto& s = res_.series[name];
        s.columns = std::move(columns);
        return s;
    }

    const Json& cfg() const { return cfg_; }
    SuiteResult take() { return std::move(res_); }

private:
    const Json& cfg_;
    SuiteResult res_;
};

Status verdict(bool ok) { return ok ? Status::pass : Status::fail; }

// (cap, mollification, h) of a simulation, recorded with every path-based check.
Json regularization(const Json& cfg, double h) {
    return {{"cap", cfg["drift"]["cap"]}, {"mollification", cfg["drift"]["mollification"]}, {"h", h}};
}

SpaceTimeBox grid_box(const Json& cfg, const PresetParams& p, double horizon, double widest) {
    const auto& hw = cfg.at("grid").at("half_width");
    const double half = hw.is_null() ? support_radius(p) + 6.0 * std::sqrt(widest) : hw.get<double>();
    return SpaceTimeBox::cube(p.dim, horizon, half, count(cfg, "/grid/nodes"), count(cfg, "/grid/time_nodes"));
}

LadderMode mode_for(const Json& cfg, const PresetParams& p) {
    const auto m = cfg.at("ladder").at("mode").get<std::string>();
    if (m == "auto") return corpus_entry(p, p.preset).holder_mode ? LadderMode::holder : LadderMode::lqp;
    return ladder_mode_from_string(m);
}

LadderOptions ladder_options(const Json& cfg) {
    LadderOptions o;
    o.heat.gauss_points = count(cfg, "/grid/gauss_points");
    o.holder_probes = count(cfg, "/ladder/holder_probes");
    o.holder_seed = cfg.at("seed").get<std::uint64_t>();
    return o;
}

SimConfig sim_config(const Json& cfg, double horizon, std::size_t steps, std::size_t paths) {
    SimConfig s;
    s.horizon = horizon;
    s.steps = steps;
    s.paths = paths;
    s.seed = cfg.at("seed").get<std::uint64_t>();
    s.moment_orders = numbers(cfg, "/sde/moment_orders");
    s.validate();
    return s;
}

// Largest ladder horizon with C_n <= 1/2, or the configured sde horizon.
struct Bracket {
    double horizon = 0.0;
    std::optional<ContractionReport> report;
};

Bracket bracket(const Json& cfg, const DriftField& b, const PresetParams& p, int depth) {
    Bracket br;
    const auto& h = cfg.at("sde").at("horizon");
    if (!h.is_null()) {
        br.horizon = h.get<double>();
        return br;
    }
    const auto horizons = numbers(cfg, "/ladder/horizons");
    const double widest = *std::max_element(horizons.begin(), horizons.end());
    br.report = contraction_report(b, std::max(depth, 1), grid_box(cfg, p, widest, widest), mode_for(cfg, p), horizons,
                                   ladder_options(cfg));
    if (!br.report->T0) fail(ErrorKind::invalid_argument, "no ladder horizon satisfies C_n <= 1/2");
    br.horizon = *br.report->T0;
    return br;
}

// ---- heat-constants

void suite_heat(Runner& R) {
    const auto& cfg = R.cfg();
    const auto p = drift_params(cfg);
    const auto b = make_drift(p);
    auto horizons = numbers(cfg, "/heat/horizons");
    const double widest = std::max(*std::max_element(horizons.begin(), horizons.end()), num(cfg, "/heat/damping_horizon"));
    const auto box = grid_box(cfg, p, widest, widest);
    HeatOptions opts;
    opts.gauss_points = count(cfg, "/grid/gauss_points");
    opts.exponents = p.exponents;

    std::vector<RegularityConstants> rc;
    R.check("heat.constants", "C(T) = sup|grad u| / ||phi||_{L^q_p}", [&](Json& n) {
        rc = measure_constants(b.as_field(), box, horizons, opts);
        auto& s = R.series("heat_constants", {"T", "grad_const", "hess_const", "grad_sup", "hess_norm", "forcing_norm"});
        for (const auto& r : rc) {
            s.rows.push_back({r.horizon, r.gradient, r.hessian, r.grad_sup, r.hess_norm, r.forcing_norm});
            n["rows"].push_back({{"T", r.horizon}, {"grad_const", r.gradient}, {"hess_const", r.hessian},
                                 {"forcing_norm", r.forcing_norm}, {"zero_norm", r.zero_norm}});
        }
        return Status::report;
    });

    R.check("heat.small_C", "C(T) decreasing, C(T_min) < 0.25 C(T_max)", [&](Json& n) {
        if (rc.empty()) fail(ErrorKind::invalid_argument, "constants unavailable");
        if (rc.front().zero_norm) {
            n["zero_norm"] = true;
            return Status::pass;
        }
        bool mono = true;
        for (std::size_t i = 1; i < rc.size(); ++i) mono = mono && rc[i - 1].gradient < rc[i].gradient;
        const double ratio = rc.front().gradient / rc.back().gradient;
        n["monotone"] = mono;
        n["ratio"] = ratio;
        n["bound"] = 0.25;
        return verdict(mono && ratio < 0.25);
    });

    R.check("heat.terminal", "u(T) = 0", [&](Json& n) {
        const auto sol = solve_backward_heat(b.as_field(), box.with_horizon(horizons.front()), opts);
        double m = 0.0;
        for (double v : sol.u.slice(box.time_nodes - 1)) m = std::max(m, std::abs(v));
        n["max_abs"] = m;
        return verdict(m == 0.0);
    });

    R.check("heat.damped", "sup|grad u_lambda| ratio <= 0.75 per 4x lambda", [&](Json& n) {
        const auto lambdas = numbers(cfg, "/heat/damping");
        const auto dbox = box.with_horizon(num(cfg, "/heat/damping_horizon"));
        auto& s = R.series("heat_damping", {"lambda", "grad_sup", "ratio"});
        double prev = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            HeatOptions o = opts;
            o.damping = lambdas[i];
            const double g = solve_backward_heat(b.as_field(), dbox, o).grad.sup_norm();
            const double r = i == 0 || prev == 0.0 ? 0.0 : g / prev;
            worst = std::max(worst, r);
            s.rows.push_back({lambdas[i], g, r});
            n["grad_sup"].push_back(g);
            prev = g;
        }
        n["max_ratio"] = worst;
        n["bound"] = 0.75;
        return verdict(worst <= 0.75);
    });
}

// ---- lemma1

void suite_lemma1(Runner& R) {
    const auto& cfg = R.cfg();
    const auto p = drift_params(cfg);
    const auto b = make_drift(p);
    const auto horizons = numbers(cfg, "/ladder/horizons");
    const double widest = *std::max_element(horizons.begin(), horizons.end());
    const int depth = static_cast<int>(count(cfg, "/ladder/depth"));
    const auto mode = mode_for(cfg, p);

    std::optional<ContractionReport> rep;
    const HorizonRow* at = nullptr;
    R.check("lemma1.T0", "exists T0: C_n(T0) <= 1/2", [&](Json& n) {
        rep = contraction_report(b, depth, grid_box(cfg, p, widest, widest), mode, horizons, ladder_options(cfg));
        auto& s = R.series("lemma1_contraction", {"T", "C_n", "D_n", "b_norm", "max_ratio", "contracting"});
        auto& lv = R.series("lemma1_levels", {"T", "k", "phi_norm", "grad_sup", "hess_norm", "ratio", "eps_chain"});
        for (const auto& r : rep->rows) {
            s.rows.push_back({r.horizon, r.C_n, r.D_n, r.b_norm, r.max_ratio, r.contracting ? 1.0 : 0.0});
            for (const auto& l : r.levels) {
                lv.rows.push_back({r.horizon, static_cast<double>(l.k), l.phi_norm, l.grad_sup, l.hess_norm, l.ratio,
                                   l.eps_chain});
            }
            if (rep->T0 && r.horizon == *rep->T0) at = &r;
        }
        n["mode"] = to_string(mode);
        n["depth"] = depth;
        n["T0"] = rep->T0 ? Json(*rep->T0) : Json();
        return verdict(rep->T0.has_value());
    });

    auto need = [&]() -> const HorizonRow& {
        if (!at) fail(ErrorKind::invalid_argument, "no bracketed horizon");
        return *at;
    };

    R.check("lemma1.C_n", "C_n(T0) <= 1/2", [&](Json& n) {
        const auto& r = need();
        n["C_n"] = r.C_n;
        n["T0"] = r.horizon;
        return verdict(r.C_n <= 0.5);
    });

    R.check("lemma1.ratios", "||T^{k+1} b|| / ||T^k b|| <= 1/2, k <= 3", [&](Json& n) {
        const auto& r = need();
        double worst = 0.0;
        for (const auto& l : r.levels) {
            if (l.k <= 3) worst = std::max(worst, l.ratio);
            n["ratios"].push_back(l.ratio);
        }
        n["max_ratio"] = worst;
        return verdict(worst <= 0.5);
    });

    R.check("lemma1.D_stable", "|D_8 - D_4| <= 0.1 D_4", [&](Json& n) {
        const auto& r = need();
        if (r.D_partial.size() < 9) fail(ErrorKind::config, "config.ladder.depth: must be >= 8 for this check");
        const double d4 = r.D_partial[4], d8 = r.D_partial[8];
        n["D_2"] = r.D_partial[2];
        n["D_4"] = d4;
        n["D_8"] = d8;
        const double rel = d4 > 0.0 ? std::abs(d8 - d4) / d4 : 0.0;
        n["relative_change"] = rel;
        return verdict(rel <= 0.1);
    });

    R.check("lemma1.C_monotone", "C_n(T) nonincreasing as T decreases", [&](Json& n) {
        if (!rep) fail(ErrorKind::invalid_argument, "report unavailable");
        auto rows = rep->rows;
        std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.horizon < b.horizon; });
        bool mono = true;
        for (std::size_t i = 1; i < rows.size(); ++i) mono = mono && rows[i - 1].C_n <= rows[i].C_n;
        for (const auto& r : rows) n["C_n"].push_back(r.C_n);
        return verdict(mono);
    });

    R.check("lemma1.eps_chain", "ratio_k vs eps ||b|| = 1/4", [&](Json& n) {
        const auto& r = need();
        n["epsilon"] = r.epsilon;
        n["b_norm"] = r.b_norm;
        n["max_ratio_minus_quarter"] = r.max_eps_ratio_excess;
        for (const auto& l : r.levels) n["eps_chain"].push_back(l.eps_chain);
        return Status::report;
    });

    R.check("lemma1.prefactor", "||T^k b|| <= C 2^-k", [&](Json& n) {
        const auto& r = need();
        n["fitted_prefactor"] = r.fitted_prefactor;
        return Status::report;
    });
}

// ---- lemma2

void suite_lemma2(Runner& R) {
    const auto& cfg = R.cfg();
    const auto p = drift_params(cfg);
    const auto b = make_drift(p);
    const int depth = static_cast<int>(num(cfg, "/sde/depth"));
    const auto horizons = numbers(cfg, "/ladder/horizons");
    const double widest = *std::max_element(horizons.begin(), horizons.end());

    double T = 0.0;
    std::optional<ZvonkinLadder> L;
    std::optional<TransformedFields> tf;
    R.check("lemma2.gradient_bound", "sup|grad U^(n)| <= C_n <= 1/2", [&](Json& n) {
        T = bracket(cfg, b, p, depth).horizon;
        L = build_ladder(b, depth, grid_box(cfg, p, T, widest), mode_for(cfg, p), ladder_options(cfg));
        tf = transformed_fields(*L);
        const auto row = summarize(*L);
        const double g = tf->grad.sup_norm();
        n["T"] = T;
        n["grad_sup"] = g;
        n["C_n"] = row.C_n;
        return verdict(g <= row.C_n * (1.0 + 1e-12) && row.C_n <= 0.5);
    });

    R.check("lemma2.grid_comparability", "|x-x'|/2 <= |Psi(x)-Psi(x')| <= 3|x-x'|/2", [&](Json& n) {
        if (!tf) fail(ErrorKind::invalid_argument, "ladder unavailable");
        const auto [lo, hi] = comparability_range(tf->U, 4096, cfg.at("seed").get<std::uint64_t>());
        n["min"] = lo;
        n["max"] = hi;
        return verdict(lo >= 0.5 && hi <= 1.5);
    });

    R.check("lemma2.pathwise", "|sigma| <= 1/2 and |dX|/2 <= |dY| <= 3|dX|/2 on coupled paths", [&](Json& n) {
        if (!tf) fail(ErrorKind::invalid_argument, "ladder unavailable");
        const auto sim = sim_config(cfg, T, count(cfg, "/sde/steps"), count(cfg, "/sde/paths"));
        const auto x1 = numbers(cfg, "/sde/x1"), x2 = numbers(cfg, "/sde/x2");
        const auto [c1, c2] = simulate_coupled(b, sim, x1, x2);
        const auto t1 = transformed_process(c1, *tf), t2 = transformed_process(c2, *tf);
        const auto st = comparability(c1, t1, c2, t2);
        n["paths"] = sim.paths;
        n["sigma_sup"] = st.sigma_sup;
        n["sigma_violations"] = st.sigma_violations;
        n["ratio_min"] = st.ratio_min;
        n["ratio_max"] = st.ratio_max;
        n["ratio_violations"] = st.ratio_violations;
        n["checked"] = st.checked;
        n["increments_checksum"] = c1.increments->checksum;
        n["regularization"] = regularization(cfg, sim.step());
        return verdict(st.sigma_violations == 0 && st.ratio_violations == 0);
    });

    R.check("lemma2.ito_order", "E sup|r_t| = O(h^a), a in [0.4, 1.1]", [&](Json& n) {
        if (!tf) fail(ErrorKind::invalid_argument, "ladder unavailable");
        const auto steps = numbers(cfg, "/sde/refine_steps");
        if (steps.size() < 3) fail(ErrorKind::config, "config.sde.refine_steps: need at least three levels");
        const auto x1 = numbers(cfg, "/sde/x1");
        std::vector<double> hs, rs;
        auto& s = R.series("lemma2_ito", {"h", "residual", "se"});
        for (double st : steps) {
            const auto sim = sim_config(cfg, T, static_cast<std::size_t>(st), count(cfg, "/sde/refine_paths"));
            const auto batch = simulate(b, sim, x1);
            const auto rep = ito_residual(batch, transformed_process(batch, *tf));
            hs.push_back(sim.step());
            rs.push_back(rep.estimate);
            s.rows.push_back({sim.step(), rep.estimate, rep.se});
            n["residual"].push_back(rep.estimate);
            n["se"].push_back(rep.se);
        }
        n["h"] = hs;
        if (std::all_of(rs.begin(), rs.end(), [](double r) { return r == 0.0; })) {
            n["order"] = Json();
            return Status::pass;
        }
        const auto fit = fit_power(hs, rs);
        n["order"] = fit.order;
        return verdict(fit.order >= 0.4 && fit.order <= 1.1);
    });
}

// ---- lemma3 / lemma4 share a coupled batch on the bracketed ladder

struct Coupled {
    double T = 0.0;
    std::optional<ZvonkinLadder> L;
    std::optional<std::pair<PathBatch, PathBatch>> batches;
};

Coupled coupled_setup(const Json& cfg, const DriftField& b, const PresetParams& p, int depth) {
    Coupled c;
    const auto horizons = numbers(cfg, "/ladder/horizons");
    const double widest = *std::max_element(horizons.begin(), horizons.end());
    c.T = bracket(cfg, b, p, depth).horizon;
    c.L = build_ladder(b, depth, grid_box(cfg, p, c.T, widest), mode_for(cfg, p), ladder_options(cfg));
    const auto sim = sim_config(cfg, c.T, count(cfg, "/sde/steps"), count(cfg, "/sde/paths"));
    c.batches = simulate_coupled(b, sim, numbers(cfg, "/sde/x1"), numbers(cfg, "/sde/x2"));
    return c;
}

void suite_lemma3(Runner& R) {
    const auto& cfg = R.cfg();
    const auto p = drift_params(cfg);
    const auto b = make_drift(p);
    const auto depths = numbers(cfg, "/sde/lemma3_depths");
    const int top = static_cast<int>(*std::max_element(depths.begin(), depths.end()));
    const double order = numbers(cfg, "/sde/moment_orders").front();
    R.check("lemma3.decay", "E int |dX|^{p-1} |b1^(n) - b2^(n)| ds: ratio per n <= 0.75", [&](Json& n) {
        auto c = coupled_setup(cfg, b, p, top);
        const auto& [c1, c2] = *c.batches;
        std::vector<double> ns, vals;
        auto& s = R.series("lemma3_decay", {"n", "value", "se"});
        for (double dn : depths) {
            const auto tf = transformed_fields(*c.L, static_cast<int>(dn));
            const auto rep = drift_difference(c1, transformed_process(c1, tf), c2, transformed_process(c2, tf), order);
            ns.push_back(dn);
            vals.push_back(rep.estimate);
            s.rows.push_back({dn, rep.estimate, rep.se});
            n["values"].push_back(rep.estimate);
            n["se"].push_back(rep.se);
        }
        n["T"] = c.T;
        n["p"] = order;
        n["regularization"] = regularization(cfg, c1.h);
        if (std::all_of(vals.begin(), vals.end(), [](double v) { return v == 0.0; })) {
            n["ratio"] = 0.0;
            return Status::pass;
        }
        // log F_n = a + n log r
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const double y = std::log(vals[i]);
            sx += ns[i];
            sy += y;
            sxx += ns[i] * ns[i];
            sxy += ns[i] * y;
        }
        const double m = static_cast<double>(ns.size());
        const double ratio = std::exp((m * sxy - sx * sy) / (m * sxx - sx * sx));
        n["ratio"] = ratio;
        n["bound"] = 0.75;
        return verdict(ratio <= 0.75);
    });
}

void suite_lemma4(Runner& R) {
    const auto& cfg = R.cfg();
    const auto p = drift_params(cfg);
    const auto b = make_drift(p);
    const auto depths = numbers(cfg, "/sde/lemma4_depths");
    const int top = static_cast<int>(*std::max_element(depths.begin(), depths.end()));
    const double cp = ito_constant(num(cfg, "/sde/ito_p"));
    R.check("lemma4.uniform", "E exp(k A_T^(n)) equal across n within 3 combined se", [&](Json& n) {
        auto c = coupled_setup(cfg, b, p, top);
        const auto& [c1, c2] = *c.batches;
        auto& s = R.series("lemma4_exp_a", {"n", "k", "estimate", "se"});
        bool ok = true;
        double worst = 0.0;
        for (double k : {1.0, cp}) {
            std::vector<EstimateReport> reps;
            for (double dn : depths) {
                const auto tf = transformed_fields(*c.L, static_cast<int>(dn));
                const auto A = a_process(c1, transformed_process(c1, tf), c2, transformed_process(c2, tf));
                reps.push_back(exp_a_estimate(A, k));
                s.rows.push_back({dn, k, reps.back().estimate, reps.back().se});
            }
            Json block{{"k", k}};
            for (const auto& r : reps) {
                block["estimate"].push_back(r.estimate);
                block["se"].push_back(r.se);
            }
            for (std::size_t i = 0; i < reps.size(); ++i) {
                for (std::size_t j = i + 1; j < reps.size(); ++j) {
                    const double se = std::sqrt(reps[i].se * reps[i].se + reps[j].se * reps[j].se);
                    const double z = se > 0.0 ? std::abs(reps[i].estimate - reps[j].estimate) / se
                                              : (reps[i].estimate == reps[j].estimate ? 0.0 : INFINITY);
                    worst = std::max(worst, z);
                    ok = ok && z <= 3.0;
                }
            }
            n["blocks"].push_back(block);
        }
        n["T"] = c.T;
        n["ito_constant"] = cp;
        n["regularization"] = regularization(cfg, c1.h);
        n["max_z"] = worst;
        return verdict(ok);
    });
}

// ---- prop-estimate

void suite_prop(Runner& R) {
    const auto& cfg = R.cfg();
    const auto p = drift_params(cfg);
    const auto b = make_drift(p);
    const auto& hz = cfg.at("sde").at("horizon");
    const double T = hz.is_null() ? 1.0 : hz.get<double>();
    const auto sim = sim_config(cfg, T, count(cfg, "/sde/steps"), count(cfg, "/sde/paths"));
    const auto center = numbers(cfg, "/sde/center");
    if (static_cast<int>(center.size()) != p.dim) fail(ErrorKind::config, "config.sde.center: wrong dimension");

    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
    for (double s : numbers(cfg, "/sde/separations")) {
        auto a = center, c = center;
        a[0] -= 0.5 * s;
        c[0] += 0.5 * s;
        pairs.emplace_back(a, c);
    }
    auto& series = R.series("prop_holder", {"p", "separation", "ratio", "se"});
    for (double order : numbers(cfg, "/sde/moment_orders")) {
        char id[48];
        std::snprintf(id, sizeof id, "prop.holder_p%g", order);
        R.check(id, "max R(small) <= 2 max R(large), R = E[sup|dX|^p]^{1/p}/|dx|", [&](Json& n) {
            const auto rep = holder_moment_estimate(b, sim, pairs, order);
            for (const auto& r : rep.rows) {
                series.rows.push_back({order, r.separation, r.ratio, r.se});
                n["separation"].push_back(r.separation);
                n["ratio"].push_back(r.ratio);
                n["se"].push_back(r.se);
            }
            n["summary"] = report_json(rep.summary);
            n["T"] = T;
            n["regularization"] = regularization(cfg, sim.step());
            return verdict(rep.summary.pass);
        });
    }

    std::optional<PathBatch> batch;
    R.check("prop.moment_stability", "E|X_T|^p stable from N/2 to N paths", [&](Json& n) {
        batch = simulate(b, sim, center);
        bool ok = true;
        for (const auto& r : moment_stability(*batch, numbers(cfg, "/sde/stability_orders"))) {
            n["reports"].push_back(report_json(r));
            ok = ok && r.pass;
        }
        return verdict(ok);
    });

    R.check("prop.integrability", "P(int |b(X)|^2 > 2 q99.9 baseline) < 1%", [&](Json& n) {
        if (!batch) fail(ErrorKind::invalid_argument, "batch unavailable");
        const auto rep = integrability_monitor(b, *batch);
        n = report_json(rep);
        n["regularization"] = regularization(cfg, sim.step());
        return verdict(rep.pass);
    });
}

// ---- appendix

FieldFn bump_scalar(int dim, double amplitude, double width) {
    return FieldFn(dim, 1, [dim, amplitude, width](double, std::span<const double> x, std::span<double> out) {
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
        out[0] = amplitude * std::exp(-r2 / (2.0 * width * width));
    });
}

void suite_appendix(Runner& R) {
    const auto& cfg = R.cfg();
    const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

    R.check("appendix.halved_exponents", "d/p + 2/q < 1 implies d/(p/2) + 2/(q/2) < 2", [&](Json& n) {
        bool ok = true;
        for (const auto& e : corpus_list()) {
            if (!e.prodi_serrin.admissible) continue;
            const double lhs = e.params.dim / (e.params.exponents.p / 2.0) + 2.0 / (e.params.exponents.q / 2.0);
            n[e.name] = lhs;
            ok = ok && lhs < 2.0;
        }
        return verdict(ok);
    });

    SimConfig gs;
    gs.horizon = num(cfg, "/girsanov/horizon");
    gs.steps = count(cfg, "/girsanov/steps");
    gs.paths = count(cfg, "/girsanov/paths");
    gs.seed = seed;
    const auto gx = numbers(cfg, "/girsanov/x");
    auto& gser = R.series("appendix_girsanov", {"drift", "functional", "direct", "direct_se", "weighted", "weighted_se"});
    const auto corpus = corpus_list();
    for (std::size_t ci = 0; ci < corpus.size(); ++ci) {
        const auto& e = corpus[ci];
        R.check("appendix.girsanov." + e.name, "E Phi(X) = E Phi(x+W) rho_T for 3 functionals", [&, ci](Json& n) {
            const auto b = make_drift(e.params);
            std::vector<double> x(static_cast<std::size_t>(e.params.dim), 0.0);
            std::copy(gx.begin(), gx.begin() + std::min(gx.size(), x.size()), x.begin());
            bool ok = true;
            const auto rows = two_estimator_check(b, gs, x, standard_functionals());
            for (std::size_t fi = 0; fi < rows.size(); ++fi) {
                const auto& r = rows[fi];
                auto weighted = report_json(r.weighted);
                weighted.erase("bound");
                n[r.functional] = {{"direct", report_json(r.direct)},
                                   {"weighted", weighted},
                                   {"ess", r.weighted.bound},
                                   {"bound", 3.0 * std::hypot(r.direct.se, r.weighted.se)},
                                   {"pass", r.pass}};
                gser.rows.push_back({static_cast<double>(ci), static_cast<double>(fi), r.direct.estimate, r.direct.se,
                                     r.weighted.estimate, r.weighted.se});
                ok = ok && r.pass;
            }
            return verdict(ok);
        });
        R.check("appendix.martingale." + e.name, "E rho_T = 1", [&](Json& n) {
            const auto b = make_drift(e.params);
            std::vector<double> x(static_cast<std::size_t>(e.params.dim), 0.0);
            std::copy(gx.begin(), gx.begin() + std::min(gx.size(), x.size()), x.begin());
            const auto rep = martingale_check(girsanov_weights(b, gs, x));
            n = report_json(rep);
            return verdict(rep.pass);
        });
    }

    R.check("appendix.exp_moments", "E exp(k int|b(x+W)|^2) and E rho^a stable from N/2 to N", [&](Json& n) {
        const auto b = make_drift(drift_params(cfg));
        std::vector<double> x(static_cast<std::size_t>(b.dim()), 0.0);
        std::copy(gx.begin(), gx.begin() + std::min(gx.size(), x.size()), x.begin());
        bool ok = true;
        for (const auto& r : exp_moment_check(b, numbers(cfg, "/girsanov/k"), gs, x)) {
            n["reports"].push_back(report_json(r));
            ok = ok && r.pass;
        }
        return verdict(ok);
    });

    SimConfig ks;
    ks.horizon = num(cfg, "/khasminskii/horizon");
    ks.steps = count(cfg, "/khasminskii/steps");
    ks.paths = count(cfg, "/khasminskii/paths");
    ks.seed = seed;
    const auto probes = points(cfg, "/khasminskii/probes");
    auto& kser = R.series("appendix_khasminskii", {"fixture", "alpha", "estimate", "se", "bound"});
    auto khas = [&](const std::string& id, const FieldFn& f, double fixture) {
        R.check(id, "sup_x E exp(int f) <= 1/(1 - alpha)", [&](Json& n) {
            const auto rep = khasminskii_check(f, ks, probes);
            n = report_json(rep.mc);
            n["alpha"] = rep.alpha;
            kser.rows.push_back({fixture, rep.alpha, rep.mc.estimate, rep.mc.se, rep.mc.bound});
            if (rep.mc.report_only) return Status::report;
            return verdict(rep.mc.pass);
        });
    };
    const double ca = num(cfg, "/khasminskii/constant_alpha");
    khas("appendix.khasminskii.constant", FieldFn::constant(1, {ca / ks.horizon}), 0.0);
    {
        // Scale the bump so that its quadrature alpha hits the target.
        const double width = num(cfg, "/khasminskii/bump_width");
        const auto unit = bump_scalar(1, 1.0, width);
        double a1 = 0.0;
        for (const auto& x : probes) a1 = std::max(a1, additive_functional(unit, 0.0, ks.horizon, x));
        khas("appendix.khasminskii.bump", bump_scalar(1, num(cfg, "/khasminskii/bump_alpha") / a1, width), 1.0);
    }

    std::vector<std::pair<double, double>> pairs;
    for (const auto& pr : points(cfg, "/kernel/pairs")) {
        if (pr.size() != 2) fail(ErrorKind::config, "config.kernel.pairs: each pair needs two times");
        pairs.emplace_back(pr[0], pr[1]);
    }
    auto& ker = R.series("appendix_kernel", {"fixture", "t_minus_s", "value"});
    auto kernel = [&](const std::string& id, const FieldFn& f, double pp, double qq,
                      const std::vector<std::vector<double>>& pr, const SpaceTimeBox& nb, double fixture) {
        R.check(id, "sup_x int_s^t E f(r, x+W) dr <= C (t-s)^beta ||f||, exponent >= beta - 0.1", [&](Json& n) {
            const auto kb = kernel_bound_estimate(f, pp, qq, pairs, pr, nb);
            n["p_prime"] = pp;
            n["q_prime"] = qq;
            n["beta"] = kb.beta;
            n["fitted_exponent"] = kb.fitted_exponent;
            n["constant"] = kb.constant;
            n["f_norm"] = kb.f_norm;
            n["values"] = kb.values;
            bool mono = std::is_sorted(kb.running_sup.begin(), kb.running_sup.end());
            n["running_sup_monotone"] = mono;
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                ker.rows.push_back({fixture, pairs[i].second - pairs[i].first, kb.values[i]});
            }
            return verdict(kb.pass && mono);
        });
    };
    const auto indicator = FieldFn(1, 1, [](double, std::span<const double> x, std::span<double> out) {
        out[0] = std::abs(x[0]) <= 0.5 ? 1.0 : 0.0;
    });
    kernel("appendix.kernel.indicator", indicator, 4.0, 4.0, {{0.0}, {0.25}, {0.5}, {1.0}},
           SpaceTimeBox::cube(1, 1.0, 2.0, 4001, 3), 0.0);
    const auto radial = FieldFn(2, 1, [](double, std::span<const double> x, std::span<double> out) {
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
        out[0] = r <= 1.0 ? 1.0 / std::sqrt(r) : 0.0;
    });
    kernel("appendix.kernel.radial2d", radial, 3.0, 3.0, {{0.0, 0.0}, {0.5, 0.0}, {1.0, 0.0}},
           SpaceTimeBox::cube(2, 1.0, 1.5, 300, 3), 1.0);
}

}  // namespace

SuiteResult run_suite(const std::string& name, const Json& cfg) {
    const auto start = std::chrono::steady_clock::now();
    Runner R(name, cfg);
    if (name == "heat-constants") {
        suite_heat(R);
    } else if (name == "lemma1") {
        suite_lemma1(R);
    } else if (name == "lemma2") {
        suite_lemma2(R);
    } else if (name == "lemma3") {
        suite_lemma3(R);
    } else if (name == "lemma4") {
        suite_lemma4(R);
    } else if (name == "prop-estimate") {
        suite_prop(R);
    } else if (name == "appendix") {
        suite_appendix(R);
    } else {
        fail(ErrorKind::config, "suite: unknown suite '" + name + "'");
    }
    auto res = R.take();
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

}  // namespace roughdrift

#include "roughdrift/error.hpp"
#include "roughdrift/girsanov.hpp"
#include "roughdrift/harness.hpp"
#include "roughdrift/heat.hpp"
#include "roughdrift/parallel.hpp"
#include "roughdrift/sde.hpp"
#include "roughdrift/zvonkin.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

using namespace roughdrift;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 0;
    std::string out;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON config file");
    app->add_option("--seed", c.seed, "RNG seed");
    app->add_option("--workers", c.workers, "worker threads (0 = all cores)");
    app->add_option("--out", c.out, "output directory");
}

Json resolved(const Common& c, const std::string& suite = "") {
    Json user = c.config.empty() ? Json::object() : load_config_file(c.config);
    if (c.seed) user["seed"] = *c.seed;
    return resolve_config(suite, user);
}

std::vector<double> vec(const Json& j) { return j.get<std::vector<double>>(); }

std::vector<double> start_point(const Json& j, int dim) {
    auto x = vec(j);
    x.resize(static_cast<std::size_t>(dim), 0.0);
    return x;
}

SpaceTimeBox box_of(const Json& cfg, const PresetParams& p, double T) {
    const auto& hw = cfg["grid"]["half_width"];
    const double half = hw.is_null() ? support_radius(p) + 6.0 * std::sqrt(T) : hw.get<double>();
    return SpaceTimeBox::cube(p.dim, T, half, cfg["grid"]["nodes"].get<std::size_t>(),
                              cfg["grid"]["time_nodes"].get<std::size_t>());
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

Json line(const std::string& check, const EstimateReport& r) {
    Json j{{"check", check}, {"quantity", r.quantity}, {"estimate", r.estimate}, {"se", r.se}, {"pass", r.pass}};
    j["bound"] = std::isfinite(r.bound) ? Json(r.bound) : Json();
    if (r.report_only) j["report_only"] = true;
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    return j;
}

int emit(const std::vector<Json>& lines) {
    bool ok = true;
    for (const auto& l : lines) {
        std::cout << l.dump() << "\n";
        if (!l.value("report_only", false)) ok = ok && l.value("pass", true);
    }
    return ok ? 0 : 2;
}

SimConfig sim_of(const Json& cfg, double T, std::size_t steps, std::size_t paths) {
    SimConfig s;
    s.horizon = T;
    s.steps = steps;
    s.paths = paths;
    s.seed = cfg["seed"].get<std::uint64_t>();
    s.moment_orders = vec(cfg["sde"]["moment_orders"]);
    s.validate();
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical toolkit for SDEs with rough drift"};
    app.require_subcommand(1);
    Common c;

    auto* heat = app.add_subcommand("heat-solve", "backward heat solve with the drift as forcing");
    add_common(heat, c);
    double heat_T = 0.25, heat_lambda = 0.0;
    heat->add_option("--horizon", heat_T);
    heat->add_option("--lambda", heat_lambda);

    auto* zv = app.add_subcommand("zvonkin", "Zvonkin ladder contraction report");
    add_common(zv, c);
    bool zv_levels = false;
    zv->add_flag("--levels", zv_levels, "write level fields to --out");

    auto* sim = app.add_subcommand("simulate", "Euler-Maruyama moments");
    add_common(sim, c);
    std::optional<double> sim_h;
    std::string csv;
    sim->set_help_flag("--help", "Print this help message and exit");
    sim->add_option("--h", sim_h, "time step");
    std::optional<std::size_t> n_paths;
    std::optional<int> depth;
    std::vector<double> moments;
    sim->add_option("--N", n_paths, "path count");
    sim->add_option("--depth", depth, "ladder depth for transformed moments");
    sim->add_option("--moments", moments, "moment orders");
    sim->add_option("--csv", csv, "per-path functionals CSV");

    auto* cpl = app.add_subcommand("couple", "coupled paths and transform comparability");
    add_common(cpl, c);
    cpl->set_help_flag("--help", "Print this help message and exit");
    cpl->add_option("--h", sim_h, "time step");
    cpl->add_option("--N", n_paths, "path count");
    cpl->add_option("--depth", depth, "ladder depth");
    cpl->add_option("--csv", csv, "per-path functionals CSV");

    auto* gir = app.add_subcommand("girsanov-check", "direct vs Girsanov-weighted expectations");
    add_common(gir, c);
    auto* kh = app.add_subcommand("khasminskii", "exponential moment bound");
    add_common(kh, c);
    auto* kb = app.add_subcommand("kernel-bound", "Brownian kernel estimate");
    add_common(kb, c);

    auto* su = app.add_subcommand("suite", "run a verification suite");
    add_common(su, c);
    std::string suite_name;
    su->add_option("name", suite_name)->required()->check(CLI::IsMember(suite_names()));

    auto* co = app.add_subcommand("corpus", "print the drift registry");

    CLI11_PARSE(app, argc, argv);

    try {
        set_worker_count(c.workers);
        if (co->parsed()) {
            std::cout << corpus_json().dump(2) << "\n";
            return 0;
        }
        if (su->parsed()) {
            const Json cfg = resolved(c, suite_name);
            const auto res = run_suite(suite_name, cfg);
            if (!c.out.empty()) write_outputs(res, cfg, c.out);
            std::cout << report_jsonl(res);
            std::cerr << suite_name << ": " << res.wall_seconds << " s\n";
            return exit_code(res);
        }

        const Json cfg = resolved(c);
        const auto p = drift_params(cfg);
        const auto b = make_drift(p);

        if (heat->parsed()) {
            HeatOptions o;
            o.damping = heat_lambda;
            o.exponents = p.exponents;
            o.hessian = true;
            o.gauss_points = cfg["grid"]["gauss_points"].get<std::size_t>();
            const auto box = box_of(cfg, p, heat_T);
            const auto sol = solve_backward_heat(b.as_field(), box, o);
            const double fn = sol.forcing_norm.value;
            double hess = 0.0;
            if (sol.hessian) hess = lqp_norm(*sol.hessian, p.exponents).value;
            Json s{{"T", heat_T}, {"lambda", heat_lambda}, {"forcing_norm", fn},
                   {"grad_const", fn > 0 ? sol.grad.sup_norm() / fn : 0.0}, {"hess_const", fn > 0 ? hess / fn : 0.0}};
            if (!c.out.empty()) {
                ensure_dir(c.out);
                sol.u.save((fs::path(c.out) / "u.bin").string());
                sol.grad.save((fs::path(c.out) / "grad.bin").string());
                std::ofstream(fs::path(c.out) / "summary.json") << s.dump(2) << "\n";
            }
            std::cout << s.dump() << "\n";
            return 0;
        }

        if (zv->parsed()) {
            const auto horizons = vec(cfg["ladder"]["horizons"]);
            const double widest = *std::max_element(horizons.begin(), horizons.end());
            const auto mode_s = cfg["ladder"]["mode"].get<std::string>();
            const auto mode = mode_s == "auto" ? (corpus_entry(p, p.preset).holder_mode ? LadderMode::holder
                                                                                         : LadderMode::lqp)
                                               : ladder_mode_from_string(mode_s);
            const int n = cfg["ladder"]["depth"].get<int>();
            LadderOptions lo;
            lo.heat.gauss_points = cfg["grid"]["gauss_points"].get<std::size_t>();
            lo.holder_probes = cfg["ladder"]["holder_probes"].get<std::size_t>();
            lo.holder_seed = cfg["seed"].get<std::uint64_t>();
            const auto rep = contraction_report(b, n, box_of(cfg, p, widest), mode, horizons, lo);
            Json j{{"mode", to_string(rep.mode)}, {"depth", rep.depth}};
            j["T0"] = rep.T0 ? Json(*rep.T0) : Json();
            for (const auto& r : rep.rows) {
                Json row{{"T", r.horizon}, {"C_n", r.C_n}, {"D_n", r.D_n}, {"b_norm", r.b_norm},
                         {"epsilon", r.epsilon}, {"contracting", r.contracting}};
                for (const auto& l : r.levels) {
                    row["levels"].push_back({{"k", l.k}, {"phi_norm", l.phi_norm}, {"grad_sup", l.grad_sup},
                                             {"hess_norm", l.hess_norm}, {"ratio", l.ratio}});
                }
                j["rows"].push_back(row);
            }
            if (zv_levels && !c.out.empty() && rep.T0) {
                ensure_dir(c.out);
                const auto L = build_ladder(b, n, box_of(cfg, p, widest).with_horizon(*rep.T0), mode, lo);
                for (const auto& lv : L.levels) {
                    const auto k = std::to_string(&lv - L.levels.data());
                    lv.phi.save((fs::path(c.out) / ("phi_" + k + ".bin")).string());
                    lv.U.u.save((fs::path(c.out) / ("U_" + k + ".bin")).string());
                }
            }
            std::cout << j.dump(2) << "\n";
            return 0;
        }

        if (sim->parsed() || cpl->parsed()) {
            const auto& sd = cfg["sde"];
            const double T = sd["horizon"].is_null() ? 1.0 : sd["horizon"].get<double>();
            const std::size_t steps = sim_h ? SimConfig::steps_for(T, *sim_h) : sd["steps"].get<std::size_t>();
            auto s = sim_of(cfg, T, steps, n_paths.value_or(sd["paths"].get<std::size_t>()));
            if (!moments.empty()) s.moment_orders = moments;
            const int n = depth.value_or(sd["depth"].get<int>());
            std::vector<Json> lines;
            std::ofstream csv_out;
            if (!csv.empty()) {
                csv_out.open(csv);
                csv_out << "path,functional,value\n";
            }
            if (sim->parsed()) {
                const auto batch = simulate(b, s, start_point(sd["x1"], p.dim));
                for (const auto& r : moment_stability(batch, s.moment_orders)) lines.push_back(line("moment", r));
                lines.push_back(line("integrability", integrability_monitor(b, batch)));
                if (csv_out) {
                    for (std::size_t i = 0; i < batch.paths; ++i) {
                        const double* xT = batch.state(i, batch.steps);
                        csv_out << i << ",X_T," << xT[0] << "\n" << i << ",energy," << batch.drift_energy[i] << "\n";
                    }
                }
            } else {
                const auto [c1, c2] = simulate_coupled(b, s, start_point(sd["x1"], p.dim), start_point(sd["x2"], p.dim));
                const auto L = build_ladder(b, n, box_of(cfg, p, T), corpus_entry(p, p.preset).holder_mode
                                                                         ? LadderMode::holder
                                                                         : LadderMode::lqp);
                const auto tf = transformed_fields(L);
                const auto t1 = transformed_process(c1, tf), t2 = transformed_process(c2, tf);
                const auto st = comparability(c1, t1, c2, t2);
                EstimateReport sig;
                sig.quantity = "sigma_sup";
                sig.estimate = st.sigma_sup;
                sig.bound = 0.5;
                sig.pass = st.sigma_violations == 0;
                lines.push_back(line("comparability.sigma", sig));
                EstimateReport ratio;
                ratio.quantity = "ratio_violations";
                ratio.estimate = static_cast<double>(st.ratio_violations);
                ratio.bound = 0.0;
                ratio.pass = st.ratio_violations == 0;
                lines.push_back(line("comparability.ratio", ratio));
                const auto A = a_process(c1, t1, c2, t2);
                for (double k : {1.0, ito_constant(vec(sd["moment_orders"]).back())}) {
                    auto l = line("exp_A", exp_a_estimate(A, k));
                    l["k"] = k;
                    l["bound"] = nullptr;
                    l["report_only"] = true;
                    lines.push_back(l);
                }
                if (csv_out) {
                    for (std::size_t i = 0; i < c1.paths; ++i) {
                        csv_out << i << ",sup_distance," << c1.sup_distance[i] << "\n" << i << ",A_T," << A[i] << "\n";
                    }
                }
            }
            return emit(lines);
        }

        if (gir->parsed()) {
            const auto& g = cfg["girsanov"];
            SimConfig s;
            s.horizon = g["horizon"].get<double>();
            s.steps = g["steps"].get<std::size_t>();
            s.paths = g["paths"].get<std::size_t>();
            s.seed = cfg["seed"].get<std::uint64_t>();
            const auto x = start_point(g["x"], p.dim);
            std::vector<Json> lines;
            for (const auto& r : two_estimator_check(b, s, x, standard_functionals())) {
                auto l = line("two_estimator." + r.functional, r.weighted);
                l.erase("report_only");
                l["ess"] = r.weighted.bound;
                l["direct"] = r.direct.estimate;
                l["direct_se"] = r.direct.se;
                l["bound"] = 3.0 * std::hypot(r.direct.se, r.weighted.se);
                l["pass"] = r.pass;
                lines.push_back(l);
            }
            lines.push_back(line("martingale", martingale_check(girsanov_weights(b, s, x))));
            return emit(lines);
        }

        if (kh->parsed()) {
            const auto& k = cfg["khasminskii"];
            SimConfig s;
            s.horizon = k["horizon"].get<double>();
            s.steps = k["steps"].get<std::size_t>();
            s.paths = k["paths"].get<std::size_t>();
            s.seed = cfg["seed"].get<std::uint64_t>();
            const auto probes = k["probes"].get<std::vector<std::vector<double>>>();
            const auto rep = khasminskii_check(FieldFn::squared_magnitude(b.as_field()), s, probes);
            auto l = line("khasminskii", rep.mc);
            l["alpha"] = rep.alpha;
            return emit({l});
        }

        if (kb->parsed()) {
            const auto pairs_j = cfg["kernel"]["pairs"].get<std::vector<std::vector<double>>>();
            std::vector<std::pair<double, double>> pairs;
            for (const auto& q : pairs_j) {
                if (q.size() != 2) fail(ErrorKind::config, "config.kernel.pairs: each pair needs two times");
                pairs.emplace_back(q[0], q[1]);
            }
            double tmax = 0.0;
            for (const auto& q : pairs) tmax = std::max(tmax, q.second);
            const auto f = FieldFn::squared_magnitude(b.as_field());
            const double pp = p.exponents.p / 2.0, qq = p.exponents.q / 2.0;
            std::vector<std::vector<double>> probes{std::vector<double>(static_cast<std::size_t>(p.dim), 0.0)};
            const auto r = kernel_bound_estimate(f, pp, qq, pairs, probes, box_of(cfg, p, tmax));
            Json l{{"check", "kernel_bound"}, {"estimate", r.fitted_exponent}, {"se", 0.0},
                   {"bound", r.beta - 0.1}, {"pass", r.pass}, {"constant", r.constant}, {"values", r.values}};
            return emit({l});
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

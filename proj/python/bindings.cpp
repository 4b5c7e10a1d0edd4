#include "roughdrift/corpus.hpp"
#include "roughdrift/error.hpp"
#include "roughdrift/girsanov.hpp"
#include "roughdrift/harness.hpp"
#include "roughdrift/heat.hpp"
#include "roughdrift/parallel.hpp"
#include "roughdrift/sde.hpp"
#include "roughdrift/zvonkin.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace roughdrift;

namespace {

// JSON crosses the boundary as text; the Python wrapper decodes it.
Json from_py(const py::object& obj) {
    if (obj.is_none()) return Json::object();
    const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
    return Json::parse(text);
}

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::array_t<double> array_of(const GridField& g) {
    const auto& box = g.box();
    std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(box.time_nodes)};
    for (int a = 0; a < box.dim; ++a) shape.push_back(static_cast<py::ssize_t>(box.nodes[a]));
    shape.push_back(static_cast<py::ssize_t>(g.components()));
    py::array_t<double> out(shape);
    std::copy(g.values().begin(), g.values().end(), out.mutable_data());
    return out;
}

PresetParams params_of(const py::object& drift) {
    Json cfg = resolve_config("", Json{{"drift", from_py(drift)}});
    return drift_params(cfg);
}

SimConfig sim_of(double horizon, std::size_t steps, std::size_t paths, std::uint64_t seed) {
    SimConfig s;
    s.horizon = horizon;
    s.steps = steps;
    s.paths = paths;
    s.seed = seed;
    s.validate();
    return s;
}

py::dict report_dict(const EstimateReport& r) {
    py::dict d;
    d["quantity"] = r.quantity;
    d["estimate"] = r.estimate;
    d["se"] = r.se;
    d["samples"] = r.samples;
    d["bound"] = r.bound;
    d["pass"] = r.pass;
    d["report_only"] = r.report_only;
    d["warnings"] = r.warnings;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Numerical toolkit for SDEs with rough drift";

    static py::exception<Error> base(m, "RoughDriftError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(base, e.what());
        }
    });

    m.def("set_workers", &set_worker_count, py::arg("workers"));
    m.def("prodi_serrin", [](double p, double q, int d) {
        const auto r = prodi_serrin_check(p, q, d);
        return py::make_tuple(r.admissible, r.margin);
    });
    m.def("kernel_beta", &kernel_beta, py::arg("p_prime"), py::arg("q_prime"), py::arg("dim"));
    m.def("suite_names", &suite_names);
    m.def("corpus", [] { return to_py(corpus_json()); });
    m.def(
        "default_config", [](const std::string& suite) { return to_py(default_config(suite)); }, py::arg("suite") = "");
    m.def(
        "run_suite",
        [](const std::string& name, const py::object& config, const std::string& out) {
            const Json cfg = resolve_config(name, from_py(config));
            SuiteResult r;
            {
                py::gil_scoped_release release;
                r = run_suite(name, cfg);
            }
            if (!out.empty()) write_outputs(r, cfg, out);
            py::dict d;
            d["suite"] = r.suite;
            d["fingerprint"] = r.fingerprint;
            d["report"] = report_jsonl(r);
            d["exit_code"] = exit_code(r);
            d["wall_seconds"] = r.wall_seconds;
            return d;
        },
        py::arg("name"), py::arg("config") = py::none(), py::arg("out") = "");

    m.def(
        "heat_solve",
        [](const py::object& drift, double horizon, std::size_t nodes, std::size_t time_nodes, double damping) {
            const auto p = params_of(drift);
            const auto b = make_drift(p);
            HeatOptions o;
            o.damping = damping;
            o.exponents = p.exponents;
            const auto box = box_for(p, horizon, nodes, time_nodes);
            HeatSolution sol;
            {
                py::gil_scoped_release release;
                sol = solve_backward_heat(b.as_field(), box, o);
            }
            py::list x;
            for (std::size_t i = 0; i < box.nodes[0]; ++i) x.append(box.coord(0, i));
            py::dict d;
            d["u"] = array_of(sol.u);
            d["grad"] = array_of(sol.grad);
            d["x"] = x;
            d["forcing_norm"] = sol.forcing_norm.value;
            return d;
        },
        py::arg("drift"), py::arg("horizon"), py::arg("nodes") = 256, py::arg("time_nodes") = 128,
        py::arg("damping") = 0.0);

    m.def(
        "contraction",
        [](const py::object& drift, int depth, std::vector<double> horizons, std::size_t nodes, std::size_t time_nodes) {
            const auto p = params_of(drift);
            const auto b = make_drift(p);
            const double widest = *std::max_element(horizons.begin(), horizons.end());
            const auto mode = corpus_entry(p, p.preset).holder_mode ? LadderMode::holder : LadderMode::lqp;
            ContractionReport rep;
            {
                py::gil_scoped_release release;
                rep = contraction_report(b, depth, box_for(p, widest, nodes, time_nodes), mode, horizons);
            }
            py::list rows;
            for (const auto& r : rep.rows) {
                py::dict d;
                d["T"] = r.horizon;
                d["C_n"] = r.C_n;
                d["D_n"] = r.D_n;
                std::vector<double> ratios;
                for (const auto& l : r.levels) ratios.push_back(l.ratio);
                d["ratios"] = ratios;
                rows.append(d);
            }
            py::dict out;
            out["mode"] = to_string(rep.mode);
            out["T0"] = rep.T0 ? py::object(py::float_(*rep.T0)) : py::object(py::none());
            out["rows"] = rows;
            return out;
        },
        py::arg("drift"), py::arg("depth") = 4, py::arg("horizons") = std::vector<double>{0.4, 0.2, 0.1, 0.05},
        py::arg("nodes") = 128, py::arg("time_nodes") = 33);

    m.def(
        "simulate",
        [](const py::object& drift, std::vector<double> x, double horizon, std::size_t steps, std::size_t paths,
           std::uint64_t seed) {
            const auto b = make_drift(params_of(drift));
            PathBatch batch;
            {
                py::gil_scoped_release release;
                batch = simulate(b, sim_of(horizon, steps, paths, seed), x);
            }
            py::array_t<double> out({static_cast<py::ssize_t>(batch.paths), static_cast<py::ssize_t>(batch.steps + 1),
                                     static_cast<py::ssize_t>(batch.dim)});
            std::copy(batch.traj.begin(), batch.traj.end(), out.mutable_data());
            return out;
        },
        py::arg("drift"), py::arg("x"), py::arg("horizon") = 1.0, py::arg("steps") = 100, py::arg("paths") = 1000,
        py::arg("seed") = 1);

    m.def(
        "girsanov_check",
        [](const py::object& drift, std::vector<double> x, double horizon, std::size_t steps, std::size_t paths,
           std::uint64_t seed) {
            const auto b = make_drift(params_of(drift));
            const auto s = sim_of(horizon, steps, paths, seed);
            std::vector<TwoEstimatorRow> rows;
            EstimateReport mart;
            {
                py::gil_scoped_release release;
                rows = two_estimator_check(b, s, x, standard_functionals());
                mart = martingale_check(girsanov_weights(b, s, x));
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["functional"] = r.functional;
                d["direct"] = report_dict(r.direct);
                d["weighted"] = report_dict(r.weighted);
                d["pass"] = r.pass;
                out.append(d);
            }
            py::dict res;
            res["rows"] = out;
            res["martingale"] = report_dict(mart);
            return res;
        },
        py::arg("drift"), py::arg("x"), py::arg("horizon") = 1.0, py::arg("steps") = 100, py::arg("paths") = 20000,
        py::arg("seed") = 1);

    m.def(
        "khasminskii_constant",
        [](double c, double horizon, std::size_t steps, std::size_t paths, std::uint64_t seed) {
            const auto rep = khasminskii_check(FieldFn::constant(1, {c}), sim_of(horizon, steps, paths, seed), {{0.0}});
            py::dict d = report_dict(rep.mc);
            d["alpha"] = rep.alpha;
            return d;
        },
        py::arg("c"), py::arg("horizon") = 1.0, py::arg("steps") = 100, py::arg("paths") = 1000, py::arg("seed") = 1);
}

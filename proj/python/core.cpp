#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "noonsim/config.hpp"
#include "noonsim/sweeps.hpp"
#include "noonsim/validate.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace noonsim;

namespace {

Config parse(const std::string& text) { return parse_config(nlohmann::json::parse(text)); }

py::dict params_dict(const ProtocolParams& p) {
    py::dict d("N"_a = p.N, "alpha0"_a = p.alpha0, "delta0"_a = p.delta0, "omega_s2"_a = p.omega_s2,
               "tau1"_a = p.tau1, "tau2"_a = p.tau2, "tau3"_a = p.tau3, "T2"_a = p.T2,
               "omega_s2_amp"_a = p.omega_s2_amp, "omega_p3"_a = p.omega_p3,
               "delta_tilde"_a = p.delta_tilde_used(), "eps_n0"_a = p.eps_n0, "theta_s2"_a = p.theta_s2);
    py::dict margins;
    for (const auto& m : p.margins) margins[py::str(m.name)] = m.value;
    d["rwa_margins"] = margins;
    return d;
}

py::dict run(const std::string& text) {
    const Config c = parse(text);
    SimResult r;
    {
        py::gil_scoped_release release;
        r = run_protocol(to_params(c), to_run_options(c));
    }
    return py::dict("t"_a = r.t, "F"_a = r.F, "populations"_a = r.pop, "nbar"_a = r.nbar, "leakage"_a = r.leakage,
                    "F_final"_a = r.F_final, "boundaries"_a = r.boundaries, "backend"_a = r.backend,
                    "cavity_dim"_a = r.cavity_dim, "norm_drift"_a = r.norm_drift, "warnings"_a = r.warnings);
}

std::vector<py::dict> sweep(const std::string& text, const std::string& param, double lo, double hi, int points,
                            int jobs) {
    const Config c = parse(text);
    SweepSpec s;
    s.param = param;
    s.lo = lo;
    s.hi = hi;
    s.points = points;
    s.params = to_params(c);
    s.base = to_run_options(c);
    s.jobs = jobs;
    std::vector<SweepRow> rows;
    {
        py::gil_scoped_release release;
        rows = run_sweep(s);
    }
    std::vector<py::dict> out;
    for (const auto& r : rows)
        out.push_back(py::dict("value"_a = r.value, "F3"_a = r.F3, "ok"_a = r.ok, "error"_a = r.error,
                               "warnings"_a = r.warnings));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of noonsim: NOON-state preparation with a single multilevel qudit.";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
    py::register_exception<TruncationError>(m, "TruncationError", base.ptr());
    py::register_exception<StiffnessError>(m, "StiffnessError", base.ptr());

    m.def("params", [](const std::string& text) { return params_dict(to_params(parse(text))); }, "config_json"_a,
          "Derived protocol parameters in internal units (us, rad/us).");
    m.def("resolved_config", [](const std::string& text) { return to_json(parse(text)).dump(); }, "config_json"_a);
    m.def("run", &run, "config_json"_a, "Run the three-step protocol; returns time series and final fidelities.");
    m.def("sweep", &sweep, "config_json"_a, "param"_a, "lo"_a, "hi"_a, "points"_a, "jobs"_a = 1);
    m.def(
        "validate",
        [](const std::string& text) {
            std::vector<std::tuple<std::string, bool, std::string>> out;
            for (const auto& c : validation_suite(parse(text))) out.emplace_back(c.name, c.ok, c.detail);
            return out;
        },
        "config_json"_a);
    m.def(
        "two_level_transfer",
        [](const std::string& shape, double delta) { return two_level_transfer(parse_shape(shape), delta); },
        "shape"_a, "delta"_a);
    m.def("sensitivity_q", &sensitivity_q, "A"_a);
}

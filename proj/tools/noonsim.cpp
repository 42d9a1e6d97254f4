#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include "noonsim/config.hpp"
#include "noonsim/sweeps.hpp"
#include "noonsim/validate.hpp"

#ifndef NOONSIM_VERSION
#define NOONSIM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace noonsim;

namespace {

enum Exit { kOk = 0, kValidation = 1, kConfig = 2, kRuntime = 3 };

struct Flags {
    std::string config;
    std::string out;
    std::string model;
    std::string pulse;
    std::string param;
    std::string range;
    std::string scenarios;
    int jobs = 0;
};

// snprintf under the default "C" locale keeps the decimal point fixed.
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_text(const std::string& s) {
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
        f << content;
        if (!f.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

int resolve_jobs(int requested) {
    int jobs = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("NOONSIM_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) jobs = std::min(jobs, cap);
    }
    return jobs;
}

Config load(const Flags& f) {
    Config c = load_config(f.config);
    if (!f.model.empty()) {
        parse_model(f.model);
        c.model = f.model;
    }
    if (!f.pulse.empty()) {
        parse_shape(f.pulse);
        c.pulse_shape = f.pulse;
    }
    if (!f.out.empty()) c.output_directory = f.out;
    return c;
}

json stats_json(const IntegratorStats& s) {
    return {{"steps", s.steps}, {"rejected", s.rejected}, {"rhs_evals", s.rhs_evals}};
}

json manifest(const Config& c, const std::string& command, double wall, const IntegratorStats& stats,
              const std::vector<std::string>& warnings) {
    return {{"command", command},
            {"software_version", NOONSIM_VERSION},
            {"config_hash", config_hash(c)},
            {"config", to_json(c)},
            {"wall_time_s", wall},
            {"integrator_stats", stats_json(stats)},
            {"warnings", warnings},
            {"failed", false}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_params(const Flags& f) {
    const Config c = load(f);
    const ProtocolParams p = to_params(c);
    const RunOptions o = to_run_options(c);
    const auto margins = rwa_report(p, o.shape);
    const double mhz = 1.0 / kTwoPi;
    std::printf("%-28s %14s  %s\n", "quantity", "value", "unit");
    auto row = [](const char* name, double v, const char* unit, int digits = 3) {
        std::printf("%-28s %14.*f  %s\n", name, digits, v, unit);
    };
    std::printf("%-28s %14d\n", "N", p.N);
    row("alpha0", p.alpha0, "", 4);
    row("lambda/2pi", p.sys.lambda * mhz, "MHz");
    row("Delta/2pi", p.sys.Delta * mhz * 1e-3, "GHz");
    row("delta'/2pi", p.sys.delta_p * mhz, "MHz");
    row("delta0/2pi", p.delta0 * mhz, "MHz");
    row("omega_s2/2pi", p.omega_s2 * mhz, "MHz");
    row("tau1", p.tau1, "us", 4);
    row("tau2", p.tau2, "us", 4);
    row("tau3", p.tau3, "us", 4);
    row("T2 (step-2 duration)", p.T2, "us", 4);
    row("Omega_s2/2pi", p.omega_s2_amp * mhz, "MHz");
    row("Omega'_s3/2pi", p.omega_p3 * mhz, "MHz");
    row("delta~/2pi", p.delta_tilde_used() * mhz, "MHz");
    row("eps_N0", p.eps_n0, "", 4);
    row("Theta_s2", p.theta_s2, "rad", 4);
    std::printf("\nRWA margins (warn below 10):\n");
    for (const auto& m : margins) std::printf("  %-34s %10.3f%s\n", m.name.c_str(), m.value, m.warn ? "  WARN" : "");
    return kOk;
}

int cmd_run(const Flags& f) {
    const Config c = load(f);
    const ProtocolParams p = to_params(c);
    RunOptions o = to_run_options(c);
    o.trajectories.jobs = resolve_jobs(f.jobs);
    const fs::path dir = c.output_directory;
    fs::create_directories(dir);
    const std::string header = "t_us,F1,F2,F3,pop_q0,pop_q1,pop_q2,pop_q3,pop_q4,nbar_c1,nbar_c2,leakage\n";
    const auto t0 = std::chrono::steady_clock::now();
    SimResult r;
    try {
        r = run_protocol(p, o);
    } catch (const StiffnessError& e) {
        // integration never produced samples; keep a header-only CSV next to the failure record
        write_atomic(dir / "timeseries.csv", header);
        json m = manifest(c, "run", seconds_since(t0), {}, {});
        m["failed"] = true;
        m["error"] = e.what();
        m["partial_outputs"] = {"timeseries.csv"};
        write_atomic(dir / "manifest.json", m.dump(2) + "\n");
        throw;
    }
    const double wall = seconds_since(t0);

    std::string csv = header;
    for (std::size_t i = 0; i < r.t.size(); ++i) {
        csv += num(r.t[i]);
        for (double v : r.F[i]) csv += "," + num(v);
        for (double v : r.pop[i]) csv += "," + num(v);
        csv += "," + num(r.nbar[i][0]) + "," + num(r.nbar[i][1]) + "," + num(r.leakage[i]) + "\n";
    }
    write_atomic(dir / "timeseries.csv", csv);

    json steps = json::array();
    for (auto s : r.steps) steps.push_back(to_string(s));
    json summary{{"N", p.N},
                 {"model", to_string(r.model)},
                 {"step_models", steps},
                 {"pulse_shape", c.pulse_shape},
                 {"F1_final", r.F_final[0]},
                 {"F2_final", r.F_final[1]},
                 {"F3_final", r.F_final[2]},
                 {"tau1_us", r.boundaries[0]},
                 {"tau2_us", r.boundaries[1]},
                 {"tau3_us", r.boundaries[2]},
                 {"boundary_fidelities", r.boundary_F},
                 {"cavity_dim", r.cavity_dim},
                 {"backend", r.backend},
                 {"max_leakage", r.max_leakage},
                 {"leakage_flag", r.leakage_flag},
                 {"norm_drift", r.norm_drift},
                 {"trace_drift", r.trace_drift},
                 {"truncation_tail", r.truncation_tail}};
    if (r.backend == "trajectories") {
        summary["trajectories"] = r.trajectories;
        summary["no_jump_probability"] = r.no_jump_probability;
    }
    write_atomic(dir / "summary.json", summary.dump(2) + "\n");
    json m = manifest(c, "run", wall, r.stats, r.warnings);
    m["outputs"] = {"timeseries.csv", "summary.json"};
    write_atomic(dir / "manifest.json", m.dump(2) + "\n");

    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    std::printf("F1(tau1) = %.6f  F2(tau2) = %.6f  F3(tau3) = %.6f\n", r.F_final[0], r.F_final[1], r.F_final[2]);
    std::printf("wrote %s\n", dir.string().c_str());
    return kOk;
}

std::array<double, 3> parse_range(const std::string& s) {
    std::array<double, 3> v{};
    std::stringstream ss(s);
    std::string part;
    int k = 0;
    while (std::getline(ss, part, ':')) {
        if (k >= 3) throw ConfigError("--range expects LO:HI:POINTS, got '" + s + "'");
        std::size_t used = 0;
        try {
            v[k] = std::stod(part, &used);
        } catch (const std::exception&) {
            used = std::string::npos;
        }
        if (used != part.size()) throw ConfigError("--range: cannot read '" + part + "' as a number");
        ++k;
    }
    if (k != 3) throw ConfigError("--range expects LO:HI:POINTS, got '" + s + "'");
    if (v[2] != std::floor(v[2]) || v[2] < 2) throw ConfigError("--range: POINTS must be an integer >= 2");
    return v;
}

std::vector<ScenarioRow> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenarios file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    const json& rows = j.is_object() && j.contains("rows") ? j.at("rows") : j;
    if (!rows.is_array()) throw ConfigError(path + ": expected an array of rows");
    std::vector<ScenarioRow> out;
    const char* keys[] = {"delta",       "delta_omega_mhz", "delta_lambda_khz", "crosstalk_ratio",
                          "gamma_d_khz", "gamma_r_khz",     "gamma_kappa_khz"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const json& r = rows[i];
        const std::string where = path + ": row " + std::to_string(i);
        if (!r.is_object()) throw ConfigError(where + " must be an object");
        for (auto it = r.begin(); it != r.end(); ++it) {
            bool known = it.key() == "F3_reference";
            for (const char* k : keys) known = known || it.key() == k;
            if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
        }
        ScenarioRow s;
        double* slots[] = {&s.delta,       &s.delta_omega_mhz, &s.delta_lambda_khz, &s.crosstalk_ratio,
                           &s.gamma_d_khz, &s.gamma_r_khz,     &s.gamma_kappa_khz};
        for (int k = 0; k < 7; ++k) {
            if (!r.contains(keys[k])) continue;
            if (!r.at(keys[k]).is_number()) throw ConfigError(where + ": '" + keys[k] + "' must be a number");
            *slots[k] = r.at(keys[k]).get<double>();
        }
        out.push_back(s);
    }
    return out;
}

int cmd_sweep(const Flags& f) {
    const Config c = load(f);
    const ProtocolParams p = to_params(c);
    RunOptions base = to_run_options(c);
    const int jobs = resolve_jobs(f.jobs);
    base.trajectories.jobs = 1;  // parallelism goes to grid points
    const fs::path dir = c.output_directory;
    const auto t0 = std::chrono::steady_clock::now();
    IntegratorStats total;
    std::vector<std::string> warnings;
    int failed = 0;
    std::string csv, name;

    if (!f.scenarios.empty()) {
        if (!f.param.empty() || !f.range.empty()) throw ConfigError("--scenarios excludes --param/--range");
        auto rows = load_scenarios(f.scenarios);
        const Model m = f.model.empty() ? parse_model(c.decoherence_model) : parse_model(f.model);
        base.model = m;
        base.decoherence_model = m;
        fs::create_directories(dir);
        rows = run_scenarios(std::move(rows), p, base, jobs);
        csv = "delta,delta_omega_mhz,delta_lambda_khz,crosstalk_ratio,gamma_d_khz,gamma_r_khz,gamma_kappa_khz,F3,warnings\n";
        for (const auto& r : rows) {
            auto w = r.warnings;
            if (!r.ok) w.insert(w.begin(), "error: " + r.error), ++failed;
            csv += num(r.delta) + "," + num(r.delta_omega_mhz) + "," + num(r.delta_lambda_khz) + "," +
                   num(r.crosstalk_ratio) + "," + num(r.gamma_d_khz) + "," + num(r.gamma_r_khz) + "," +
                   num(r.gamma_kappa_khz) + "," + (r.ok ? num(r.F3) : "") + "," + csv_text(join(w, "; ")) + "\n";
            std::printf("F3 = %s\n", r.ok ? num(r.F3).c_str() : ("failed: " + r.error).c_str());
        }
        name = "scenarios.csv";
    } else {
        if (f.param.empty() || f.range.empty()) throw ConfigError("sweep needs --param and --range, or --scenarios");
        const auto rg = parse_range(f.range);
        std::vector<SweepRow> rows;
        const bool rate = f.param == "gamma_d" || f.param == "gamma_r" || f.param == "gamma_kappa";
        SweepSpec s;
        s.param = f.param;
        s.lo = rg[0];
        s.hi = rg[1];
        s.points = static_cast<int>(rg[2]);
        s.params = p;
        s.base = base;
        s.jobs = jobs;
        s.validate();
        fs::create_directories(dir);
        if (rate) {
            const Model m = f.model.empty() ? parse_model(c.decoherence_model) : parse_model(f.model);
            rows = decoherence_sweep(f.param, s.lo, s.hi, s.points, p, base, m, jobs);
        } else {
            rows = run_sweep(s);
        }
        csv = "param_value,F3_final,warnings\n";
        for (const auto& r : rows) {
            auto w = r.warnings;
            if (!r.ok) w.insert(w.begin(), "error: " + r.error), ++failed;
            total += r.stats;
            csv += num(r.value) + "," + (r.ok ? num(r.F3) : "") + "," + csv_text(join(w, "; ")) + "\n";
            std::printf("%s = %s  F3 = %s\n", f.param.c_str(), num(r.value).c_str(),
                        r.ok ? num(r.F3).c_str() : ("failed: " + r.error).c_str());
        }
        name = "sweep.csv";
    }
    write_atomic(dir / name, csv);
    json m = manifest(c, "sweep", seconds_since(t0), total, warnings);
    m["sweep"] = {{"param", f.param}, {"range", f.range}, {"scenarios", f.scenarios}, {"jobs", jobs}};
    m["outputs"] = {name};
    m["failed_rows"] = failed;
    m["failed"] = failed > 0;
    write_atomic(dir / "manifest.json", m.dump(2) + "\n");
    std::printf("wrote %s\n", (dir / name).string().c_str());
    return failed ? kRuntime : kOk;
}

int cmd_validate(const Flags& f) {
    const Config c = load(f);
    int fails = 0;
    for (const auto& ch : validation_suite(c)) {
        std::printf("%s %-24s %s\n", ch.ok ? "PASS" : "FAIL", ch.name.c_str(), ch.detail.c_str());
        fails += !ch.ok;
    }
    if (fails) std::printf("%d check(s) failed\n", fails);
    return fails ? kValidation : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noonsim: NOON-state preparation simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", NOONSIM_VERSION);
    Flags f;
    const std::vector<std::string> models{"original", "effective", "hybrid", "dispersive"};

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON configuration file")->required();
        sub->add_option("--model", f.model, "Override protocol.model")->check(CLI::IsMember(models));
        sub->add_option("--pulse", f.pulse, "Override protocol.pulse_shape")->check(CLI::IsMember({"pi", "optimized"}));
    };
    auto* params = app.add_subcommand("params", "Print derived protocol parameters");
    common(params);
    auto* run = app.add_subcommand("run", "Simulate the three-step protocol");
    common(run);
    run->add_option("--out", f.out, "Output directory");
    run->add_option("--jobs", f.jobs, "Worker threads for trajectories")->check(CLI::PositiveNumber);
    auto* sweep = app.add_subcommand("sweep", "Parameter sweep or scenario table");
    common(sweep);
    sweep->add_option("--param", f.param, "Swept parameter")->check(CLI::IsMember(sweep_parameters()));
    sweep->add_option("--range", f.range, "LO:HI:POINTS");
    sweep->add_option("--scenarios", f.scenarios, "JSON scenario rows");
    sweep->add_option("--out", f.out, "Output directory");
    sweep->add_option("--jobs", f.jobs, "Concurrent sweep points")->check(CLI::PositiveNumber);
    auto* validate = app.add_subcommand("validate", "Run the fast self-consistency checks");
    common(validate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*params) return cmd_params(f);
        if (*run) return cmd_run(f);
        if (*sweep) return cmd_sweep(f);
        return cmd_validate(f);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}

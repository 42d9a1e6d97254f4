#include "noonsim/config.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "noonsim/sweeps.hpp"

namespace noonsim {

using nlohmann::json;

namespace {

const char* kBlocks[] = {"system", "protocol", "errors", "decoherence", "integrator", "output"};

// Reads optional keys of one block and remembers which were consumed.
class Block {
public:
    Block(const json& root, std::string name) : name_(std::move(name)) {
        if (!root.contains(name_)) return;
        j_ = &root.at(name_);
        if (!j_->is_object()) throw ConfigError("'" + name_ + "' must be an object");
    }

    bool has(const std::string& key) const { return j_ && j_->contains(key); }

    void number(const std::string& key, double& out) {
        if (!take(key)) return;
        const json& v = j_->at(key);
        if (!v.is_number()) fail(key, "expected a number");
        out = v.get<double>();
    }
    void integer(const std::string& key, int& out) {
        if (!take(key)) return;
        const json& v = j_->at(key);
        if (!v.is_number_integer()) fail(key, "expected an integer");
        out = v.get<int>();
    }
    void unsigned_integer(const std::string& key, std::uint64_t& out) {
        if (!take(key)) return;
        const json& v = j_->at(key);
        if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
        out = v.get<std::uint64_t>();
    }
    void text(const std::string& key, std::string& out) {
        if (!take(key)) return;
        const json& v = j_->at(key);
        if (!v.is_string()) fail(key, "expected a string");
        out = v.get<std::string>();
    }
    template <std::size_t K>
    void numbers(const std::string& key, std::array<double, K>& out) {
        if (!take(key)) return;
        const json& v = j_->at(key);
        if (!v.is_array() || v.size() != K) fail(key, "expected an array of " + std::to_string(K) + " numbers");
        for (std::size_t i = 0; i < K; ++i) {
            if (!v[i].is_number()) fail(key, "expected an array of numbers");
            out[i] = v[i].get<double>();
        }
    }

    void finish() const {
        if (!j_) return;
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError("unknown key '" + name_ + "." + it.key() + "'");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(name_ + "." + key + ": " + what);
    }

private:
    bool take(const std::string& key) {
        seen_.insert(key);
        return has(key);
    }

    const json* j_ = nullptr;
    std::string name_;
    std::set<std::string> seen_;
};

void check(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(field + ": " + what);
}

}  // namespace

Config parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* b : kBlocks) known = known || it.key() == b;
        if (!known) throw ConfigError("unknown key '" + it.key() + "'");
    }
    Config c;

    Block pr(j, "protocol");
    if (!pr.has("N")) throw ConfigError("missing required key 'protocol.N'");
    pr.integer("N", c.N);
    check(c.N >= 1, "protocol.N", "must be >= 1");
    pr.number("tau1_us", c.tau1_us);
    pr.number("T_f_us", c.T_f_us);
    pr.text("pulse_shape", c.pulse_shape);
    pr.text("model", c.model);
    pr.integer("truncation", c.truncation);
    pr.number("A", c.A);
    pr.number("delta_tilde_offset_mhz", c.delta_tilde_offset_mhz);
    pr.finish();
    check(c.tau1_us > 0, "protocol.tau1_us", "must be positive");
    check(c.T_f_us > c.tau1_us, "protocol.T_f_us", "must exceed tau1_us");
    check(c.truncation == 0 || c.truncation >= 2, "protocol.truncation", "must be 0 or >= 2");
    check(c.A != 0.0, "protocol.A", "must be nonzero");
    parse_shape(c.pulse_shape);
    parse_model(c.model);

    c.system = DeviceUnits::defaults(c.N);
    Block sy(j, "system");
    sy.numbers("level_freq_ghz", c.system.level_ghz);
    sy.numbers("cavity_freq_ghz", c.system.cavity_ghz);
    sy.number("lambda_mhz", c.system.lambda_mhz);
    sy.number("Delta_ghz", c.system.Delta_ghz);
    sy.number("delta_prime_mhz", c.system.delta_prime_mhz);
    sy.finish();
    check(c.system.lambda_mhz > 0, "system.lambda_mhz", "must be positive");
    check(c.system.Delta_ghz != 0, "system.Delta_ghz", "must be nonzero");

    Block er(j, "errors");
    er.number("delta", c.delta);
    er.number("delta_omega_mhz", c.delta_omega_mhz);
    er.number("delta_lambda_mhz", c.delta_lambda_mhz);
    er.number("crosstalk_ratio", c.crosstalk_ratio);
    er.finish();

    Block de(j, "decoherence");
    de.number("gamma_d_khz", c.gamma_d_khz);
    de.number("gamma_r_khz", c.gamma_r_khz);
    de.number("gamma_kappa_khz", c.gamma_kappa_khz);
    de.number("kappa_phi_hz", c.kappa_phi_hz);
    de.text("model", c.decoherence_model);
    de.finish();
    check(c.kappa_phi_hz >= 0, "decoherence.kappa_phi_hz", "must be >= 0");
    check(parse_model(c.decoherence_model) != Model::effective, "decoherence.model",
          "the reduced effective model has no decay channels; use original, hybrid or dispersive");

    Block in(j, "integrator");
    in.number("rtol", c.rtol);
    in.number("atol", c.atol);
    in.number("max_step_us", c.max_step_us);
    in.text("method", c.method);
    in.integer("trajectories", c.trajectories);
    in.unsigned_integer("seed", c.seed);
    in.text("lindblad_backend", c.lindblad_backend);
    in.finish();
    check(c.rtol > 0 && c.atol > 0, "integrator.rtol/atol", "must be positive");
    check(c.max_step_us >= 0, "integrator.max_step_us", "must be >= 0");
    check(c.method == "dop853" || c.method == "dopri5", "integrator.method", "expected dop853 or dopri5");
    check(c.trajectories >= 1, "integrator.trajectories", "must be >= 1");
    check(c.lindblad_backend == "auto" || c.lindblad_backend == "density" || c.lindblad_backend == "trajectories",
          "integrator.lindblad_backend", "expected auto, density or trajectories");

    Block ou(j, "output");
    ou.text("directory", c.output_directory);
    ou.integer("samples", c.samples);
    ou.finish();
    check(c.samples >= 2, "output.samples", "must be >= 2");

    // range checks shared with the sweep harness
    RunOptions probe;
    const std::pair<const char*, double> errs[] = {
        {"delta", c.delta},           {"delta_omega", c.delta_omega_mhz}, {"delta_lambda", c.delta_lambda_mhz},
        {"crosstalk_ratio", c.crosstalk_ratio}, {"gamma_d", c.gamma_d_khz},  {"gamma_r", c.gamma_r_khz},
        {"gamma_kappa", c.gamma_kappa_khz}};
    for (const auto& [name, v] : errs) {
        try {
            apply_parameter(probe, name, v);
        } catch (const ParameterError& e) {
            throw ConfigError(std::string(name) + ": " + e.what());
        }
    }
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(j);
}

json to_json(const Config& c) {
    json j;
    j["system"] = {{"level_freq_ghz", c.system.level_ghz},
                   {"cavity_freq_ghz", c.system.cavity_ghz},
                   {"lambda_mhz", c.system.lambda_mhz},
                   {"Delta_ghz", c.system.Delta_ghz},
                   {"delta_prime_mhz", c.system.delta_prime_mhz}};
    j["protocol"] = {{"N", c.N},
                     {"tau1_us", c.tau1_us},
                     {"T_f_us", c.T_f_us},
                     {"pulse_shape", c.pulse_shape},
                     {"model", c.model},
                     {"truncation", c.truncation},
                     {"A", c.A},
                     {"delta_tilde_offset_mhz", c.delta_tilde_offset_mhz}};
    j["errors"] = {{"delta", c.delta},
                   {"delta_omega_mhz", c.delta_omega_mhz},
                   {"delta_lambda_mhz", c.delta_lambda_mhz},
                   {"crosstalk_ratio", c.crosstalk_ratio}};
    j["decoherence"] = {{"gamma_d_khz", c.gamma_d_khz},
                        {"gamma_r_khz", c.gamma_r_khz},
                        {"gamma_kappa_khz", c.gamma_kappa_khz},
                        {"kappa_phi_hz", c.kappa_phi_hz},
                        {"model", c.decoherence_model}};
    j["integrator"] = {{"rtol", c.rtol},
                       {"atol", c.atol},
                       {"max_step_us", c.max_step_us},
                       {"method", c.method},
                       {"trajectories", c.trajectories},
                       {"seed", c.seed},
                       {"lindblad_backend", c.lindblad_backend}};
    j["output"] = {{"directory", c.output_directory}, {"samples", c.samples}};
    return j;
}

ProtocolParams to_params(const Config& c) {
    return derive_params(c.N, c.system.to_internal(), c.tau1_us, c.T_f_us, c.A, kTwoPi * c.delta_tilde_offset_mhz);
}

RunOptions to_run_options(const Config& c) {
    RunOptions o;
    o.model = parse_model(c.model);
    o.shape = parse_shape(c.pulse_shape);
    apply_parameter(o, "delta", c.delta);
    apply_parameter(o, "delta_omega", c.delta_omega_mhz);
    apply_parameter(o, "delta_lambda", c.delta_lambda_mhz);
    apply_parameter(o, "crosstalk_ratio", c.crosstalk_ratio);
    apply_parameter(o, "gamma_d", c.gamma_d_khz);
    apply_parameter(o, "gamma_r", c.gamma_r_khz);
    apply_parameter(o, "gamma_kappa", c.gamma_kappa_khz);
    o.deco.kappa_phi = kTwoPi * c.kappa_phi_hz * 1e-6;
    o.decoherence_model = parse_model(c.decoherence_model);
    o.integrator.rtol = c.rtol;
    o.integrator.atol = c.atol;
    o.integrator.max_step = c.max_step_us > 0 ? c.max_step_us : std::numeric_limits<double>::infinity();
    o.integrator.method = c.method == "dopri5" ? Method::dopri5 : Method::dop853;
    o.trajectories.trajectories = c.trajectories;
    o.trajectories.seed = c.seed;
    o.lindblad_backend = c.lindblad_backend;
    o.cavity_dim = c.truncation;
    o.samples = c.samples;
    return o;
}

std::string config_hash(const Config& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : to_json(c).dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace noonsim

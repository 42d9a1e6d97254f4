#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "noonsim/protocol.hpp"

namespace noonsim {

// Run configuration in the units a user writes (GHz, MHz, kHz, Hz, us).
struct Config {
    DeviceUnits system;

    int N = 0;
    double tau1_us = 0.01;
    double T_f_us = 15.0;
    std::string pulse_shape = "optimized";
    std::string model = "original";
    int truncation = 0;  // 0 selects the default cavity dimension
    double A = 1.0;
    double delta_tilde_offset_mhz = 0.0;

    double delta = 0.0;
    double delta_omega_mhz = 0.0;
    double delta_lambda_mhz = 0.0;
    double crosstalk_ratio = 0.0;

    double gamma_d_khz = 0.0;
    double gamma_r_khz = 0.0;
    double gamma_kappa_khz = 0.0;
    double kappa_phi_hz = 0.0;
    std::string decoherence_model = "dispersive";

    double rtol = 1e-9;
    double atol = 1e-10;
    double max_step_us = 0.0;  // 0 leaves the step bounded only by the model frequencies
    std::string method = "dop853";
    int trajectories = 64;
    std::uint64_t seed = 12345;
    std::string lindblad_backend = "auto";

    std::string output_directory = "noonsim_out";
    int samples = 301;
};

// Parses and validates; unknown keys and bad values throw ConfigError naming the field.
Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);
// Fully resolved form; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const Config& c);

ProtocolParams to_params(const Config& c);
RunOptions to_run_options(const Config& c);

// FNV-1a over the compact dump of the resolved config.
std::string config_hash(const Config& c);

}  // namespace noonsim

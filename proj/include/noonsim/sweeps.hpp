#pragma once

#include <functional>
#include <string>
#include <vector>

#include "noonsim/protocol.hpp"

namespace noonsim {

// Sweepable quantities and their input units:
//   delta (relative), delta_omega (MHz), delta_lambda (MHz), crosstalk_ratio (lambda12/lambda),
//   gamma_d, gamma_r, gamma_kappa (kHz).
const std::vector<std::string>& sweep_parameters();
// Writes one parameter, given in input units, into the run options.
void apply_parameter(RunOptions& opt, const std::string& name, double value);

// Drive-offset and coupling-drift conversion from the configured MHz figure to rad/us.
double error_mhz_to_rate(double mhz);

struct SweepSpec {
    std::string param;
    double lo = 0.0;
    double hi = 0.0;
    int points = 2;
    ProtocolParams params;
    RunOptions base;
    int jobs = 1;

    std::vector<double> values() const;
    void validate() const;
};

struct SweepRow {
    double value = 0.0;
    double F3 = 0.0;
    bool ok = false;
    std::string error;
    std::vector<std::string> warnings;
    std::string backend;
    IntegratorStats stats;
};

// Grid points run concurrently; rows come back in grid order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

struct ScenarioRow {
    double delta = 0.0;
    double delta_omega_mhz = 0.0;
    double delta_lambda_khz = 0.0;
    double crosstalk_ratio = 0.0;
    double gamma_d_khz = 0.0;
    double gamma_r_khz = 0.0;
    double gamma_kappa_khz = 0.0;
    double F3 = 0.0;  // filled by run_scenarios
    bool ok = false;
    std::string error;
    std::vector<std::string> warnings;
};

// All disturbances of a row are applied together.
std::vector<ScenarioRow> run_scenarios(std::vector<ScenarioRow> rows, const ProtocolParams& params,
                                       const RunOptions& base, int jobs = 1);

// One decay rate swept, all other disturbances as in base.
std::vector<SweepRow> decoherence_sweep(const std::string& rate, double lo, double hi, int points,
                                        const ProtocolParams& params, RunOptions base, Model model, int jobs = 1);

// Runs fn(i) for i in [0, n) on up to jobs threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace noonsim

#pragma once

#include <array>
#include <string>
#include <vector>

#include "noonsim/dynamics.hpp"
#include "noonsim/hamiltonians.hpp"
#include "noonsim/params.hpp"
#include "noonsim/pulses.hpp"

namespace noonsim {

// original: rotating-frame exchange model in every step.
// effective: per-step reduced models (two-level step 1, displacement step 2, resonant step 3).
// hybrid: exchange model for steps 1-2, dispersive model for step 3.
// dispersive: second-order dispersive model in every step.
enum class Model { original, effective, hybrid, dispersive };
enum class StepModel { full, dispersive, reduced };

std::string to_string(Model m);
std::string to_string(PulseShape s);
std::string to_string(StepModel m);
Model parse_model(const std::string& s);
PulseShape parse_shape(const std::string& s);

ProtocolParams derive_params(int N, const SystemParams& sys, double tau1, double Tf, double A = 1.0,
                             double delta_tilde_offset = 0.0);
std::vector<RwaMargin> rwa_report(const ProtocolParams& p, PulseShape shape = PulseShape::pi);

// Step-p target, p in {1, 2, 3}.
Vec target_state(int p, const ProtocolParams& params, const HilbertSpec& spec, bool with_phase = true);

// Drives of step s in {1, 2, 3} for the exchange and dispersive models.
DriveSet step_drives(int s, const ProtocolParams& p, PulseShape shape);
// Two-level amplitudes entering the reduced step-1 and step-3 models.
CoefFn step1_amplitude(const ProtocolParams& p, PulseShape shape, const ErrorModel& err);
CoefFn step3_amplitude(const ProtocolParams& p, PulseShape shape, const ErrorModel& err);

std::array<StepModel, 3> step_models(Model m);
TimeDepOp build_step(int s, StepModel m, const ProtocolParams& p, const HilbertSpec& spec, PulseShape shape,
                     const ErrorModel& err);
// Fastest coefficient frequency of a step model (rad/us).
double fastest_frequency(StepModel m, const ProtocolParams& p, const ErrorModel& err);

// |(E(0,N,0) - E(4,0~,0)) - (N delta' + delta~)| under the static step-3 dispersive Hamiltonian.
double step3_resonance_mismatch(const ProtocolParams& p, const HilbertSpec& spec);
// Peak of the step-3 resonant base shape.
double step3_peak(const ProtocolParams& p, PulseShape shape);

struct RunOptions {
    Model model = Model::original;
    PulseShape shape = PulseShape::optimized;
    ErrorModel errors;
    Decoherence deco;
    // Model used whenever a decay rate is nonzero.
    Model decoherence_model = Model::dispersive;
    IntegratorConfig integrator;  // max_step is further bounded by the model frequencies
    int samples = 301;
    int cavity_dim = 0;  // 0 selects default_truncation(N)
    std::string lindblad_backend = "auto";  // auto, density, trajectories
    int density_limit = 1500;
    TrajectoryConfig trajectories;
    int last_step = 3;  // stop at the end of this step
};

struct SimResult {
    std::vector<double> t;
    std::vector<std::array<double, 3>> F;
    std::vector<std::array<double, 5>> pop;
    std::vector<std::array<double, 2>> nbar;
    std::vector<double> leakage;

    std::array<double, 3> boundaries{};                  // tau1, tau2, tau3
    std::array<std::array<double, 3>, 3> boundary_F{};   // [boundary][p]
    std::array<double, 3> F_final{};                     // F_p(tau_p), 0 for steps not run

    ProtocolParams params;
    Model model = Model::original;
    std::array<StepModel, 3> steps{};
    std::string backend;
    int cavity_dim = 0;
    IntegratorStats stats;
    double norm_drift = 0.0;
    double trace_drift = 0.0;
    double max_leakage = 0.0;
    bool leakage_flag = false;
    double no_jump_probability = 1.0;
    int trajectories = 0;
    double truncation_tail = 0.0;
    std::vector<std::string> warnings;
    Vec final_state;
};

SimResult run_protocol(const ProtocolParams& p, const RunOptions& opt);

}  // namespace noonsim

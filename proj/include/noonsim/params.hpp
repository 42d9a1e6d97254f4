#pragma once

#include <array>
#include <string>
#include <vector>

namespace noonsim {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Physical constants in internal units (rad/us). The two qudit-cavity
// couplings are symmetric, so one value serves both cavities.
struct SystemParams {
    std::array<double, 5> level_freq{};   // omega_j
    std::array<double, 2> cavity_freq{};  // omega_1, omega_2
    double lambda = 0.0;                  // lambda_k
    double Delta = 0.0;                   // Delta_k
    double delta_p = 0.0;                 // delta' = delta_1 = delta_2

    // Inter-cavity detuning |omega_1 - omega_2|.
    double crosstalk_detuning() const;
    // Reference device for N in {2, 3, 4}; other N use the N = 4 device.
    static SystemParams defaults(int N);
};

// Device constants in laboratory units (frequencies divided by 2 pi).
struct DeviceUnits {
    std::array<double, 5> level_ghz{0.0, 3.0, 5.0, 15.0, 20.0};
    std::array<double, 2> cavity_ghz{11.0346, 4.0346};
    double lambda_mhz = 130.00;
    double Delta_ghz = 5.96;
    double delta_prime_mhz = -0.67;

    static DeviceUnits defaults(int N);
    SystemParams to_internal() const;
};

// Systematic errors, already converted to internal units.
struct ErrorModel {
    double delta = 0.0;            // relative error on the resonant drives
    double delta_omega = 0.0;      // additive offset on Omega_1, Omega_2 (rad/us)
    double delta_lambda = 0.0;     // additive coupling drift (rad/us)
    double crosstalk_ratio = 0.0;  // lambda_12 / lambda_k

    bool any() const { return delta != 0 || delta_omega != 0 || delta_lambda != 0 || crosstalk_ratio != 0; }
};

// Linear decay rates in 1/us.
struct Decoherence {
    double gamma_d = 0.0;
    double gamma_r = 0.0;
    double gamma_kappa = 0.0;
    double kappa_phi = 0.0;  // rad/us, only used by the dressed-rate formulas

    bool any() const { return gamma_d > 0 || gamma_r > 0 || gamma_kappa > 0; }
};

struct RwaMargin {
    std::string name;
    double value = 0.0;
    bool warn = false;
};

struct ProtocolParams {
    int N = 4;
    SystemParams sys;
    double alpha0 = 0.0;
    double delta0 = 0.0;       // lambda^2 / Delta
    double omega_s2 = 0.0;     // delta0 + delta'
    double tau1 = 0.01;
    double T2 = 0.0;           // step-2 duration 2 pi / omega_s2
    double tau2 = 0.0;
    double tau3 = 15.0;
    double omega_s2_amp = 0.0; // Omega_s2
    double omega_p3 = 0.0;     // Omega'_s3
    double delta_tilde = 0.0;  // as derived, before any override offset
    double delta_tilde_offset = 0.0;
    double eps_n0 = 0.0;
    double theta_s2 = 0.0;
    double A = 1.0;
    std::vector<RwaMargin> margins;

    double delta_tilde_used() const { return delta_tilde + delta_tilde_offset; }
    double step3_modulation() const { return N * sys.delta_p + delta_tilde_used(); }
};

}  // namespace noonsim

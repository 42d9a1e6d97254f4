#pragma once

#include <vector>

#include "noonsim/hilbert.hpp"

namespace noonsim {

enum class PulseShape { pi, optimized };

// Invariant angles for the optimized pulse on [0, tau].
double theta(double t, double tau);
double theta_dot(double t, double tau);
double beta(double th, double A = 1.0);
double lr_phase(double t, double tau, double A = 1.0);
double sensitivity_q(double A);

// Two-level amplitude Omega = Re + i Im for the drive Re*sx + Im*sy.
cplx optimized_envelope(double t, double tau, double A = 1.0);
cplx pi_envelope(double tau);
cplx step2_envelope(double t, double omega_s2_amp, double omega_s2);

// A time-windowed complex drive amplitude; zero outside [t0, t0 + tau].
struct Envelope {
    enum class Kind { zero, constant_pi, optimized_sta, step2_drive, step3_resonant, step3_off_resonant };

    Kind kind = Kind::zero;
    double t0 = 0.0;
    double tau = 0.0;
    double A = 1.0;
    cplx value = 0.0;      // constant amplitude (pi, off-resonant, step-2 prefactor)
    double omega = 0.0;    // modulation frequency
    double t_ref = 0.0;    // phase reference time for the modulation
    double scale = 1.0;    // 1/eps for the step-3 resonant drive
    PulseShape shape = PulseShape::pi;
    bool conj_shape = false;  // lab coefficient is conj(Omega) of the two-level design

    cplx operator()(double t) const;
    bool active(double t) const { return kind != Kind::zero && t >= t0 && t <= t0 + tau; }

    static Envelope zero();
    static Envelope constant_pi(double t0, double tau);
    static Envelope optimized(double t0, double tau, double A, bool conj_shape);
    static Envelope step2(double t0, double tau, double amp, double omega_s2);
    static Envelope step3_resonant(double t0, double tau, PulseShape shape, double A, double mod_freq,
                                   double eps_n0, bool conj_shape);
    static Envelope step3_off_resonant(double t0, double tau, double amp);
};

cplx step3_resonant_envelope(double t, double tau2, double tau3, int N, double delta_p, double delta_tilde,
                             double eps_n0, PulseShape shape, double A = 1.0);

// max_t |i dI/dt - [H, I]| with H built from `scale` times the designed pulse.
double invariant_residual(const std::vector<double>& grid, double tau, double A = 1.0, double scale = 1.0);

// Transfer |xi1> -> |xi2> under (1 + delta)(Re sx + Im sy); returns |<xi2|psi(tau)>|.
double two_level_transfer(PulseShape shape, double delta, double tau = 1.0, double A = 1.0,
                          double rtol = 1e-11, double atol = 1e-13);

}  // namespace noonsim

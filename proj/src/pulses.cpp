#include "noonsim/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "noonsim/integrator.hpp"

namespace noonsim {

namespace {

constexpr double pi = std::numbers::pi;
constexpr cplx I1{0.0, 1.0};

double clamp_time(double t, double tau) {
    const double slack = 1e-12 * std::max(1.0, tau);
    if (!(tau > 0)) throw DomainError("pulse duration must be positive");
    if (t < -slack || t > tau + slack)
        throw DomainError("time " + std::to_string(t) + " outside pulse window [0, " + std::to_string(tau) + "]");
    return std::clamp(t, 0.0, tau);
}

using Mat2 = Eigen::Matrix2cd;

Mat2 sigma_x() { return (Mat2() << 0, 1, 1, 0).finished(); }
Mat2 sigma_y() { return (Mat2() << 0, -I1, I1, 0).finished(); }
Mat2 sigma_z() { return (Mat2() << 1, 0, 0, -1).finished(); }

}  // namespace

double theta(double t, double tau) {
    t = clamp_time(t, tau);
    const double s = std::sin(pi * t / (2 * tau));
    return pi * s * s;
}

double theta_dot(double t, double tau) {
    t = clamp_time(t, tau);
    return pi * pi / (2 * tau) * std::sin(pi * t / tau);
}

double beta(double th, double A) {
    const double s = std::sin(th);
    return 4.0 * A / 3.0 * s * s * s;
}

double lr_phase(double t, double tau, double A) {
    const double th = theta(t, tau);
    return A * (2 * th - std::sin(2 * th));
}

double sensitivity_q(double A) {
    if (A == 0.0) throw DomainError("sensitivity Q undefined at A = 0");
    const double s = std::sin(A * pi);
    // sin(k*pi) is not exactly zero in floating point; integers are exact zeros
    if (A == std::round(A)) return 0.0;
    return s * s / (A * A);
}

cplx optimized_envelope(double t, double tau, double A) {
    const double th = theta(t, tau);
    const double thd = theta_dot(t, tau);
    const double s3 = std::pow(std::sin(th), 3);
    const double b = beta(th, A);
    const double re = thd / 2 * (4 * A * std::sin(b) * s3 - std::cos(b));
    const double im = thd / 2 * (4 * A * std::cos(b) * s3 + std::sin(b));
    return {re, im};
}

cplx pi_envelope(double tau) {
    if (!(tau > 0)) throw DomainError("pi pulse duration must be positive");
    return -I1 * pi / (2 * tau);
}

cplx step2_envelope(double t, double omega_s2_amp, double omega_s2) {
    return I1 * omega_s2_amp * std::exp(-I1 * (omega_s2 * t));
}

cplx step3_resonant_envelope(double t, double tau2, double tau3, int N, double delta_p, double delta_tilde,
                             double eps_n0, PulseShape shape, double A) {
    if (!(eps_n0 > 0)) throw ParameterError("expansion coefficient eps_{N,0} must be positive");
    if (t < tau2 || t > tau3) return 0.0;
    const double T = tau3 - tau2;
    const cplx base = shape == PulseShape::pi ? I1 * pi / (2 * T) : optimized_envelope(t - tau2, T, A);
    return base * std::exp(-I1 * ((N * delta_p + delta_tilde) * t)) / eps_n0;
}

cplx Envelope::operator()(double t) const {
    if (!active(t)) return 0.0;
    switch (kind) {
        case Kind::zero: return 0.0;
        case Kind::constant_pi:
        case Kind::step3_off_resonant: return value;
        case Kind::optimized_sta: {
            const cplx w = optimized_envelope(std::clamp(t - t0, 0.0, tau), tau, A);
            return scale * (conj_shape ? std::conj(w) : w);
        }
        case Kind::step2_drive: return value * std::exp(-I1 * (omega * (t - t_ref)));
        case Kind::step3_resonant: {
            cplx base = value;
            if (shape == PulseShape::optimized) {
                const cplx w = optimized_envelope(std::clamp(t - t0, 0.0, tau), tau, A);
                base = conj_shape ? std::conj(w) : w;
            }
            return base * std::exp(-I1 * (omega * t)) * scale;
        }
    }
    return 0.0;
}

Envelope Envelope::zero() { return {}; }

Envelope Envelope::constant_pi(double t0, double tau) {
    Envelope e;
    e.kind = Kind::constant_pi;
    e.t0 = t0;
    e.tau = tau;
    e.value = pi_envelope(tau);
    return e;
}

Envelope Envelope::optimized(double t0, double tau, double A, bool conj_shape) {
    if (!(tau > 0)) throw DomainError("pulse duration must be positive");
    Envelope e;
    e.kind = Kind::optimized_sta;
    e.t0 = t0;
    e.tau = tau;
    e.A = A;
    e.shape = PulseShape::optimized;
    e.conj_shape = conj_shape;
    return e;
}

Envelope Envelope::step2(double t0, double tau, double amp, double omega_s2) {
    Envelope e;
    e.kind = Kind::step2_drive;
    e.t0 = t0;
    e.tau = tau;
    e.value = I1 * amp;
    e.omega = omega_s2;
    e.t_ref = t0;
    return e;
}

Envelope Envelope::step3_resonant(double t0, double tau, PulseShape shape, double A, double mod_freq,
                                  double eps_n0, bool conj_shape) {
    if (!(eps_n0 > 0)) throw ParameterError("expansion coefficient eps_{N,0} must be positive");
    if (!(tau > 0)) throw DomainError("pulse duration must be positive");
    Envelope e;
    e.kind = Kind::step3_resonant;
    e.t0 = t0;
    e.tau = tau;
    e.A = A;
    e.shape = shape;
    e.value = I1 * pi / (2 * tau);
    e.omega = mod_freq;
    e.scale = 1.0 / eps_n0;
    e.conj_shape = conj_shape;
    return e;
}

Envelope Envelope::step3_off_resonant(double t0, double tau, double amp) {
    Envelope e;
    e.kind = Kind::step3_off_resonant;
    e.t0 = t0;
    e.tau = tau;
    e.value = amp;
    return e;
}

double invariant_residual(const std::vector<double>& grid, double tau, double A, double scale) {
    const Mat2 sx = sigma_x(), sy = sigma_y(), sz = sigma_z();
    double worst = 0.0;
    for (double t : grid) {
        const double th = theta(t, tau), thd = theta_dot(t, tau);
        const double b = beta(th, A);
        const double bd = 4 * A * std::pow(std::sin(th), 2) * std::cos(th) * thd;
        const double st = std::sin(th), ct = std::cos(th), sb = std::sin(b), cb = std::cos(b);
        const Mat2 inv = st * sb * sx + st * cb * sy + ct * sz;
        const Mat2 dinv = thd * (ct * sb * sx + ct * cb * sy - st * sz) + bd * st * (cb * sx - sb * sy);
        const cplx w = scale * optimized_envelope(t, tau, A);
        const Mat2 h = w.real() * sx + w.imag() * sy;
        const Mat2 r = I1 * dinv - (h * inv - inv * h);
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
}

double two_level_transfer(PulseShape shape, double delta, double tau, double A, double rtol, double atol) {
    if (delta < -0.5 || delta > 0.5) throw DomainError("error rate delta outside [-0.5, 0.5]");
    auto omega = [&](double t) { return shape == PulseShape::pi ? pi_envelope(tau) : optimized_envelope(t, tau, A); };
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = atol;
    cfg.max_step = tau / 50;
    AdaptiveRK<Eigen::Vector2cd> rk(
        [&](double t, const Eigen::Vector2cd& y, Eigen::Vector2cd& dy) {
            const cplx w = (1 + delta) * omega(std::clamp(t, 0.0, tau));
            // H = Re sx + Im sy = [[0, conj(w)], [w, 0]]
            dy(0) = -I1 * std::conj(w) * y(1);
            dy(1) = -I1 * w * y(0);
        },
        cfg);
    Eigen::Vector2cd psi(1.0, 0.0);
    double t = 0.0;
    rk.integrate(t, psi, tau);
    return std::abs(psi(1));
}

}  // namespace noonsim

#include "noonsim/validate.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace noonsim {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

template <class Fn>
Check run_check(const std::string& name, Fn&& fn) {
    Check c{name, false, ""};
    try {
        fn(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail = e.what();
    }
    return c;
}

}  // namespace

std::vector<Check> validation_suite(const Config& cfg) {
    std::vector<Check> out;
    const ProtocolParams p = to_params(cfg);
    const RunOptions base = to_run_options(cfg);
    const int d = cfg.truncation > 0 ? cfg.truncation : default_truncation(cfg.N);

    out.push_back(run_check("truncation_adequacy", [&](Check& c) {
        const double tail = coherent_tail(p.alpha0, d);
        c.detail = "d = " + std::to_string(d) + ", coherent tail " + fmt(tail);
        check_truncation(p.alpha0, d);
        c.ok = true;
    }));

    out.push_back(run_check("step3_resonance", [&](Check& c) {
        const double mis = step3_resonance_mismatch(p, HilbertSpec(d));
        const double tol = 0.01 * step3_peak(p, base.shape);
        c.detail = "mismatch " + fmt(mis) + " rad/us, tolerance " + fmt(tol);
        c.ok = mis <= tol;
    }));

    out.push_back(run_check("effective_model_exact", [&](Check& c) {
        RunOptions o = base;
        o.model = Model::effective;
        o.errors = {};
        o.deco = {};
        o.samples = 2;
        o.cavity_dim = d;
        const SimResult r = run_protocol(p, o);
        c.detail = "F1 " + fmt(r.F_final[0]) + ", F2 " + fmt(r.F_final[1]) + ", F3 " + fmt(r.F_final[2]);
        c.ok = r.F_final[0] >= 1 - 1e-6 && r.F_final[1] >= 1 - 1e-6 && r.F_final[2] >= 1 - 1e-6;
    }));

    out.push_back(run_check("operator_algebra", [&](Check& c) {
        const Mat a = to_dense(annihilation(d));
        const Mat comm = a * a.adjoint() - a.adjoint() * a;
        const double ccr = max_abs(comm.topLeftCorner(d - 1, d - 1) - Mat::Identity(d - 1, d - 1));
        const Mat D = displacement(p.alpha0, 40);
        const double unit = max_abs(D.adjoint() * D - Mat::Identity(40, 40));
        const Vec coh = coherent_state(p.alpha0, 60);
        const double nbar = expectation(number_op(60), coh).real();
        c.detail = "commutator " + fmt(ccr) + ", D unitarity " + fmt(unit) + ", <n> - N " + fmt(nbar - cfg.N);
        c.ok = ccr < 1e-12 && unit < 1e-8 && std::abs(nbar - cfg.N) < 1e-6;
    }));

    out.push_back(run_check("invariant_residual", [&](Check& c) {
        std::vector<double> grid;
        for (int i = 0; i <= 200; ++i) grid.push_back(i / 200.0);
        const double r = invariant_residual(grid, 1.0, p.A);
        c.detail = "max residual " + fmt(r);
        c.ok = r < 1e-8;
    }));

    out.push_back(run_check("sensitivity_zeros", [&](Check& c) {
        const double q1 = sensitivity_q(1.0), q2 = sensitivity_q(2.0);
        const double ratio = (1 - two_level_transfer(PulseShape::optimized, 0.2)) /
                             (1 - two_level_transfer(PulseShape::optimized, 0.1));
        c.detail = "Q(1) " + fmt(q1) + ", Q(2) " + fmt(q2) + ", infidelity ratio 0.2/0.1 " + fmt(ratio);
        c.ok = q1 == 0.0 && q2 == 0.0 && ratio >= 8 && ratio <= 32;
    }));

    // |delta| = 0.1 must stay above 0.999; at 0.2 the optimized pulse must beat the pi pulse tenfold
    out.push_back(run_check("pulse_robustness", [&](Check& c) {
        double near = 1.0, far = 1.0;
        for (double dl : {-0.1, 0.1}) near = std::min(near, two_level_transfer(PulseShape::optimized, dl));
        for (double dl : {-0.2, 0.2}) far = std::min(far, two_level_transfer(PulseShape::optimized, dl));
        const double pi02 = two_level_transfer(PulseShape::pi, 0.2);
        const double ref = std::cos(0.1 * std::numbers::pi);
        c.detail = "optimized worst " + fmt(near) + " (|delta| 0.1), " + fmt(far) + " (|delta| 0.2); pi at 0.2 " +
                   fmt(pi02) + " vs cos(0.1 pi) " + fmt(ref);
        c.ok = near >= 0.999 && (1 - far) < 0.1 * (1 - pi02) && std::abs(pi02 - ref) < 1e-4;
    }));
    return out;
}

}  // namespace noonsim

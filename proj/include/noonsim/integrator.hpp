#pragma once

// Adaptive embedded Runge-Kutta pairs (Dormand-Prince 5(4) and 8(5,3)) for
// complex Eigen states, vectors or matrices alike.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "noonsim/errors.hpp"

namespace noonsim {

enum class Method { dopri5, dop853 };

struct IntegratorConfig {
    double rtol = 1e-9;
    double atol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    Method method = Method::dop853;
    long max_steps = 200'000'000;
};

struct IntegratorStats {
    long steps = 0;
    long rejected = 0;
    long rhs_evals = 0;

    IntegratorStats& operator+=(const IntegratorStats& o) {
        steps += o.steps;
        rejected += o.rejected;
        rhs_evals += o.rhs_evals;
        return *this;
    }
};

namespace rk {

// Dormand-Prince 5(4)
namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp5

// Dormand-Prince 8(5,3), Hairer's DOP853 tableau
namespace dp8 {
inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;
}  // namespace dp8

}  // namespace rk

template <class State>
class AdaptiveRK {
public:
    using Rhs = std::function<void(double, const State&, State&)>;
    // Called after each accepted step with the new state; returning true
    // rolls the step back and stops integration.
    using StopFn = std::function<bool(double, const State&)>;

    AdaptiveRK(Rhs f, IntegratorConfig cfg) : f_(std::move(f)), cfg_(cfg) {
        if (!(cfg_.rtol > 0) || !(cfg_.atol > 0)) throw ParameterError("integrator tolerances must be positive");
        if (!(cfg_.max_step > 0)) throw ParameterError("integrator max_step must be positive");
    }

    const IntegratorStats& stats() const { return stats_; }
    const IntegratorConfig& config() const { return cfg_; }
    double last_step() const { return last_h_; }
    int order() const { return cfg_.method == Method::dop853 ? 8 : 5; }

    // Forget the cached derivative; required after the state is modified externally.
    void reset() { have_k1_ = false; }

    // Advance (t, y) to t_end. Returns false if `stop` fired; then (t, y) is the
    // start of the rejected step and last_step() its length.
    bool integrate(double& t, State& y, double t_end, const StopFn& stop = {}) {
        if (t_end < t) throw DomainError("integrate: t_end before t");
        if (t_end == t) return true;
        ensure_workspace(y);
        if (!have_k1_ || k1_t_ != t) {
            eval(t, y, k1_);
            k1_t_ = t;
            have_k1_ = true;
        }
        if (h_ <= 0) h_ = initial_step(t, y, t_end);
        const double span = t_end - t;
        bool last_rejected = false;
        long n = 0;
        while (t < t_end) {
            if (++n > cfg_.max_steps) throw StiffnessError(diagnostic("step budget exhausted", t));
            double h = std::min({h_, cfg_.max_step, t_end - t});
            bool hit_end = false;
            if (t + h >= t_end || t_end - (t + h) < 1e-12 * span) {
                h = t_end - t;
                hit_end = true;
            }
            if (h < 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
                throw StiffnessError(diagnostic("step size underflow", t));
            const double err = attempt(t, y, h);
            if (!(err <= 1.0)) {
                ++stats_.rejected;
                const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -1.0 / order())) : 0.2;
                h_ = h * fac;
                last_rejected = true;
                continue;
            }
            const double t_new = hit_end ? t_end : t + h;
            if (stop && stop(t_new, ynew_)) {
                last_h_ = h;
                h_ = h;
                return false;
            }
            ++stats_.steps;
            double fac = err == 0.0 ? 6.0 : 0.9 * std::pow(err, -1.0 / order());
            fac = std::clamp(fac, 0.333, 6.0);
            if (last_rejected) fac = std::min(fac, 1.0);
            // keep the proposal from the bounded step, not from a truncated end step
            if (!hit_end || h >= h_) h_ = h * fac;
            last_rejected = false;
            last_h_ = h;
            t = t_new;
            y.swap(ynew_);
            k1_.swap(knew_);
            k1_t_ = t;
        }
        return true;
    }

    // One uncontrolled step of length h from (t, y), used for event location.
    void fixed_step(double t, const State& y, double h, State& out) {
        ensure_workspace(y);
        State k1 = y;
        eval(t, y, k1);
        State saved = k1_;
        k1_ = k1;
        attempt(t, y, h);
        out = ynew_;
        k1_ = saved;
    }

private:
    void eval(double t, const State& y, State& dy) {
        f_(t, y, dy);
        ++stats_.rhs_evals;
    }

    void ensure_workspace(const State& y) {
        if (ws_rows_ == y.rows() && ws_cols_ == y.cols()) return;
        ws_rows_ = y.rows();
        ws_cols_ = y.cols();
        for (State* s : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &k8_, &k9_, &k10_, &k11_, &k12_, &knew_,
                         &yw_, &ynew_})
            s->resize(y.rows(), y.cols());
        have_k1_ = false;
    }

    double error_norm(const State& e, const State& y0, const State& y1) const {
        const auto sc = cfg_.atol + cfg_.rtol * y0.array().abs().max(y1.array().abs());
        return std::sqrt((e.array().abs() / sc).square().mean());
    }

    double initial_step(double t, const State& y, double t_end) const {
        const auto sc = cfg_.atol + cfg_.rtol * y.array().abs();
        const double d0 = std::sqrt((y.array().abs() / sc).square().mean());
        const double d1 = std::sqrt((k1_.array().abs() / sc).square().mean());
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min({h, cfg_.max_step, t_end - t});
    }

    // Computes ynew_ and knew_ = f(t+h, ynew_); returns the scaled error.
    double attempt(double t, const State& y, double h) {
        return cfg_.method == Method::dop853 ? attempt8(t, y, h) : attempt5(t, y, h);
    }

    double attempt5(double t, const State& y, double h) {
        using namespace rk::dp5;
        yw_ = y + h * (a21 * k1_);
        eval(t + c2 * h, yw_, k2_);
        yw_ = y + h * (a31 * k1_ + a32 * k2_);
        eval(t + c3 * h, yw_, k3_);
        yw_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        eval(t + c4 * h, yw_, k4_);
        yw_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        eval(t + c5 * h, yw_, k5_);
        yw_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        eval(t + h, yw_, k6_);
        ynew_ = y + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
        eval(t + h, ynew_, knew_);
        yw_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * knew_);
        return error_norm(yw_, y, ynew_);
    }

    double attempt8(double t, const State& y, double h) {
        using namespace rk::dp8;
        yw_ = y + h * (a21 * k1_);
        eval(t + c2 * h, yw_, k2_);
        yw_ = y + h * (a31 * k1_ + a32 * k2_);
        eval(t + c3 * h, yw_, k3_);
        yw_ = y + h * (a41 * k1_ + a43 * k3_);
        eval(t + c4 * h, yw_, k4_);
        yw_ = y + h * (a51 * k1_ + a53 * k3_ + a54 * k4_);
        eval(t + c5 * h, yw_, k5_);
        yw_ = y + h * (a61 * k1_ + a64 * k4_ + a65 * k5_);
        eval(t + c6 * h, yw_, k6_);
        yw_ = y + h * (a71 * k1_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
        eval(t + c7 * h, yw_, k7_);
        yw_ = y + h * (a81 * k1_ + a84 * k4_ + a85 * k5_ + a86 * k6_ + a87 * k7_);
        eval(t + c8 * h, yw_, k8_);
        yw_ = y + h * (a91 * k1_ + a94 * k4_ + a95 * k5_ + a96 * k6_ + a97 * k7_ + a98 * k8_);
        eval(t + c9 * h, yw_, k9_);
        yw_ = y + h * (a101 * k1_ + a104 * k4_ + a105 * k5_ + a106 * k6_ + a107 * k7_ + a108 * k8_ + a109 * k9_);
        eval(t + c10 * h, yw_, k10_);
        yw_ = y + h * (a111 * k1_ + a114 * k4_ + a115 * k5_ + a116 * k6_ + a117 * k7_ + a118 * k8_ + a119 * k9_ +
                       a1110 * k10_);
        eval(t + c11 * h, yw_, k11_);
        yw_ = y + h * (a121 * k1_ + a124 * k4_ + a125 * k5_ + a126 * k6_ + a127 * k7_ + a128 * k8_ + a129 * k9_ +
                       a1210 * k10_ + a1211 * k11_);
        eval(t + h, yw_, k12_);
        // k4_ reused as the weighted slope
        k4_ = b1 * k1_ + b6 * k6_ + b7 * k7_ + b8 * k8_ + b9 * k9_ + b10 * k10_ + b11 * k11_ + b12 * k12_;
        ynew_ = y + h * k4_;
        const auto sc = cfg_.atol + cfg_.rtol * y.array().abs().max(ynew_.array().abs());
        yw_ = k4_ - bhh1 * k1_ - bhh2 * k9_ - bhh3 * k12_;
        const double err3 = (yw_.array().abs() / sc).square().sum();
        yw_ = er1 * k1_ + er6 * k6_ + er7 * k7_ + er8 * k8_ + er9 * k9_ + er10 * k10_ + er11 * k11_ + er12 * k12_;
        const double err5 = (yw_.array().abs() / sc).square().sum();
        eval(t + h, ynew_, knew_);
        double deno = err5 + 0.01 * err3;
        if (deno <= 0.0) deno = 1.0;
        return std::abs(h) * err5 * std::sqrt(1.0 / (static_cast<double>(y.size()) * deno));
    }

    std::string diagnostic(const char* what, double t) const {
        std::ostringstream os;
        os << what << " at t=" << t << " us (h=" << h_ << ", steps=" << stats_.steps
           << ", rejected=" << stats_.rejected << ", rtol=" << cfg_.rtol << ", atol=" << cfg_.atol << ")";
        return os.str();
    }

    Rhs f_;
    IntegratorConfig cfg_;
    IntegratorStats stats_;
    double h_ = 0.0;
    double last_h_ = 0.0;
    bool have_k1_ = false;
    double k1_t_ = 0.0;
    Eigen::Index ws_rows_ = -1, ws_cols_ = -1;
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_, k8_, k9_, k10_, k11_, k12_, knew_, yw_, ynew_;
};

}  // namespace noonsim

#include "noonsim/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace noonsim {

namespace {

constexpr cplx I1{0.0, 1.0};

}  // namespace

double SystemParams::crosstalk_detuning() const { return std::abs(cavity_freq[0] - cavity_freq[1]); }

SystemParams SystemParams::defaults(int N) { return DeviceUnits::defaults(N).to_internal(); }

DeviceUnits DeviceUnits::defaults(int N) {
    DeviceUnits u;
    switch (N) {
        case 2: u.Delta_ghz = 5.00, u.lambda_mhz = 141.42; break;
        case 3: u.Delta_ghz = 7.50, u.lambda_mhz = 173.48; break;
        default: u.Delta_ghz = 5.96, u.lambda_mhz = 130.00; break;
    }
    return u;
}

SystemParams DeviceUnits::to_internal() const {
    SystemParams s;
    for (int j = 0; j < 5; ++j) s.level_freq[j] = kTwoPi * 1e3 * level_ghz[j];
    for (int k = 0; k < 2; ++k) s.cavity_freq[k] = kTwoPi * 1e3 * cavity_ghz[k];
    s.lambda = kTwoPi * lambda_mhz;
    s.Delta = kTwoPi * 1e3 * Delta_ghz;
    s.delta_p = kTwoPi * delta_prime_mhz;
    return s;
}

std::string to_string(Model m) {
    switch (m) {
        case Model::original: return "original";
        case Model::effective: return "effective";
        case Model::hybrid: return "hybrid";
        case Model::dispersive: return "dispersive";
    }
    return "?";
}

std::string to_string(PulseShape s) { return s == PulseShape::pi ? "pi" : "optimized"; }

std::string to_string(StepModel m) {
    switch (m) {
        case StepModel::full: return "full";
        case StepModel::dispersive: return "dispersive";
        case StepModel::reduced: return "reduced";
    }
    return "?";
}

Model parse_model(const std::string& s) {
    if (s == "original") return Model::original;
    if (s == "effective") return Model::effective;
    if (s == "hybrid") return Model::hybrid;
    if (s == "dispersive") return Model::dispersive;
    throw ConfigError("unknown model '" + s + "' (expected original, effective, hybrid or dispersive)");
}

PulseShape parse_shape(const std::string& s) {
    if (s == "pi") return PulseShape::pi;
    if (s == "optimized") return PulseShape::optimized;
    throw ConfigError("unknown pulse shape '" + s + "' (expected pi or optimized)");
}

ProtocolParams derive_params(int N, const SystemParams& sys, double tau1, double Tf, double A, double offset) {
    if (N < 1) throw ParameterError("photon number N must be >= 1");
    if (!(sys.lambda > 0) || sys.Delta == 0.0) throw ParameterError("need lambda > 0 and Delta != 0");
    if (!(tau1 > 0)) throw ParameterError("step-1 duration tau1 must be positive");
    if (std::abs(sys.Delta / sys.lambda) < 10)
        throw ParameterError("large-detuning condition violated: Delta/lambda = " + std::to_string(sys.Delta / sys.lambda));
    ProtocolParams p;
    p.N = N;
    p.sys = sys;
    p.A = A;
    p.alpha0 = std::sqrt(static_cast<double>(N));
    p.delta0 = sys.lambda * sys.lambda / sys.Delta;
    p.omega_s2 = p.delta0 + sys.delta_p;
    if (!(p.omega_s2 > 0))
        throw ParameterError("omega_s2 = delta0 + delta' must be positive, got " + std::to_string(p.omega_s2));
    p.tau1 = tau1;
    p.T2 = kTwoPi / p.omega_s2;
    p.tau2 = tau1 + p.T2;
    p.tau3 = Tf;
    if (p.tau2 >= Tf)
        throw ScheduleError("step 2 ends at " + std::to_string(p.tau2) + " us, not before T_f = " + std::to_string(Tf));
    p.omega_s2_amp = p.alpha0 * sys.Delta / (sys.lambda * p.T2);
    p.omega_p3 = -p.omega_s2 * p.alpha0 * sys.Delta / sys.lambda;
    p.delta_tilde = N * p.omega_s2 - p.omega_p3 * p.omega_p3 / sys.Delta - p.delta0;
    p.delta_tilde_offset = offset;
    const double n = N;
    p.eps_n0 = std::exp(n / 2 * std::log(n / std::numbers::e) - 0.5 * std::lgamma(n + 1));
    p.theta_s2 = (sys.lambda * sys.lambda + p.omega_s2_amp * p.omega_s2_amp) * p.T2 / sys.Delta;
    p.margins = rwa_report(p);
    return p;
}

double step3_peak(const ProtocolParams& p, PulseShape shape) {
    const double T = p.tau3 - p.tau2;
    if (shape == PulseShape::pi) return std::numbers::pi / (2 * T);
    double peak = 0.0;
    for (int i = 0; i <= 2000; ++i) peak = std::max(peak, std::abs(optimized_envelope(T * i / 2000.0, T, p.A)));
    return peak;
}

std::vector<RwaMargin> rwa_report(const ProtocolParams& p, PulseShape shape) {
    double s1 = std::numbers::pi / (2 * p.tau1);
    if (shape == PulseShape::optimized) {
        s1 = 0.0;
        for (int i = 0; i <= 2000; ++i) s1 = std::max(s1, std::abs(optimized_envelope(p.tau1 * i / 2000.0, p.tau1, p.A)));
    }
    const double s3 = step3_peak(p, shape) / p.eps_n0;
    std::vector<RwaMargin> m{
        {"peak_Omega_s1/(lambda^2/Delta)", s1 / p.delta0},
        {"omega_s2/peak_Omega_s3", p.omega_s2 / s3},
        {"|delta'|/peak_Omega_s3", std::abs(p.sys.delta_p) / s3},
        {"Delta/lambda", std::abs(p.sys.Delta / p.sys.lambda)},
        {"Delta/Omega_s2", std::abs(p.sys.Delta / p.omega_s2_amp)},
    };
    for (auto& r : m) r.warn = r.value < 10;
    if (m[3].value < 20) m[3].warn = true;
    return m;
}

Vec target_state(int p, const ProtocolParams& prm, const HilbertSpec& spec, bool with_phase) {
    const double r = 1.0 / std::sqrt(2.0);
    switch (p) {
        case 1: return r * (basis_state(spec, 3, 0, 0) + basis_state(spec, 4, 0, 0));
        case 2: {
            check_truncation(prm.alpha0, spec.d);
            const Vec c = coherent_state(prm.alpha0, spec.d);
            const Vec vac = Vec::Unit(spec.d, 0);
            const cplx ph = with_phase ? std::exp(I1 * prm.theta_s2) : cplx(1.0);
            return ph * r * (product_state(spec, 3, vac, c) + product_state(spec, 4, c, vac));
        }
        case 3: {
            if (prm.N >= spec.d) throw TruncationError("cavity truncation cannot hold N photons");
            const cplx ph = with_phase ? std::exp(I1 * (prm.theta_s2 + 4 * prm.sys.delta_p * prm.tau3)) : cplx(1.0);
            return ph * r * (basis_state(spec, 0, prm.N, 0) + basis_state(spec, 0, 0, prm.N));
        }
        default: throw DomainError("target step must be 1, 2 or 3");
    }
}

DriveSet step_drives(int s, const ProtocolParams& p, PulseShape shape) {
    DriveSet d;
    const double r = 1.0 / std::sqrt(2.0);
    switch (s) {
        case 1: {
            Envelope e = shape == PulseShape::pi ? Envelope::constant_pi(0.0, p.tau1) : Envelope::optimized(0.0, p.tau1, p.A, true);
            if (shape == PulseShape::pi) e.value *= r;
            else e.scale = r;
            d.res03 = d.res04 = e;
            break;
        }
        case 2: d.om1 = d.om2 = Envelope::step2(p.tau1, p.T2, p.omega_s2_amp, p.omega_s2); break;
        case 3: {
            const double T = p.tau3 - p.tau2;
            d.res03 = d.res04 = Envelope::step3_resonant(p.tau2, T, shape, p.A, p.step3_modulation(), p.eps_n0, true);
            d.om1 = d.om2 = Envelope::step3_off_resonant(p.tau2, T, p.omega_p3);
            break;
        }
        default: throw DomainError("step must be 1, 2 or 3");
    }
    return d;
}

CoefFn step1_amplitude(const ProtocolParams& p, PulseShape shape, const ErrorModel& err) {
    const Envelope e = shape == PulseShape::pi ? Envelope::constant_pi(0.0, p.tau1) : Envelope::optimized(0.0, p.tau1, p.A, true);
    return resonant_coef(e, err);
}

CoefFn step3_amplitude(const ProtocolParams& p, PulseShape shape, const ErrorModel& err) {
    const double T = p.tau3 - p.tau2;
    Envelope e = Envelope::optimized(p.tau2, T, p.A, true);
    if (shape == PulseShape::pi) {
        e = Envelope::constant_pi(p.tau2, T);
        e.value = I1 * std::numbers::pi / (2 * T);
    }
    return resonant_coef(e, err);
}

std::array<StepModel, 3> step_models(Model m) {
    switch (m) {
        case Model::original: return {StepModel::full, StepModel::full, StepModel::full};
        case Model::effective: return {StepModel::reduced, StepModel::reduced, StepModel::reduced};
        case Model::hybrid: return {StepModel::full, StepModel::full, StepModel::dispersive};
        case Model::dispersive: return {StepModel::dispersive, StepModel::dispersive, StepModel::dispersive};
    }
    return {};
}

TimeDepOp build_step(int s, StepModel m, const ProtocolParams& p, const HilbertSpec& spec, PulseShape shape,
                     const ErrorModel& err) {
    switch (m) {
        case StepModel::full: return build_full(spec, p.sys, step_drives(s, p, shape), err);
        case StepModel::dispersive: return build_effective(spec, p.sys, step_drives(s, p, shape), err);
        case StepModel::reduced:
            if (s == 1) return build_step1_eff(spec, step1_amplitude(p, shape, err));
            if (s == 2) return build_step2_eff(spec, p);
            return build_step3_reduced(spec, p, step3_amplitude(p, shape, err));
    }
    throw DomainError("unknown step model");
}

double fastest_frequency(StepModel m, const ProtocolParams& p, const ErrorModel& err) {
    if (m == StepModel::full) {
        double w = std::abs(p.sys.Delta);
        if (err.crosstalk_ratio != 0.0) w = std::max(w, p.sys.crosstalk_detuning());
        return w;
    }
    return std::max(p.omega_s2, std::abs(p.step3_modulation()));
}

double step3_resonance_mismatch(const ProtocolParams& p, const HilbertSpec& spec) {
    DriveSet d;
    const double T = p.tau3 - p.tau2;
    d.om1 = d.om2 = Envelope::step3_off_resonant(p.tau2, T, p.omega_p3);
    const SpMat H = build_effective(spec, p.sys, d).at(p.tau2 + T / 2);
    const Vec noon = basis_state(spec, 0, p.N, 0);
    const Vec disp = product_state(spec, 4, coherent_state(p.alpha0, spec.d), Vec::Unit(spec.d, 0));
    const double e0 = expectation(H, noon).real();
    const double e4 = expectation(H, disp).real() / disp.squaredNorm();
    return std::abs((e0 - e4) - p.step3_modulation());
}

SimResult run_protocol(const ProtocolParams& p, const RunOptions& opt) {
    SimResult res;
    res.params = p;
    res.model = opt.model;
    if (opt.deco.any()) {
        if (opt.decoherence_model == Model::effective)
            throw ConfigError("decoherence needs the original, hybrid or dispersive model");
        res.model = opt.decoherence_model;
    }
    res.steps = step_models(res.model);
    const int d = opt.cavity_dim > 0 ? opt.cavity_dim : default_truncation(p.N);
    res.cavity_dim = d;
    const HilbertSpec spec(d);
    res.truncation_tail = coherent_tail(p.alpha0, d);
    if (!check_truncation(p.alpha0, d))
        res.warnings.push_back("coherent-state tail above truncation " + std::to_string(res.truncation_tail));
    for (const auto& m : p.margins)
        if (m.warn) res.warnings.push_back("RWA margin " + m.name + " = " + std::to_string(m.value));
    if (res.model == Model::effective &&
        (opt.errors.delta_omega != 0 || opt.errors.delta_lambda != 0 || opt.errors.crosstalk_ratio != 0))
        res.warnings.push_back("effective model applies only the resonant-drive error delta; other errors ignored");

    res.boundaries = {p.tau1, p.tau2, p.tau3};
    const double bounds[4] = {0.0, p.tau1, p.tau2, p.tau3};
    const int last = opt.last_step;
    if (last < 1 || last > 3) throw ConfigError("last_step must be 1, 2 or 3");
    const double t_end = bounds[last];
    std::vector<Segment> sched;
    for (int s = 1; s <= last; ++s) {
        const StepModel m = res.steps[s - 1];
        Segment seg;
        seg.t0 = bounds[s - 1];
        seg.t1 = bounds[s];
        seg.H = build_step(s, m, p, spec, opt.shape, opt.errors);
        seg.cfg = opt.integrator;
        seg.cfg.max_step = std::min(opt.integrator.max_step, kTwoPi / (20 * fastest_frequency(m, p, opt.errors)));
        seg.label = "step " + std::to_string(s) + " (" + to_string(m) + ")";
        sched.push_back(std::move(seg));
    }

    // observation grid: uniform samples, then the three step ends
    const int ns = std::max(2, opt.samples);
    std::vector<double> grid;
    for (int i = 0; i < ns; ++i) grid.push_back(t_end * i / (ns - 1));
    grid.back() = t_end;
    std::vector<std::pair<double, int>> tagged;
    for (int i = 0; i < ns; ++i) tagged.emplace_back(grid[i], i);
    for (int b = 0; b < last; ++b) tagged.emplace_back(res.boundaries[b], ns + b);
    std::stable_sort(tagged.begin(), tagged.end(), [](auto& a, auto& b) { return a.first < b.first; });
    std::vector<double> all;
    for (auto& [t, tag] : tagged) all.push_back(t);

    std::vector<Observable> obs;
    for (int k = 1; k <= 3; ++k) obs.push_back(Observable::projector(target_state(k, p, spec)));
    const int dim = spec.dim();
    for (int q = 0; q < 5; ++q) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
        v.segment(q * d * d, d * d).setOnes();
        obs.push_back(Observable::diagonal(v));
    }
    Eigen::VectorXd n1(dim), n2(dim), top1(dim), top2(dim);
    for (int q = 0; q < 5; ++q)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                const int i = spec.index(q, a, b);
                n1(i) = a;
                n2(i) = b;
                top1(i) = a >= d - 2 ? 1.0 : 0.0;
                top2(i) = b >= d - 2 ? 1.0 : 0.0;
            }
    for (auto* v : {&n1, &n2, &top1, &top2}) obs.push_back(Observable::diagonal(*v));

    const Vec psi0 = basis_state(spec, 0, 0, 0);
    EvolutionRecord rec;
    if (!opt.deco.any()) {
        rec = evolve_pure(sched, psi0, all, obs);
    } else {
        const CollapseSet collapse = build_collapse_set(spec, opt.deco);
        std::string backend = opt.lindblad_backend;
        if (backend == "auto") backend = dim <= opt.density_limit ? "density" : "trajectories";
        if (backend == "density") {
            rec = evolve_lindblad(sched, Mat(psi0 * psi0.adjoint()), collapse, all, obs);
        } else if (backend == "trajectories") {
            rec = evolve_trajectories(sched, psi0, collapse, all, obs, opt.trajectories);
        } else {
            throw ConfigError("unknown Lindblad backend '" + backend + "'");
        }
    }
    res.backend = rec.backend;
    res.stats = rec.stats;
    res.norm_drift = rec.norm_drift;
    res.trace_drift = rec.trace_drift;
    res.no_jump_probability = rec.no_jump_probability;
    res.trajectories = rec.trajectories;
    res.final_state = rec.final_state;

    auto fid = [](double v) { return std::sqrt(std::max(0.0, v)); };
    res.t.resize(ns);
    res.F.resize(ns);
    res.pop.resize(ns);
    res.nbar.resize(ns);
    res.leakage.resize(ns);
    for (std::size_t k = 0; k < tagged.size(); ++k) {
        const auto& v = rec.values[k];
        const int tag = tagged[k].second;
        const std::array<double, 3> F{fid(v[0]), fid(v[1]), fid(v[2])};
        for (double f : F)
            if (f > 1 + 1e-9 && rec.backend != "trajectories")
                throw IntegrityError("fidelity above 1: " + std::to_string(f));
        if (tag >= ns) {
            res.boundary_F[tag - ns] = F;
            continue;
        }
        res.t[tag] = tagged[k].first;
        res.F[tag] = F;
        for (int q = 0; q < 5; ++q) res.pop[tag][q] = v[3 + q];
        res.nbar[tag] = {v[8], v[9]};
        res.leakage[tag] = std::max(v[10], v[11]);
        res.max_leakage = std::max(res.max_leakage, res.leakage[tag]);
    }
    for (int b = 0; b < last; ++b) res.F_final[b] = res.boundary_F[b][b];
    if (res.max_leakage >= 1e-4) {
        res.leakage_flag = true;
        res.warnings.push_back("truncation leakage " + std::to_string(res.max_leakage) + " exceeds 1e-4");
    }
    return res;
}

}  // namespace noonsim

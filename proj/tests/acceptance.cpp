// Acceptance runner: one PASS/FAIL line per criterion.
//
//   noonsim_acceptance                      all criteria
//   noonsim_acceptance --criterion 4 -c 6   selected criteria
//   noonsim_acceptance --report-only        exit 0 regardless of the verdicts

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noonsim/dynamics.hpp"
#include "noonsim/integrator.hpp"
#include "noonsim/protocol.hpp"
#include "noonsim/sweeps.hpp"

using namespace noonsim;

namespace {

struct Verdict {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        detail << (detail.tellp() > 0 ? "; " : "") << what << (cond ? "" : " [miss]");
        ok = ok && cond;
    }
};

std::string fmt(double v, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

ProtocolParams device(int N) { return derive_params(N, SystemParams::defaults(N), 0.01, 15.0); }

RunOptions quiet(Model m) {
    RunOptions o;
    o.model = m;
    o.samples = 11;
    return o;
}

int g_jobs = 1;
int g_trajectories = 64;

void effective_exactness(Verdict& v) {
    for (int N : {2, 3, 4}) {
        const SimResult r = run_protocol(device(N), quiet(Model::effective));
        const double worst = std::min({r.F_final[0], r.F_final[1], r.F_final[2]});
        v.require(worst >= 1 - 1e-6, "N=" + std::to_string(N) + " min F " + fmt(worst, 10));
    }
}

void original_steps12(Verdict& v) {
    RunOptions o = quiet(Model::original);
    o.cavity_dim = 12;
    o.last_step = 2;
    const SimResult r = run_protocol(device(2), o);
    v.require(r.F_final[0] >= 0.999, "F1 " + fmt(r.F_final[0]));
    v.require(r.F_final[1] >= 0.99, "F2 " + fmt(r.F_final[1]));
}

void original_full(Verdict& v) {
    RunOptions o = quiet(Model::original);
    o.cavity_dim = 12;
    const SimResult r = run_protocol(device(2), o);
    v.require(r.F_final[2] >= 0.985, "F3 " + fmt(r.F_final[2]) + " (" + std::to_string(r.stats.steps) + " steps)");
}

void pulse_robustness(Verdict& v) {
    for (double d : {-0.2, -0.1, 0.1, 0.2}) {
        const double f = two_level_transfer(PulseShape::optimized, d);
        v.require(f >= 0.999, "bench delta " + fmt(d, 2) + ": " + fmt(f));
    }
    const double pi_f = two_level_transfer(PulseShape::pi, 0.2);
    v.require(std::abs(pi_f - std::cos(0.1 * kTwoPi / 2)) <= 1e-4, "pi at 0.2: " + fmt(pi_f));

    SweepSpec s;
    s.param = "delta";
    s.lo = -0.2;
    s.hi = 0.2;
    s.points = 5;
    s.params = device(4);
    s.base = quiet(Model::hybrid);
    s.jobs = g_jobs;
    for (const SweepRow& row : run_sweep(s))
        v.require(row.ok && row.F3 > 0.99, "hybrid N=4 delta " + fmt(row.value, 2) + ": " +
                                               (row.ok ? fmt(row.F3) : row.error));
}

void sensitivity_zeros(Verdict& v) {
    const double q1 = sensitivity_q(1.0), q2 = sensitivity_q(2.0);
    v.require(q1 == 0.0 && q2 == 0.0, "Q(1) " + fmt(q1) + ", Q(2) " + fmt(q2));
    const double ratio = (1 - two_level_transfer(PulseShape::optimized, 0.2)) /
                         (1 - two_level_transfer(PulseShape::optimized, 0.1));
    v.require(ratio >= 8 && ratio <= 32, "infidelity ratio " + fmt(ratio, 4));
}

void crosstalk(Verdict& v) {
    SweepSpec s;
    s.param = "crosstalk_ratio";
    s.lo = -0.01;
    s.hi = 0.01;
    s.points = 2;
    s.params = device(4);
    s.base = quiet(Model::hybrid);
    s.jobs = g_jobs;
    for (const SweepRow& row : run_sweep(s))
        v.require(row.ok && row.F3 >= 0.9935 - 0.005,
                  "ratio " + fmt(row.value, 2) + ": " + (row.ok ? fmt(row.F3) : row.error));
}

void decoherence(Verdict& v) {
    const struct {
        const char* rate;
        double at;
        double bound;
    } points[] = {{"gamma_d", 25, 0.97}, {"gamma_r", 25, 0.91}, {"gamma_kappa", 2, 0.96}};
    RunOptions base = quiet(Model::dispersive);
    base.trajectories.trajectories = g_trajectories;
    base.trajectories.jobs = g_jobs;
    for (const auto& pt : points) {
        const auto rows = decoherence_sweep(pt.rate, 0, pt.at, 2, device(4), base, Model::dispersive, 1);
        const SweepRow& r = rows.back();
        v.require(r.ok && r.F3 >= pt.bound - 0.02,
                  std::string(pt.rate) + "=" + fmt(pt.at) + " kHz: " + (r.ok ? fmt(r.F3, 4) : r.error) +
                      " (bound " + fmt(pt.bound) + ")");
    }
}

void combined_scenarios(Verdict& v) {
    std::ifstream in(NOONSIM_DATA_DIR "/table2.json");
    if (!in) throw std::runtime_error("cannot open " NOONSIM_DATA_DIR "/table2.json");
    const auto j = nlohmann::json::parse(in);
    std::vector<ScenarioRow> rows;
    std::vector<double> ref;
    for (const auto& r : j.at("rows")) {
        ScenarioRow s;
        s.delta = r.at("delta");
        s.delta_omega_mhz = r.at("delta_omega_mhz");
        s.delta_lambda_khz = r.at("delta_lambda_khz");
        s.crosstalk_ratio = r.at("crosstalk_ratio");
        s.gamma_d_khz = r.at("gamma_d_khz");
        s.gamma_r_khz = r.at("gamma_r_khz");
        s.gamma_kappa_khz = r.at("gamma_kappa_khz");
        rows.push_back(s);
        ref.push_back(r.at("F3_reference"));
    }
    RunOptions base = quiet(Model::dispersive);
    base.trajectories.trajectories = g_trajectories;
    rows = run_scenarios(rows, device(4), base, g_jobs);
    for (std::size_t i = 0; i < rows.size(); ++i)
        v.require(rows[i].ok && std::abs(rows[i].F3 - ref[i]) <= 0.02,
                  "row " + std::to_string(i + 1) + ": " + (rows[i].ok ? fmt(rows[i].F3, 4) : rows[i].error) +
                      " vs " + fmt(ref[i], 4));
}

// two-level Rabi problem for the order estimate
double rabi_error(Method m, int n) {
    using V2 = Eigen::Vector2cd;
    const double w = 2.0, h = 1.0 / n;
    IntegratorConfig cfg;
    cfg.method = m;
    AdaptiveRK<V2> rk(
        [w](double, const V2& y, V2& dy) {
            dy(0) = cplx(0, -w) * y(1);
            dy(1) = cplx(0, -w) * y(0);
        },
        cfg);
    V2 y(1, 0), out;
    for (int i = 0; i < n; ++i) {
        rk.fixed_step(i * h, y, h, out);
        y = out;
    }
    return std::abs(std::norm(y(1)) - std::pow(std::sin(w), 2));
}

void properties(Verdict& v) {
    const int d = 10;
    const HilbertSpec spec(d);
    {
        const SpMat a = embed(annihilation(d), Slot::cavity1, spec);
        const Mat comm = to_dense(SpMat(a * SpMat(a.adjoint())) - SpMat(SpMat(a.adjoint()) * a));
        double worst = 0;
        for (int q = 0; q < kQuditDim; ++q)
            for (int n1 = 0; n1 < d - 1; ++n1)
                for (int n2 = 0; n2 < d; ++n2) {
                    const int i = spec.index(q, n1, n2);
                    worst = std::max(worst, (comm.col(i) - Mat::Identity(spec.dim(), spec.dim()).col(i)).norm());
                }
        v.require(worst < 1e-12, "commutator below edge " + fmt(worst, 3));
    }
    {
        const Mat D = displacement(2.0, 40);
        const double u = max_abs(D.adjoint() * D - Mat::Identity(40, 40));
        v.require(u < 1e-8, "D unitarity " + fmt(u, 3));
        const double n = expectation(number_op(40), coherent_state(2.0, 40)).real();
        v.require(std::abs(n - 4) < 1e-6, "coherent <n> " + fmt(n, 10));
    }
    {
        const SimResult r = run_protocol(device(2), quiet(Model::dispersive));
        v.require(r.norm_drift < 1e-8, "norm drift " + fmt(r.norm_drift, 3));
    }
    IntegratorConfig tight;
    tight.rtol = 1e-10;
    tight.atol = 1e-12;
    {
        const HilbertSpec s5(5);
        const TimeDepOp H0(s5.dim(), {});
        const double kappa = 0.3, t = 2.0;
        const CollapseSet loss{{embed(annihilation(5), Slot::cavity1, s5), kappa, "a1"}};
        const Vec psi0 = basis_state(s5, 0, 3, 0);
        const Mat rho = evolve_density(H0, psi0 * psi0.adjoint(), 0.0, t, loss, tight);
        const double tr = std::abs(rho.trace().real() - 1);
        const double rel =
            std::abs(expectation(embed(number_op(5), Slot::cavity1, s5), rho).real() / (3 * std::exp(-kappa * t)) - 1);
        v.require(tr < 1e-6, "trace drift " + fmt(tr, 3));
        v.require(rel < 1e-6, "cavity decay rel " + fmt(rel, 3));
    }
    {
        std::vector<double> grid;
        for (int i = 0; i <= 200; ++i) grid.push_back(0.01 * i / 200);
        const double res = invariant_residual(grid, 0.01);
        v.require(res < 1e-8, "invariant residual " + fmt(res, 3));
    }
    {
        const double o5 = std::log2(rabi_error(Method::dopri5, 20) / rabi_error(Method::dopri5, 40));
        const double o8 = std::log2(rabi_error(Method::dop853, 8) / rabi_error(Method::dop853, 16));
        v.require(o5 >= 4 && o8 >= 4, "observed order " + fmt(o5, 3) + "/" + fmt(o8, 3));
    }
    {
        const double l1 = 0.7, l2 = 0.4, D1 = 9, D2 = 5, gk = 0.2, kp = 0.05, gr = 0.03, gd = 0.01;
        const DressedTimes t = dressed_decoherence(l1, l2, D1, D2, gk, kp, gr, gd);
        const double s = l1 * l1 / (D1 * D1) + l2 * l2 / (D2 * D2), g1 = s * gk + gr;
        const double e1 = std::abs(t.T1 * g1 - 1), e2 = std::abs(t.T2 * (g1 / 2 + s * kp + gd) - 1);
        const DressedTimes bare = dressed_decoherence(0, 0, D1, D2, gk, kp, gr, gd);
        const double e3 = std::abs(bare.T1 * gr - 1) + std::abs(bare.T2 * (gr / 2 + gd) - 1);
        v.require(std::max({e1, e2, e3}) < 1e-14, "dressed rates " + fmt(std::max({e1, e2, e3}), 3));
    }
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"noonsim acceptance suite"};
    std::vector<int> chosen;
    bool report_only = false;
    app.add_option("-c,--criterion", chosen, "criterion to run (repeatable)")->check(CLI::Range(1, 9));
    app.add_option("--jobs", g_jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--trajectories", g_trajectories, "trajectories for decoherence runs")->check(CLI::PositiveNumber);
    app.add_flag("--report-only", report_only, "always exit 0");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all = {
        {1, "effective-model exactness", effective_exactness},
        {2, "original model, steps 1-2", original_steps12},
        {3, "original model, full run (slow)", original_full},
        {4, "pulse robustness", pulse_robustness},
        {5, "sensitivity zeros", sensitivity_zeros},
        {6, "crosstalk", crosstalk},
        {7, "decoherence", decoherence},
        {8, "combined scenarios", combined_scenarios},
        {9, "numerical properties", properties},
    };
    if (chosen.empty())
        for (const auto& c : all) chosen.push_back(c.id);

    bool all_ok = true;
    for (const auto& c : all) {
        if (std::find(chosen.begin(), chosen.end(), c.id) == chosen.end()) continue;
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(v);
        } catch (const std::exception& e) {
            v.ok = false;
            v.detail << (v.detail.tellp() > 0 ? "; " : "") << "error: " << e.what();
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d %s: %s (%s) [%.1f s]\n", c.id, v.ok ? "PASS" : "FAIL", c.name,
                    v.detail.str().c_str(), wall);
        std::fflush(stdout);
        all_ok = all_ok && v.ok;
    }
    return all_ok || report_only ? 0 : 1;
}

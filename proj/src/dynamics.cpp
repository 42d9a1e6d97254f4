#include "noonsim/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace noonsim {

namespace {

constexpr cplx minus_i{0.0, -1.0};

void check_schedule(const std::vector<Segment>& schedule, const std::vector<double>& grid) {
    if (schedule.empty()) throw ParameterError("empty evolution schedule");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i].t1 >= schedule[i].t0)) throw ScheduleError("segment ends before it starts");
        if (i > 0 && schedule[i].t0 != schedule[i - 1].t1) throw ScheduleError("schedule segments are not contiguous");
        if (schedule[i].H.dim() != schedule[0].H.dim()) throw DimensionError("segments act on different spaces");
    }
    if (!std::is_sorted(grid.begin(), grid.end())) throw ParameterError("observation grid must be sorted");
    if (!grid.empty() && (grid.front() < schedule.front().t0 || grid.back() > schedule.back().t1))
        throw ParameterError("observation grid outside the schedule");
}

std::vector<double> measure(const std::vector<Observable>& obs, const Vec& psi, double weight) {
    std::vector<double> v(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) v[i] = weight * obs[i].expect(psi);
    return v;
}

std::vector<double> measure(const std::vector<Observable>& obs, const Mat& rho) {
    std::vector<double> v(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) v[i] = obs[i].expect(rho);
    return v;
}

// Smallest eigenvalue of the qudit marginal, or of rho itself when small.
double min_eigenvalue(const Mat& rho) {
    const Mat herm = (rho + rho.adjoint()) / 2.0;
    if (herm.rows() <= 400) return Eigen::SelfAdjointEigenSolver<Mat>(herm, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    const Eigen::Index block = herm.rows() / kQuditDim;
    Mat red = Mat::Zero(kQuditDim, kQuditDim);
    for (int a = 0; a < kQuditDim; ++a)
        for (int b = 0; b < kQuditDim; ++b) red(a, b) = herm.block(a * block, b * block, block, block).trace();
    return Eigen::SelfAdjointEigenSolver<Mat>(red, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

// Internal grid: user points plus segment boundaries, with the user rows marked.
struct Timeline {
    std::vector<double> t;
    std::vector<int> user_index;  // -1 for internal points
};

Timeline make_timeline(const std::vector<Segment>& schedule, const std::vector<double>& grid) {
    std::vector<std::pair<double, int>> pts;
    pts.emplace_back(schedule.front().t0, -1);
    for (const Segment& s : schedule) pts.emplace_back(s.t1, -1);
    for (std::size_t i = 0; i < grid.size(); ++i) pts.emplace_back(grid[i], static_cast<int>(i));
    std::stable_sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first < b.first; });
    Timeline tl;
    for (auto& [t, u] : pts) {
        // keep internal duplicates out, but every user row gets its own entry
        if (u < 0 && !tl.t.empty() && tl.t.back() == t) continue;
        tl.t.push_back(t);
        tl.user_index.push_back(u);
    }
    return tl;
}

int segment_of(const std::vector<Segment>& schedule, double t) {
    for (std::size_t i = 0; i < schedule.size(); ++i)
        if (t <= schedule[i].t1) return static_cast<int>(i);
    return static_cast<int>(schedule.size()) - 1;
}

}  // namespace

double khz_to_rate(double khz) { return khz * 1e-3; }

CollapseSet build_collapse_set(const HilbertSpec& spec, double gd_khz, double gr_khz, double gk_khz) {
    if (gd_khz < 0 || gr_khz < 0 || gk_khz < 0) throw ParameterError("decay rates must be non-negative");
    Decoherence d;
    d.gamma_d = khz_to_rate(gd_khz);
    d.gamma_r = khz_to_rate(gr_khz);
    d.gamma_kappa = khz_to_rate(gk_khz);
    return build_collapse_set(spec, d);
}

CollapseSet build_collapse_set(const HilbertSpec& spec, const Decoherence& deco) {
    if (deco.gamma_d < 0 || deco.gamma_r < 0 || deco.gamma_kappa < 0)
        throw ParameterError("decay rates must be non-negative");
    CollapseSet set;
    auto q = [&](int j, int k) { return embed(qudit_transition(j, k), Slot::qudit, spec); };
    auto lbl = [](int j, int k) { return "|" + std::to_string(j) + "><" + std::to_string(k) + "|"; };
    if (deco.gamma_d > 0)
        for (int f : {3, 4}) set.push_back({q(f, f), deco.gamma_d, "dephasing " + lbl(f, f)});
    if (deco.gamma_r > 0) {
        for (int i = 0; i <= 3; ++i) set.push_back({q(i, 4), deco.gamma_r / 4, "relaxation " + lbl(i, 4)});
        for (int j = 0; j <= 2; ++j) set.push_back({q(j, 3), deco.gamma_r / 3, "relaxation " + lbl(j, 3)});
        set.push_back({q(0, 2), deco.gamma_r, "relaxation " + lbl(0, 2)});
        set.push_back({q(0, 1), deco.gamma_r, "relaxation " + lbl(0, 1)});
    }
    if (deco.gamma_kappa > 0) {
        set.push_back({embed(annihilation(spec.d), Slot::cavity1, spec), deco.gamma_kappa, "photon loss a1"});
        set.push_back({embed(annihilation(spec.d), Slot::cavity2, spec), deco.gamma_kappa, "photon loss a2"});
    }
    return set;
}

DressedTimes dressed_decoherence(double l1, double l2, double D1, double D2, double gk, double kphi, double gr,
                                 double gd) {
    if (D1 == 0.0 || D2 == 0.0) throw ParameterError("dressed rates are singular at Delta = 0");
    const double purcell = l1 * l1 / (D1 * D1) + l2 * l2 / (D2 * D2);
    const double g1 = purcell * gk + gr;
    const double gphi = purcell * kphi + gd;
    DressedTimes out;
    out.T1 = g1 > 0 ? 1.0 / g1 : std::numeric_limits<double>::infinity();
    const double inv_t2 = g1 / 2 + gphi;
    out.T2 = inv_t2 > 0 ? 1.0 / inv_t2 : std::numeric_limits<double>::infinity();
    return out;
}

Observable Observable::projector(Vec ket) {
    Observable o;
    o.projector_ = true;
    o.ket_ = std::move(ket);
    return o;
}

Observable Observable::diagonal(Eigen::VectorXd diag) {
    Observable o;
    o.diag_ = std::move(diag);
    return o;
}

double Observable::expect(const Vec& psi) const {
    if (projector_) return std::norm(ket_.dot(psi));
    return (diag_.array() * psi.array().abs2()).sum();
}

double Observable::expect(const Mat& rho) const {
    if (projector_) return ket_.dot(rho * ket_).real();
    return (diag_.array() * rho.diagonal().real().array()).sum();
}

SpMat decay_generator(const CollapseSet& collapse, int dim) {
    SpMat g(dim, dim);
    for (const CollapseOp& c : collapse) {
        if (c.op.rows() != dim) throw DimensionError("collapse operator has wrong dimension");
        g += SpMat((cplx(0.0, -0.5) * c.rate) * SpMat(SpMat(c.op.adjoint()) * c.op));
    }
    return g;
}

EvolutionRecord evolve_pure(const std::vector<Segment>& schedule, const Vec& psi0, const std::vector<double>& grid,
                            const std::vector<Observable>& obs) {
    check_schedule(schedule, grid);
    if (psi0.size() != schedule[0].H.dim()) throw DimensionError("initial state has wrong dimension");
    if (std::abs(psi0.norm() - 1.0) > 1e-8) throw ParameterError("initial state is not normalized");
    EvolutionRecord rec;
    rec.backend = "pure";
    Vec psi = psi0;
    std::size_t gi = 0;
    auto observe = [&](double t) {
        const double nrm = psi.norm();
        rec.norm_drift = std::max(rec.norm_drift, std::abs(nrm - 1.0));
        rec.times.push_back(t);
        rec.values.push_back(measure(obs, psi, 1.0 / (nrm * nrm)));
    };
    while (gi < grid.size() && grid[gi] <= schedule.front().t0) observe(grid[gi++]);
    for (const Segment& seg : schedule) {
        const TimeDepOp& H = seg.H;
        AdaptiveRK<Vec> rk([&H](double t, const Vec& y, Vec& dy) { H.apply(t, y, dy, minus_i); }, seg.cfg);
        double t = seg.t0;
        while (gi < grid.size() && grid[gi] <= seg.t1) {
            rk.integrate(t, psi, grid[gi]);
            observe(grid[gi++]);
        }
        rk.integrate(t, psi, seg.t1);
        rec.stats += rk.stats();
    }
    rec.norm_drift = std::max(rec.norm_drift, std::abs(psi.norm() - 1.0));
    rec.final_state = psi;
    return rec;
}

EvolutionRecord evolve_lindblad(const std::vector<Segment>& schedule, const Mat& rho0, const CollapseSet& collapse,
                                const std::vector<double>& grid, const std::vector<Observable>& obs) {
    check_schedule(schedule, grid);
    const int dim = schedule[0].H.dim();
    if (rho0.rows() != dim || rho0.cols() != dim) throw DimensionError("initial density matrix has wrong dimension");
    EvolutionRecord rec;
    rec.backend = "density";
    const SpMat decay = decay_generator(collapse, dim);
    Mat rho = rho0;
    std::size_t gi = 0;
    auto observe = [&](double t) {
        const double tr = rho.trace().real();
        rec.trace_drift = std::max(rec.trace_drift, std::abs(tr - 1.0));
        rec.hermiticity_drift = std::max(rec.hermiticity_drift, max_abs(rho - rho.adjoint()));
        if (rec.trace_drift > 1e-4)
            throw IntegrityError("density-matrix trace drifted by " + std::to_string(rec.trace_drift) + " at t=" +
                                 std::to_string(t));
        const Mat herm = (rho + rho.adjoint()) / 2.0;
        rec.times.push_back(t);
        rec.values.push_back(measure(obs, herm));
    };
    while (gi < grid.size() && grid[gi] <= schedule.front().t0) observe(grid[gi++]);
    for (const Segment& seg : schedule) {
        const TimeDepOp Heff = seg.H.with_static(decay);
        AdaptiveRK<Mat> rk(
            [&Heff, &collapse](double t, const Mat& r, Mat& dr) {
                Heff.apply(t, r, dr, minus_i);
                dr += Mat(dr.adjoint());
                for (const CollapseOp& c : collapse) {
                    const Mat lr = c.op * r;
                    dr += c.rate * (c.op * lr.adjoint());
                }
            },
            seg.cfg);
        double t = seg.t0;
        while (gi < grid.size() && grid[gi] <= seg.t1) {
            rk.integrate(t, rho, grid[gi]);
            observe(grid[gi++]);
        }
        rk.integrate(t, rho, seg.t1);
        rec.stats += rk.stats();
    }
    rec.trace_drift = std::max(rec.trace_drift, std::abs(rho.trace().real() - 1.0));
    if (rec.trace_drift > 1e-4) throw IntegrityError("density-matrix trace drifted by " + std::to_string(rec.trace_drift));
    rec.min_eigenvalue = min_eigenvalue(rho);
    rec.final_rho = rho;
    return rec;
}

namespace {

struct TrajectoryOutput {
    std::vector<std::vector<double>> values;  // per timeline point
    IntegratorStats stats;
    long jumps = 0;
};

// Continues one trajectory from timeline point `start` with jump threshold r.
// The state is on the no-jump branch until the first jump, which contributes
// nothing here because that branch is accounted for separately.
TrajectoryOutput run_trajectory(const std::vector<Segment>& schedule, const std::vector<TimeDepOp>& heff,
                                const CollapseSet& collapse, const Timeline& tl, const std::vector<Observable>& obs,
                                std::size_t start, Vec psi, double r, std::mt19937_64& rng) {
    TrajectoryOutput out;
    out.values.assign(tl.t.size(), std::vector<double>(obs.size(), 0.0));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    bool jumped = false;
    double t = tl.t[start];
    int seg = segment_of(schedule, t);
    // a point exactly at a boundary belongs to the earlier segment; move on if it is finished
    if (t >= schedule[seg].t1 && seg + 1 < static_cast<int>(schedule.size())) ++seg;
    for (std::size_t g = start + 1; g < tl.t.size(); ++g) {
        const double target = tl.t[g];
        while (t < target) {
            while (seg + 1 < static_cast<int>(schedule.size()) && t >= schedule[seg].t1) ++seg;
            const double stop_at = std::min(target, schedule[seg].t1);
            const TimeDepOp& H = heff[seg];
            AdaptiveRK<Vec> rk([&H](double tt, const Vec& y, Vec& dy) { H.apply(tt, y, dy, minus_i); }, schedule[seg].cfg);
            while (t < stop_at) {
                const bool done =
                    rk.integrate(t, psi, stop_at, [r](double, const Vec& y) { return y.squaredNorm() < r; });
                if (done) break;
                // locate the jump inside [t, t + h] by regula falsi on |psi|^2 - r
                double lo = 0.0, hi = rk.last_step();
                double flo = psi.squaredNorm() - r;
                Vec trial;
                rk.fixed_step(t, psi, hi, trial);
                double fhi = trial.squaredNorm() - r;
                double x = hi;
                int side = 0;
                for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, t); ++it) {
                    x = (lo * fhi - hi * flo) / (fhi - flo);
                    rk.fixed_step(t, psi, x, trial);
                    const double fx = trial.squaredNorm() - r;
                    if (std::abs(fx) < 1e-13) break;
                    if (fx > 0) {
                        lo = x;
                        flo = fx;
                        if (side == 1) fhi /= 2;
                        side = 1;
                    } else {
                        hi = x;
                        fhi = fx;
                        if (side == -1) flo /= 2;
                        side = -1;
                    }
                }
                rk.fixed_step(t, psi, x, trial);
                psi = trial;
                t += x;
                // choose the channel with probability proportional to rate |L psi|^2
                std::vector<double> w(collapse.size());
                std::vector<Vec> cand(collapse.size());
                double total = 0.0;
                for (std::size_t k = 0; k < collapse.size(); ++k) {
                    cand[k] = collapse[k].op * psi;
                    w[k] = collapse[k].rate * cand[k].squaredNorm();
                    total += w[k];
                }
                if (!(total > 0)) throw IntegrityError("quantum jump with vanishing jump rates");
                double pick = uni(rng) * total;
                std::size_t k = 0;
                for (; k + 1 < w.size(); ++k) {
                    if (pick < w[k]) break;
                    pick -= w[k];
                }
                psi = cand[k] / cand[k].norm();
                jumped = true;
                ++out.jumps;
                if (out.jumps > 100000) throw IntegrityError("runaway quantum-jump count");
                r = uni(rng);
                rk.reset();
            }
            out.stats += rk.stats();
        }
        if (jumped) {
            const double n2 = psi.squaredNorm();
            out.values[g] = measure(obs, psi, 1.0 / n2);
        }
    }
    return out;
}

}  // namespace

EvolutionRecord evolve_trajectories(const std::vector<Segment>& schedule, const Vec& psi0, const CollapseSet& collapse,
                                    const std::vector<double>& grid, const std::vector<Observable>& obs,
                                    const TrajectoryConfig& tcfg) {
    check_schedule(schedule, grid);
    const int dim = schedule[0].H.dim();
    if (psi0.size() != dim) throw DimensionError("initial state has wrong dimension");
    if (tcfg.trajectories < 1) throw ParameterError("trajectory count must be >= 1");
    const Timeline tl = make_timeline(schedule, grid);
    const SpMat decay = decay_generator(collapse, dim);
    std::vector<TimeDepOp> heff;
    for (const Segment& s : schedule) heff.push_back(s.H.with_static(decay));

    EvolutionRecord rec;
    rec.backend = "trajectories";
    // no-jump branch, kept unnormalized, with checkpoints on the timeline
    std::vector<Vec> checkpoint(tl.t.size());
    std::vector<double> norm2(tl.t.size());
    std::vector<std::vector<double>> nj(tl.t.size());
    {
        Vec psi = psi0;
        std::size_t g = 0;
        for (std::size_t s = 0; s < schedule.size(); ++s) {
            const TimeDepOp& H = heff[s];
            AdaptiveRK<Vec> rk([&H](double t, const Vec& y, Vec& dy) { H.apply(t, y, dy, minus_i); }, schedule[s].cfg);
            double t = schedule[s].t0;
            while (g < tl.t.size() && tl.t[g] <= schedule[s].t1) {
                rk.integrate(t, psi, tl.t[g]);
                checkpoint[g] = psi;
                norm2[g] = psi.squaredNorm();
                nj[g] = measure(obs, psi, 1.0);
                ++g;
            }
            rec.stats += rk.stats();
        }
    }
    const double p0 = norm2.back();
    rec.no_jump_probability = p0;
    std::vector<std::vector<double>> total = nj;

    if (!collapse.empty() && p0 < 1.0 - 1e-12) {
        const int n = tcfg.trajectories;
        std::vector<TrajectoryOutput> outs(n);
        std::atomic<int> next{0};
        std::mutex err_mu;
        std::exception_ptr failure;
        auto worker = [&]() {
            for (int i = next++; i < n; i = next++) {
                try {
                    std::seed_seq seq{static_cast<std::uint32_t>(tcfg.seed), static_cast<std::uint32_t>(tcfg.seed >> 32),
                                      static_cast<std::uint32_t>(i)};
                    std::mt19937_64 rng(seq);
                    std::uniform_real_distribution<double> uni(0.0, 1.0);
                    const double r = p0 + (1.0 - p0) * uni(rng);
                    // last checkpoint whose norm is still above the threshold
                    std::size_t c = 0;
                    while (c + 1 < tl.t.size() && norm2[c + 1] >= r) ++c;
                    outs[i] = run_trajectory(schedule, heff, collapse, tl, obs, c, checkpoint[c], r, rng);
                } catch (...) {
                    std::lock_guard lock(err_mu);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        };
        const int jobs = std::max(1, std::min(tcfg.jobs, n));
        std::vector<std::thread> pool;
        for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
        const double w = (1.0 - p0) / n;
        // fixed summation order keeps results independent of the thread count
        for (int i = 0; i < n; ++i) {
            rec.stats += outs[i].stats;
            for (std::size_t g = 0; g < tl.t.size(); ++g)
                for (std::size_t k = 0; k < obs.size(); ++k) total[g][k] += w * outs[i].values[g][k];
        }
        rec.trajectories = n;
    }
    for (std::size_t g = 0; g < tl.t.size(); ++g) {
        if (tl.user_index[g] < 0) continue;
        rec.times.push_back(tl.t[g]);
        rec.values.push_back(total[g]);
    }
    rec.final_state = checkpoint.back() / std::sqrt(std::max(p0, 1e-300));
    return rec;
}

Vec evolve_state(const TimeDepOp& H, const Vec& psi0, double t0, double t1, const IntegratorConfig& cfg,
                 IntegratorStats* stats) {
    std::vector<Segment> sched{{t0, t1, H, cfg, ""}};
    EvolutionRecord rec = evolve_pure(sched, psi0, {}, {});
    if (stats) *stats = rec.stats;
    return rec.final_state;
}

Mat evolve_density(const TimeDepOp& H, const Mat& rho0, double t0, double t1, const CollapseSet& collapse,
                   const IntegratorConfig& cfg, IntegratorStats* stats) {
    std::vector<Segment> sched{{t0, t1, H, cfg, ""}};
    EvolutionRecord rec = evolve_lindblad(sched, rho0, collapse, {}, {});
    if (stats) *stats = rec.stats;
    return rec.final_rho;
}

}  // namespace noonsim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noonsim/hamiltonians.hpp"
#include "noonsim/integrator.hpp"
#include "noonsim/params.hpp"

namespace noonsim {

struct CollapseOp {
    SpMat op;
    double rate = 0.0;  // 1/us
    std::string label;
};
using CollapseSet = std::vector<CollapseOp>;

// Rates in kHz, read as linear rates 1/T (no 2 pi).
CollapseSet build_collapse_set(const HilbertSpec& spec, double gamma_d_khz, double gamma_r_khz, double gamma_kappa_khz);
CollapseSet build_collapse_set(const HilbertSpec& spec, const Decoherence& deco);
double khz_to_rate(double khz);

struct DressedTimes {
    double T1 = 0.0;  // us
    double T2 = 0.0;  // us
};
// Rates in 1/us; returns dressed relaxation and dephasing times.
DressedTimes dressed_decoherence(double lambda1, double lambda2, double Delta1, double Delta2, double gamma_kappa,
                                 double kappa_phi, double gamma_r, double gamma_d);

// <psi|O|psi> for a projector |k><k| or a diagonal operator.
class Observable {
public:
    static Observable projector(Vec ket);
    static Observable diagonal(Eigen::VectorXd diag);
    double expect(const Vec& psi) const;
    double expect(const Mat& rho) const;

private:
    bool projector_ = false;
    Vec ket_;
    Eigen::VectorXd diag_;
};

// A time window with its own generator and integrator settings.
struct Segment {
    double t0 = 0.0;
    double t1 = 0.0;
    TimeDepOp H;
    IntegratorConfig cfg;
    std::string label;
};

struct TrajectoryConfig {
    int trajectories = 64;
    std::uint64_t seed = 12345;
    int jobs = 1;
};

struct EvolutionRecord {
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // per time, per observable
    IntegratorStats stats;
    double norm_drift = 0.0;
    double trace_drift = 0.0;
    double hermiticity_drift = 0.0;
    double min_eigenvalue = 0.0;
    Vec final_state;
    Mat final_rho;
    std::string backend;
    int trajectories = 0;
    double no_jump_probability = 1.0;
};

// The observation grid must be sorted and inside the schedule; segment
// boundaries that should be observed must be listed in it.
EvolutionRecord evolve_pure(const std::vector<Segment>& schedule, const Vec& psi0, const std::vector<double>& grid,
                            const std::vector<Observable>& obs);
EvolutionRecord evolve_lindblad(const std::vector<Segment>& schedule, const Mat& rho0, const CollapseSet& collapse,
                                const std::vector<double>& grid, const std::vector<Observable>& obs);
// Quantum-jump unraveling, stratified on the no-jump branch.
EvolutionRecord evolve_trajectories(const std::vector<Segment>& schedule, const Vec& psi0, const CollapseSet& collapse,
                                    const std::vector<double>& grid, const std::vector<Observable>& obs,
                                    const TrajectoryConfig& tcfg);

// Single-generator conveniences.
Vec evolve_state(const TimeDepOp& H, const Vec& psi0, double t0, double t1, const IntegratorConfig& cfg,
                 IntegratorStats* stats = nullptr);
Mat evolve_density(const TimeDepOp& H, const Mat& rho0, double t0, double t1, const CollapseSet& collapse,
                   const IntegratorConfig& cfg, IntegratorStats* stats = nullptr);

// -(i/2) sum_k gamma_k L_k^dag L_k, the non-hermitian part of the no-jump generator.
SpMat decay_generator(const CollapseSet& collapse, int dim);

}  // namespace noonsim

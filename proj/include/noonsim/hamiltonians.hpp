#pragma once

#include <functional>
#include <string>
#include <vector>

#include "noonsim/hilbert.hpp"
#include "noonsim/params.hpp"
#include "noonsim/pulses.hpp"

namespace noonsim {

using CoefFn = std::function<cplx(double)>;

// One term c(t) * op of a time-dependent operator; an empty coef means c = 1.
struct Term {
    SpMat op;
    CoefFn coef;
};

// Sum of sparse terms with scalar time dependence, merged into one CSR
// skeleton whose entries carry the index of their coefficient function.
class TimeDepOp {
public:
    struct Entry {
        int row, col, cidx;
        cplx val;
    };

    TimeDepOp() = default;
    TimeDepOp(int dim, const std::vector<Term>& terms);

    int dim() const { return dim_; }
    long nnz() const { return static_cast<long>(val_.size()); }
    int n_coefficients() const { return static_cast<int>(fns_.size()) + 1; }

    // c[0] = 1 for the static part.
    void coefficients(double t, std::vector<cplx>& c) const;
    // y = factor * H(t) x
    void apply(double t, const Vec& x, Vec& y, cplx factor = 1.0) const;
    void apply(double t, const Mat& x, Mat& y, cplx factor = 1.0) const;
    void apply_with(const std::vector<cplx>& c, const cplx* x, cplx* y) const;
    SpMat at(double t) const;
    // Copy with a static operator added.
    TimeDepOp with_static(const SpMat& m) const;

private:
    void assemble(std::vector<Entry>& entries);

    int dim_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_;
    std::vector<cplx> val_;
    std::vector<int> cidx_;
    std::vector<CoefFn> fns_;
};

// Drive amplitudes: resonant on |0><3| and |0><4|, off-resonant Omega_1 on
// |4><1| and Omega_2 on |3><2|.
struct DriveSet {
    Envelope res03;
    Envelope res04;
    Envelope om1;
    Envelope om2;
};

// Error-injected coefficient functions shared by the builders.
CoefFn resonant_coef(const Envelope& e, const ErrorModel& err);
CoefFn off_resonant_coef(const Envelope& e, const ErrorModel& err);

// Rotating-frame model with explicit qudit-cavity exchange.
TimeDepOp build_full(const HilbertSpec& spec, const SystemParams& sys, const DriveSet& drives,
                     const ErrorModel& err = {});
// Second-order dispersive model.
TimeDepOp build_effective(const HilbertSpec& spec, const SystemParams& sys, const DriveSet& drives,
                          const ErrorModel& err = {});
TimeDepOp build_step1_eff(const HilbertSpec& spec, CoefFn omega_s1);
TimeDepOp build_step2_eff(const HilbertSpec& spec, const ProtocolParams& p);
TimeDepOp build_step3_reduced(const HilbertSpec& spec, const ProtocolParams& p, CoefFn omega_s3);
TimeDepOp build_crosstalk(const HilbertSpec& spec, double lambda12, double detuning);

// Static second-order shift (lambda12^2 / Delta') (n1 - n2) used by the dispersive model.
SpMat crosstalk_dispersive(const HilbertSpec& spec, double lambda12, double detuning);

// Frequently used embedded operators.
struct Ops {
    explicit Ops(const HilbertSpec& spec);
    HilbertSpec spec;
    SpMat a1, a2, n1, n2;
    SpMat q(int j, int k) const { return embed(qudit_transition(j, k), Slot::qudit, spec); }
};

}  // namespace noonsim

#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "noonsim/errors.hpp"

namespace noonsim {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

inline constexpr int kQuditDim = 5;

enum class Slot { qudit, cavity1, cavity2 };

// Five-level qudit times two cavities truncated to d Fock levels each.
struct HilbertSpec {
    int d = 15;

    explicit HilbertSpec(int cavity_dim);
    int qudit_dim() const { return kQuditDim; }
    int cavity_dim() const { return d; }
    int dim() const { return kQuditDim * d * d; }
    int slot_dim(Slot s) const { return s == Slot::qudit ? kQuditDim : d; }
    // Row-major index of |q, n1, n2>.
    int index(int q, int n1, int n2) const;
    bool operator==(const HilbertSpec&) const = default;
};

// Smallest truncation that holds a coherent state with mean photon number N.
int default_truncation(int N);

SpMat annihilation(int d);
SpMat creation(int d);
SpMat number_op(int d);
SpMat identity(int n);
SpMat qudit_transition(int j, int k);

SpMat embed(const SpMat& local, Slot slot, const HilbertSpec& spec);

// D(alpha) = exp[alpha (a^dag - a)] on d levels, as a dense d x d matrix.
Mat displacement(double alpha, int d);
// Poisson weight of levels >= d-1 for a coherent state of amplitude alpha.
double coherent_tail(double alpha, int d);
// Throws TruncationError above 1e-4; returns true when the tail is below 1e-8.
bool check_truncation(double alpha, int d);
// Column 0 of displacement(alpha, d).
Vec coherent_state(double alpha, int d);

Vec basis_state(const HilbertSpec& spec, int q, int n1, int n2);
// |q> (x) |c1> (x) |c2> for cavity states given as d-vectors.
Vec product_state(const HilbertSpec& spec, int q, const Vec& c1, const Vec& c2);

cplx expectation(const SpMat& op, const Vec& psi);
cplx expectation(const SpMat& op, const Mat& rho);

// <psi|rho|psi> with the clamping rule for numerical noise.
double overlap_population(const Vec& target, const Mat& rho);
double fidelity_state(const Vec& target, const Mat& rho);
double fidelity_state(const Vec& target, const Vec& psi);

// Dense helpers for tests and small problems.
Mat to_dense(const SpMat& a);
double max_abs(const Mat& a);
double hermiticity_defect(const SpMat& a);

}  // namespace noonsim

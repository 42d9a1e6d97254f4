#include "noonsim/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace noonsim {

HilbertSpec::HilbertSpec(int cavity_dim) : d(cavity_dim) {
    if (d < 2) throw DimensionError("cavity dimension must be >= 2, got " + std::to_string(d));
}

int HilbertSpec::index(int q, int n1, int n2) const {
    if (q < 0 || q >= kQuditDim) throw LevelError("qudit level out of range: " + std::to_string(q));
    if (n1 < 0 || n1 >= d || n2 < 0 || n2 >= d) throw DimensionError("Fock level out of range");
    return (q * d + n1) * d + n2;
}

int default_truncation(int N) {
    if (N < 1) throw ParameterError("photon number N must be >= 1");
    const int c = static_cast<int>(std::ceil(N + 6.0 * std::sqrt(static_cast<double>(N)))) + 2;
    return std::max(15, c);
}

SpMat annihilation(int d) {
    if (d < 2) throw DimensionError("cavity dimension must be >= 2, got " + std::to_string(d));
    SpMat a(d, d);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int n = 1; n < d; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
    a.setFromTriplets(t.begin(), t.end());
    return a;
}

SpMat creation(int d) { return SpMat(annihilation(d).adjoint()); }

SpMat number_op(int d) {
    SpMat n(d, d);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int k = 1; k < d; ++k) t.emplace_back(k, k, static_cast<double>(k));
    n.setFromTriplets(t.begin(), t.end());
    return n;
}

SpMat identity(int n) {
    SpMat id(n, n);
    id.setIdentity();
    return id;
}

SpMat qudit_transition(int j, int k) {
    if (j < 0 || j >= kQuditDim || k < 0 || k >= kQuditDim)
        throw LevelError("qudit level out of range in transition |" + std::to_string(j) + "><" +
                         std::to_string(k) + "|");
    SpMat m(kQuditDim, kQuditDim);
    m.insert(j, k) = 1.0;
    m.makeCompressed();
    return m;
}

SpMat embed(const SpMat& local, Slot slot, const HilbertSpec& spec) {
    const int n = spec.slot_dim(slot);
    if (local.rows() != n || local.cols() != n)
        throw DimensionError("embed: operator is " + std::to_string(local.rows()) + "x" +
                             std::to_string(local.cols()) + ", slot needs " + std::to_string(n));
    const SpMat iq = identity(kQuditDim), ic = identity(spec.d);
    SpMat out;
    switch (slot) {
        case Slot::qudit: out = Eigen::kroneckerProduct(local, SpMat(Eigen::kroneckerProduct(ic, ic))); break;
        case Slot::cavity1: out = Eigen::kroneckerProduct(iq, SpMat(Eigen::kroneckerProduct(local, ic))); break;
        case Slot::cavity2: out = Eigen::kroneckerProduct(iq, SpMat(Eigen::kroneckerProduct(ic, local))); break;
    }
    out.makeCompressed();
    return out;
}

Mat displacement(double alpha, int d) {
    const Mat a = to_dense(annihilation(d));
    const Mat g = alpha * (a.adjoint() - a);
    return g.exp();
}

double coherent_tail(double alpha, int d) {
    // Sum the Poisson tail directly rather than 1 - head, which cancels badly.
    const double m = alpha * alpha;
    if (m == 0.0) return 0.0;
    double term = std::exp(-m);
    for (int n = 0; n < d - 1; ++n) term *= m / (n + 1);
    double tail = 0.0;
    for (int n = d - 1; n < d + 400 && term > 1e-300; ++n) {
        tail += term;
        term *= m / (n + 1);
    }
    return tail;
}

bool check_truncation(double alpha, int d) {
    const double tail = coherent_tail(alpha, d);
    if (tail > 1e-4)
        throw TruncationError("cavity truncation d=" + std::to_string(d) +
                              " too small for coherent amplitude " + std::to_string(alpha) +
                              " (top-level population " + std::to_string(tail) + ")");
    return tail < 1e-8;
}

Vec coherent_state(double alpha, int d) { return displacement(alpha, d).col(0); }

Vec basis_state(const HilbertSpec& spec, int q, int n1, int n2) {
    Vec v = Vec::Zero(spec.dim());
    v(spec.index(q, n1, n2)) = 1.0;
    return v;
}

Vec product_state(const HilbertSpec& spec, int q, const Vec& c1, const Vec& c2) {
    if (c1.size() != spec.d || c2.size() != spec.d) throw DimensionError("product_state: cavity vector size");
    Vec v = Vec::Zero(spec.dim());
    for (int n1 = 0; n1 < spec.d; ++n1)
        for (int n2 = 0; n2 < spec.d; ++n2) v(spec.index(q, n1, n2)) = c1(n1) * c2(n2);
    return v;
}

cplx expectation(const SpMat& op, const Vec& psi) {
    if (op.cols() != psi.size()) throw DimensionError("expectation: size mismatch");
    return psi.dot(op * psi);
}

cplx expectation(const SpMat& op, const Mat& rho) {
    if (op.cols() != rho.rows()) throw DimensionError("expectation: size mismatch");
    return (op * rho).trace();
}

double overlap_population(const Vec& target, const Mat& rho) {
    if (target.size() != rho.rows()) throw DimensionError("fidelity: size mismatch");
    const double p = target.dot(rho * target).real();
    if (p < -1e-10) throw IntegrityError("negative population <psi|rho|psi> = " + std::to_string(p));
    return std::max(p, 0.0);
}

double fidelity_state(const Vec& target, const Mat& rho) { return std::sqrt(overlap_population(target, rho)); }

double fidelity_state(const Vec& target, const Vec& psi) {
    if (target.size() != psi.size()) throw DimensionError("fidelity: size mismatch");
    return std::abs(target.dot(psi));
}

Mat to_dense(const SpMat& a) { return Mat(a); }

double max_abs(const Mat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

double hermiticity_defect(const SpMat& a) {
    const SpMat diff = a - SpMat(a.adjoint());
    double m = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SpMat::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

}  // namespace noonsim

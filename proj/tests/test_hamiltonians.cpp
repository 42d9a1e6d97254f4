#include <doctest.h>

#include <cmath>
#include <random>

#include "noonsim/dynamics.hpp"
#include "noonsim/protocol.hpp"

using namespace noonsim;

namespace {

cplx element(const SpMat& H, const Vec& bra, const Vec& ket) { return bra.dot(H * ket); }

}  // namespace

TEST_CASE("exchange model term structure") {
    const HilbertSpec spec(4);
    const SystemParams sys = SystemParams::defaults(4);
    DriveSet dr;
    dr.om1 = Envelope::step3_off_resonant(0.0, 10.0, 5.0);
    const TimeDepOp H = build_full(spec, sys, dr);
    const double t = 0.3;
    const SpMat Ht = H.at(t);
    for (int n = 0; n < 3; ++n) {
        const cplx want = 5.0 * std::exp(cplx(0, sys.Delta * t));
        CHECK(std::abs(element(Ht, basis_state(spec, 4, n, 1), basis_state(spec, 1, n, 1)) - want) < 1e-9);
    }
    // |4,n,m> <-> |1,n+1,m> via the cavity exchange
    const cplx g = element(Ht, basis_state(spec, 1, 1, 0), basis_state(spec, 4, 0, 0));
    CHECK(std::abs(g - sys.lambda * std::exp(cplx(0, -sys.Delta * t))) < 1e-9);

    SystemParams quiet = sys;
    quiet.delta_p = 0.0;
    quiet.lambda = 0.0;
    CHECK(build_full(spec, quiet, DriveSet{}).at(1.0).norm() == 0.0);
}

TEST_CASE("generators are hermitian at random times") {
    const HilbertSpec spec(5);
    const ProtocolParams p = derive_params(4, SystemParams::defaults(4), 0.01, 15.0);
    ErrorModel err;
    err.crosstalk_ratio = 0.01;
    err.delta_omega = 3.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 15.0);
    double worst = 0;
    for (int s = 1; s <= 3; ++s)
        for (StepModel m : {StepModel::full, StepModel::dispersive, StepModel::reduced}) {
            const TimeDepOp H = build_step(s, m, p, spec, PulseShape::optimized, err);
            for (int k = 0; k < 200; ++k) worst = std::max(worst, hermiticity_defect(H.at(u(rng))));
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("dispersive model shifts") {
    const HilbertSpec spec(4);
    const SystemParams sys = SystemParams::defaults(4);
    const double stark = sys.lambda * sys.lambda / sys.Delta;
    CHECK(stark / kTwoPi == doctest::Approx(2.8356).epsilon(1e-4));
    const SpMat H = build_effective(spec, sys, DriveSet{}).at(0.0);
    const double e1 = element(H, basis_state(spec, 4, 1, 0), basis_state(spec, 4, 1, 0)).real();
    const double e0 = element(H, basis_state(spec, 4, 0, 0), basis_state(spec, 4, 0, 0)).real();
    CHECK(e1 - e0 == doctest::Approx(stark + sys.delta_p).epsilon(1e-12));
}

TEST_CASE("step-1 reduced model") {
    const HilbertSpec spec(3);
    const CoefFn om = [](double t) { return cplx(3.0 * t, -2.0); };
    const TimeDepOp H = build_step1_eff(spec, om);
    const Vec phi = (basis_state(spec, 3, 0, 0) + basis_state(spec, 4, 0, 0)) / std::sqrt(2.0);
    const SpMat Ht = H.at(0.5);
    CHECK(std::abs(element(Ht, phi, basis_state(spec, 0, 0, 0)) - std::conj(om(0.5))) < 1e-14);
    CHECK((Ht * basis_state(spec, 1, 0, 0)).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(to_dense(Ht));
    CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(std::abs(om(0.5))));
    CHECK(es.eigenvalues().minCoeff() == doctest::Approx(-std::abs(om(0.5))));
}

TEST_CASE("step-2 reduced model displaces the conditioned cavity") {
    const ProtocolParams p = derive_params(2, SystemParams::defaults(2), 0.01, 15.0);
    CHECK(p.alpha0 / p.T2 == doctest::Approx(4.709).epsilon(1e-3));
    CHECK(p.sys.lambda * p.omega_s2_amp / p.sys.Delta == doctest::Approx(p.alpha0 / p.T2).epsilon(1e-12));
    const HilbertSpec spec(20);
    const TimeDepOp H = build_step2_eff(spec, p);
    const SpMat H1 = H.at(p.tau1);
    CHECK(std::abs(element(H1, basis_state(spec, 4, 1, 0), basis_state(spec, 4, 0, 0))) ==
          doctest::Approx(p.alpha0 / p.T2));
    CHECK(element(H1, basis_state(spec, 3, 0, 0), basis_state(spec, 4, 0, 0)) == cplx(0.0));

    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    const Vec out = evolve_state(H, basis_state(spec, 4, 0, 0), p.tau1, p.tau2, cfg);
    const Vec want = product_state(spec, 4, coherent_state(p.alpha0, 20), Vec::Unit(20, 0));
    CHECK(std::abs(want.dot(out)) >= 1 - 1e-6);
}

TEST_CASE("step-3 reduced model") {
    const ProtocolParams p = derive_params(4, SystemParams::defaults(4), 0.01, 15.0);
    const HilbertSpec spec(18);
    const CoefFn om = [](double) { return cplx(0.4, 0.1); };
    const SpMat H = build_step3_reduced(spec, p, om).at(5.0);
    const Vec coh = coherent_state(p.alpha0, 18);
    const Vec vac = Vec::Unit(18, 0);
    const Vec s3 = product_state(spec, 3, vac, coh) / coh.norm();
    CHECK(std::abs(element(H, basis_state(spec, 0, 0, 4), s3) - om(0)) < 1e-12);
    const Vec v = basis_state(spec, 3, 0, 0) + basis_state(spec, 4, 0, 0);
    CHECK((H * v).norm() == doctest::Approx(std::sqrt(2.0) * std::abs(om(0)) * std::exp(-2.0)).epsilon(1e-5));
    CHECK(hermiticity_defect(H) < 1e-14);
}

TEST_CASE("crosstalk") {
    const HilbertSpec spec(3);
    const double l12 = 1.3, D = 7.0, t = 0.2;
    const SpMat H = build_crosstalk(spec, l12, D).at(t);
    CHECK(std::abs(element(H, basis_state(spec, 2, 1, 0), basis_state(spec, 2, 0, 1)) -
                   l12 * std::exp(cplx(0, D * t))) < 1e-14);
    const Ops o(spec);
    const Mat n = to_dense(SpMat(o.n1 + o.n2));
    const Mat Hd = to_dense(H);
    CHECK(max_abs(Hd * n - n * Hd) < 1e-12);
    CHECK(build_crosstalk(spec, 0.0, D).at(t).norm() == 0.0);
    const SpMat disp = crosstalk_dispersive(spec, l12, D);
    CHECK(element(disp, basis_state(spec, 0, 1, 0), basis_state(spec, 0, 1, 0)).real() ==
          doctest::Approx(l12 * l12 / D));
}

TEST_CASE("dispersive crosstalk tracks the exchange form") {
    const HilbertSpec spec(3);
    const double l12 = 0.5, D = 20.0, T = 5.0;
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    cfg.max_step = 0.02;
    const Vec psi0 = (basis_state(spec, 0, 0, 0) + basis_state(spec, 0, 1, 0)) / std::sqrt(2.0);
    const Vec a = evolve_state(build_crosstalk(spec, l12, D), psi0, 0.0, T, cfg);
    const Vec b = evolve_state(TimeDepOp(spec.dim(), {{crosstalk_dispersive(spec, l12, D), {}}}), psi0, 0.0, T, cfg);
    // the shift accumulates a relative phase l12^2 T / D = 0.0625 rad
    CHECK(std::abs(psi0.dot(b)) < 1 - 1e-4);
    CHECK(std::norm(a.dot(b)) > 1 - 4 * (l12 / D) * (l12 / D));
}

#include <doctest.h>

#include <cmath>

#include "noonsim/protocol.hpp"

using namespace noonsim;

TEST_CASE("derived parameters for N = 2") {
    const ProtocolParams p = derive_params(2, SystemParams::defaults(2), 0.01, 15.0);
    CHECK(p.delta0 / kTwoPi == doctest::Approx(4.000).epsilon(1e-4));
    CHECK(p.omega_s2 / kTwoPi == doctest::Approx(3.330).epsilon(1e-3));
    CHECK(p.T2 == doctest::Approx(0.3003).epsilon(1e-3));
    CHECK(p.tau2 == doctest::Approx(0.31).epsilon(2e-3));
    CHECK(p.omega_s2_amp == doctest::Approx(p.alpha0 * p.sys.Delta / (p.sys.lambda * p.T2)));
    CHECK(p.omega_p3 == doctest::Approx(-p.omega_s2 * p.alpha0 * p.sys.Delta / p.sys.lambda));
}

TEST_CASE("derived parameters for N = 4") {
    const ProtocolParams p = derive_params(4, SystemParams::defaults(4), 0.01, 15.0);
    CHECK(p.delta0 / kTwoPi == doctest::Approx(2.8356).epsilon(1e-4));
    CHECK(p.omega_s2 / kTwoPi == doctest::Approx(2.1656).epsilon(1e-4));
    CHECK(p.T2 == doctest::Approx(0.4618).epsilon(1e-4));
    CHECK(p.eps_n0 == doctest::Approx(0.4420).epsilon(1e-4));
    CHECK(std::abs(p.sys.Delta / p.sys.lambda) == doctest::Approx(45.85).epsilon(1e-3));
    CHECK(p.delta_tilde == doctest::Approx(4 * p.omega_s2 - p.omega_p3 * p.omega_p3 / p.sys.Delta - p.delta0));
    for (int N = 1; N <= 6; ++N) {
        const ProtocolParams q = derive_params(N, SystemParams::defaults(N), 0.01, 15.0);
        CHECK(std::abs(q.eps_n0 - std::abs(displacement(std::sqrt(double(N)), 50)(N, 0))) < 1e-10);
    }
}

TEST_CASE("rwa margins") {
    const ProtocolParams p = derive_params(4, SystemParams::defaults(4), 0.01, 15.0);
    const auto m = rwa_report(p, PulseShape::pi);
    CHECK(m[0].value == doctest::Approx(8.8).epsilon(0.01));
    CHECK(m[0].warn);
    CHECK(m[3].value == doctest::Approx(45.85).epsilon(1e-3));
    CHECK_FALSE(m[3].warn);
    CHECK(m[4].value > 100);
}

TEST_CASE("parameter validation") {
    SystemParams s = SystemParams::defaults(4);
    CHECK_THROWS_AS(derive_params(4, s, 0.01, 0.3), ScheduleError);
    SystemParams wrong = s;
    wrong.delta_p = -kTwoPi * 5;
    CHECK_THROWS_AS(derive_params(4, wrong, 0.01, 15.0), ParameterError);
    SystemParams near = s;
    near.Delta = 5 * near.lambda;
    CHECK_THROWS_AS(derive_params(4, near, 0.01, 15.0), ParameterError);
    CHECK_THROWS_AS(derive_params(0, s, 0.01, 15.0), ParameterError);
    CHECK_THROWS_AS(parse_model("exact"), ConfigError);
    CHECK(parse_model("hybrid") == Model::hybrid);
}

TEST_CASE("target states") {
    const ProtocolParams p = derive_params(4, SystemParams::defaults(4), 0.01, 15.0);
    const HilbertSpec spec(20);
    const Vec t1 = target_state(1, p, spec);
    CHECK(std::abs(t1(spec.index(3, 0, 0)) - 1 / std::sqrt(2.0)) < 1e-15);
    const Vec t3 = target_state(3, p, spec);
    CHECK(std::abs(t3(spec.index(0, 4, 0))) == doctest::Approx(1 / std::sqrt(2.0)));
    const Vec t2 = target_state(2, p, spec);
    CHECK(std::abs(t1.dot(t2)) == doctest::Approx(std::exp(-2.0)).epsilon(1e-6));
    CHECK(t2.norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(target_state(4, p, spec), DomainError);
}

TEST_CASE("effective model is exact") {
    for (int N : {2, 3, 4}) {
        const ProtocolParams p = derive_params(N, SystemParams::defaults(N), 0.01, 15.0);
        RunOptions o;
        o.model = Model::effective;
        o.samples = 31;
        const SimResult r = run_protocol(p, o);
        for (int k = 0; k < 3; ++k) CHECK(r.F_final[k] >= 1 - 1e-6);
        CHECK(r.t.size() == 31);
        CHECK(r.t.back() == 15.0);
        CHECK(r.norm_drift < 1e-8);
    }
}

TEST_CASE("step-3 resonance under the dispersive model") {
    const ProtocolParams p = derive_params(4, SystemParams::defaults(4), 0.01, 15.0);
    const HilbertSpec spec(18);
    CHECK(step3_resonance_mismatch(p, spec) < 0.01 * step3_peak(p, PulseShape::optimized));
    const ProtocolParams off = derive_params(4, SystemParams::defaults(4), 0.01, 15.0, 1.0, kTwoPi);
    CHECK(step3_resonance_mismatch(off, spec) > 1.0);
}

TEST_CASE("decoherence needs a model with decay channels") {
    const ProtocolParams p = derive_params(2, SystemParams::defaults(2), 0.01, 15.0);
    RunOptions o;
    o.deco.gamma_d = 1e-3;
    o.decoherence_model = Model::effective;
    CHECK_THROWS_AS(run_protocol(p, o), ConfigError);
}

TEST_CASE("partial runs stop at a step boundary") {
    const ProtocolParams p = derive_params(3, SystemParams::defaults(3), 0.01, 15.0);
    RunOptions o;
    o.model = Model::dispersive;
    o.last_step = 1;
    o.samples = 5;
    const SimResult r = run_protocol(p, o);
    CHECK(r.t.back() == doctest::Approx(p.tau1));
    CHECK(r.F_final[0] > 0.999);
    CHECK(r.F_final[2] == 0.0);
}

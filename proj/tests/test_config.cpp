#include <doctest.h>

#include <cmath>

#include "noonsim/config.hpp"
#include "noonsim/sweeps.hpp"

using namespace noonsim;
using nlohmann::json;

TEST_CASE("defaults follow the reference device for N") {
    const Config c = parse_config(json::parse(R"({"protocol": {"N": 2}})"));
    CHECK(c.system.lambda_mhz == 141.42);
    CHECK(c.system.Delta_ghz == 5.00);
    CHECK(c.model == "original");
    const ProtocolParams p = to_params(c);
    CHECK(p.delta0 / kTwoPi == doctest::Approx(4.0).epsilon(1e-4));
}

TEST_CASE("resolved config round-trips") {
    const Config c = parse_config(json::parse(R"({
        "protocol": {"N": 3, "pulse_shape": "pi", "model": "hybrid", "delta_tilde_offset_mhz": 0.25},
        "errors": {"delta": 0.05, "delta_omega_mhz": 1.5},
        "decoherence": {"gamma_kappa_khz": 1.0, "kappa_phi_hz": 40},
        "integrator": {"seed": 99, "trajectories": 16},
        "output": {"samples": 41}})"));
    const json j = to_json(c);
    const Config back = parse_config(json::parse(j.dump()));
    CHECK(to_json(back) == j);
    CHECK(config_hash(back) == config_hash(c));
    const RunOptions o = to_run_options(c);
    CHECK(o.errors.delta_omega == doctest::Approx(1.5));
    CHECK(o.deco.gamma_kappa == doctest::Approx(1e-3));
    CHECK(o.deco.kappa_phi == doctest::Approx(kTwoPi * 40e-6));
    CHECK(o.trajectories.seed == 99);
    CHECK(o.samples == 41);
    CHECK(to_params(c).delta_tilde_offset == doctest::Approx(kTwoPi * 0.25));
}

TEST_CASE("config errors name the field") {
    auto message = [](const char* text) {
        try {
            parse_config(json::parse(text));
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message(R"({"protocol": {}})").find("protocol.N") != std::string::npos);
    CHECK(message(R"({"protocol": {"N": 4, "colour": 1}})").find("protocol.colour") != std::string::npos);
    CHECK(message(R"({"protocol": {"N": 4}, "extras": {}})").find("extras") != std::string::npos);
    CHECK(message(R"({"protocol": {"N": "four"}})").find("protocol.N") != std::string::npos);
    CHECK(message(R"({"protocol": {"N": 4}, "errors": {"delta": 0.5}})").find("delta") != std::string::npos);
    CHECK(message(R"({"protocol": {"N": 4}, "decoherence": {"model": "effective"}})").find("decoherence.model") !=
          std::string::npos);
    CHECK(message(R"({"protocol": {"N": 4}, "system": {"level_freq_ghz": [0, 1]}})").find("level_freq_ghz") !=
          std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("sweep grid and units") {
    SweepSpec s;
    s.param = "delta";
    s.lo = -0.2;
    s.hi = 0.2;
    s.points = 21;
    const auto v = s.values();
    CHECK(v.size() == 21);
    CHECK(v.front() == -0.2);
    CHECK(v.back() == 0.2);
    CHECK(v[10] == doctest::Approx(0.0));
    s.points = 1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.points = 3;
    s.param = "temperature";
    CHECK_THROWS_AS(s.validate(), ConfigError);

    RunOptions o;
    apply_parameter(o, "delta_lambda", 0.5);
    CHECK(o.errors.delta_lambda == doctest::Approx(0.5));
    apply_parameter(o, "gamma_r", 25);
    CHECK(o.deco.gamma_r == doctest::Approx(0.025));
    CHECK_THROWS_AS(apply_parameter(o, "crosstalk_ratio", 0.05), ParameterError);
    CHECK_THROWS_AS(apply_parameter(o, "gamma_d", -1), ParameterError);
}

TEST_CASE("sweeps keep grid order and are independent of parallelism") {
    SweepSpec s;
    s.param = "delta";
    s.lo = -0.2;
    s.hi = 0.2;
    s.points = 5;
    s.params = derive_params(2, SystemParams::defaults(2), 0.01, 15.0);
    s.base.model = Model::effective;
    s.base.samples = 3;
    s.jobs = 1;
    const auto a = run_sweep(s);
    s.jobs = 3;
    const auto b = run_sweep(s);
    REQUIRE(a.size() == 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].ok);
        CHECK(a[i].value == b[i].value);
        CHECK(a[i].F3 == b[i].F3);
    }
    CHECK(a[2].F3 >= 1 - 1e-6);
    CHECK(a[0].F3 < a[2].F3);
}

TEST_CASE("scenario rows") {
    const ProtocolParams p = derive_params(2, SystemParams::defaults(2), 0.01, 15.0);
    RunOptions base;
    base.model = Model::effective;
    base.samples = 3;
    std::vector<ScenarioRow> rows(2);
    rows[1].crosstalk_ratio = 0.05;  // outside the validated range: recorded, not fatal
    const auto out = run_scenarios(rows, p, base, 2);
    CHECK(out[0].ok);
    CHECK(std::abs(out[0].F3 - run_protocol(p, base).F_final[2]) < 1e-9);
    CHECK_FALSE(out[1].ok);
    CHECK(out[1].error.find("crosstalk") != std::string::npos);
}

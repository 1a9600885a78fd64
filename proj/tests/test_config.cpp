#include <string>

#include "doctest.h"
#include "lsgb/config.hpp"
#include "lsgb/error.hpp"

using namespace lsgb;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "case.json");
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
    const AppConfig c = parse_config("{}");
    CHECK(c.kind == ConfigKind::Garcke);
    CHECK(c.formulation == Formulation::HeterogeneousSource);
    CHECK(c.h == 5e-3);
    const RunOptions o = c.run_options();
    CHECK(o.solver.dt == doctest::Approx(default_time_step(5e-3)));
    CHECK(o.solver.eps_heaviside == doctest::Approx(1e-2));
    CHECK(o.solver.band_width == doctest::Approx(0.1));
    CHECK(o.solver.source_treatment == SourceTreatment::Coupled);
    CHECK(c.sweep_tuples.empty());
}

TEST_CASE("full document") {
    const AppConfig c = parse_config(R"({
        "grid": {"h": 0.01},
        "solver": {"t_end": 0.5, "eps_cells": 1.5, "band_cells": 12, "source": "explicit",
                   "formulation": "zhao", "zhao_lambda": 300},
        "scenario": {"kind": "garcke", "r_lambda": 4, "y0": 1.2},
        "measure": {"interval": 0.02, "window": 6, "quadratic": false},
        "output": {"dir": "runs/a", "vtk_every": 3},
        "sweep": {"tuples": [[0.5, 1], [1, 0.25]], "jobs": 2}
    })");
    CHECK(c.h == 0.01);
    CHECK(c.garcke.h == 0.01);
    CHECK(c.solver.t_end == 0.5);
    CHECK(c.formulation == Formulation::ZhaoPenalized);
    CHECK(c.solver.zhao_lambda == 300);
    CHECK(c.solver.source_treatment == SourceTreatment::Explicit);
    CHECK(c.garcke.lambda_top == 1.0);
    CHECK(c.garcke.lambda_bot == doctest::Approx(0.25));
    CHECK(c.garcke.y0 == 1.2);
    CHECK(c.measure.window == 6);
    CHECK_FALSE(c.measure.angles.quadratic);
    CHECK(c.out_dir == "runs/a");
    CHECK(c.vtk_every == 3);
    CHECK(c.jobs == 2);
    REQUIRE(c.sweep_tuples.size() == 2);
    CHECK(c.sweep_tuples[1].lambda1 == 0.25);
    CHECK(c.sweep_tuples[1].lambda2 == 0.25);
    const RunOptions o = c.run_options();
    CHECK(o.solver.eps_heaviside == doctest::Approx(0.015));
    CHECK(o.solver.band_width == doctest::Approx(0.12));
    CHECK(contains(c.resolved_json(), "\"h\""));
}

TEST_CASE("energy ratio maps to lambdas") {
    const AppConfig c = parse_config(R"({"scenario": {"r_gamma": 1}})");
    CHECK(c.garcke.lambda_top == doctest::Approx(1.0));
    CHECK(c.garcke.lambda_bot == doctest::Approx(1.0));
    const AppConfig d = parse_config(R"({"scenario": {"r_gamma": 3}})");
    CHECK(d.garcke.lambda_top / d.garcke.lambda_bot == doctest::Approx(0.2));
}

TEST_CASE("resolution override") {
    AppConfig c = parse_config(R"({"grid": {"h": 0.01}, "solver": {"dt": 1e-4}})");
    CHECK(c.run_options().solver.dt == 1e-4);
    c.set_resolution(0.02);
    CHECK(c.young.h == 0.02);
    CHECK(c.circle.h == 0.02);
    CHECK(c.run_options().solver.dt == doctest::Approx(default_time_step(0.02)));
    CHECK_THROWS_AS(c.set_resolution(0.0), ConfigError);
}

TEST_CASE("presets") {
    CHECK(parse_config(R"({"sweep": {"preset": "table1"}})").sweep_tuples.size() == 24);
    const AppConfig y = parse_config(R"({"scenario": {"kind": "young"}, "sweep": {"preset": "young169"}})");
    CHECK(y.sweep_tuples.size() == 169);
    CHECK(contains(error_of(R"({"sweep": {"preset": "young169"}})"), "sweep.preset"));
    CHECK(contains(error_of(R"({"sweep": {"preset": "nope"}})"), "sweep.preset"));
}

TEST_CASE("errors") {
    SUBCASE("syntax errors carry line and column") {
        const std::string e = error_of("{\n  \"grid\": {\"h\": 0.01,}\n}");
        CHECK(contains(e, "case.json:2:"));
        CHECK_THROWS_AS(parse_config("{\"grid\": "), ConfigError);
    }
    SUBCASE("unknown keys are named with their path") {
        CHECK(contains(error_of(R"({"scenario": {"lamda_top": 0.5}})"), "scenario.lamda_top: unknown key"));
        CHECK(contains(error_of(R"({"extra": 1})"), "unknown key"));
    }
    SUBCASE("invalid values") {
        CHECK(contains(error_of(R"({"grid": {"h": -1}})"), "grid.h"));
        CHECK(contains(error_of(R"({"grid": {"h": "fine"}})"), "grid.h"));
        CHECK(contains(error_of(R"({"solver": {"source": "magic"}})"), "solver.source"));
        CHECK(contains(error_of(R"({"solver": {"formulation": "magic"}})"), "solver.formulation"));
        CHECK(contains(error_of(R"({"solver": {"eps_cells": 5, "band_cells": 6}})"), "solver.band_cells"));
        CHECK(contains(error_of(R"({"scenario": {"kind": "hexagon"}})"), "scenario.kind"));
        CHECK(contains(error_of(R"({"scenario": {"lambda_top": 2}})"), "scenario.lambda_top"));
        CHECK(contains(error_of(R"({"scenario": {"r_lambda": 1, "r_gamma": 1}})"), "scenario.r_gamma"));
        CHECK(contains(error_of(R"({"measure": {"r_in_cells": 5, "r_out_cells": 4}})"), "measure.r_out_cells"));
        CHECK(contains(error_of(R"({"sweep": {"tuples": [[1]]}})"), "sweep.tuples[0]"));
        CHECK(contains(error_of(R"({"sweep": {"tuples": [[1, 0]]}})"), "sweep.tuples[0]"));
    }
    SUBCASE("wetting limit") {
        CHECK_THROWS_AS(parse_config(R"({"scenario": {"r_gamma": 0.5}})"), WettingLimitError);
        CHECK_THROWS_AS(parse_config(R"({"scenario": {"r_lambda": -2}})"), WettingLimitError);
        CHECK(contains(error_of(R"({"scenario": {"r_gamma": 0.3}})"), "wetting limit"));
    }
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

}

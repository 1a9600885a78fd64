#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lsgb/acceptance.hpp"
#include "lsgb/analytic.hpp"
#include "lsgb/error.hpp"
#include "lsgb/scenarios.hpp"

using namespace lsgb;
using namespace lsgb::analytic;

namespace {

constexpr double pi = std::numbers::pi;

/// Sine-law residual with the angle sum eliminated; solved by a scan over
/// (xi1, xi2) followed by Newton with an analytic Jacobian.
std::array<double, 3> sine_law_oracle(double g01, double g02, double g12) {
    auto f = [&](double a, double b) {
        const double c = 2 * pi - a - b;
        return std::array<double, 2>{std::sin(c) * g02 - std::sin(a) * g12, std::sin(c) * g01 - std::sin(b) * g12};
    };
    double a = 0, b = 0, best = 1e300;
    for (int i = 1; i < 300; ++i)
        for (int j = 1; j < 300; ++j) {
            const double x = pi * i / 300, y = pi * j / 300, z = 2 * pi - x - y;
            if (z <= 0 || z >= pi) continue;
            const auto r = f(x, y);
            // Normalized so the degenerate corners with vanishing sines do not win.
            const double n = std::hypot(r[0], r[1]) / (std::sin(x) + std::sin(y) + std::sin(z));
            if (n < best) {
                best = n;
                a = x;
                b = y;
            }
        }
    for (int it = 0; it < 60; ++it) {
        const auto r = f(a, b);
        const double c = 2 * pi - a - b;
        const double j00 = -std::cos(c) * g02 - std::cos(a) * g12, j01 = -std::cos(c) * g02;
        const double j10 = -std::cos(c) * g01, j11 = -std::cos(c) * g01 - std::cos(b) * g12;
        const double det = j00 * j11 - j01 * j10;
        const double da = (r[0] * j11 - r[1] * j01) / det, db = (j00 * r[1] - j10 * r[0]) / det;
        a -= da;
        b -= db;
        if (std::abs(da) + std::abs(db) < 1e-15) break;
    }
    return {2 * pi - a - b, a, b};
}

}  // namespace

TEST_SUITE("analytic") {

TEST_CASE("garcke angle") {
    CHECK(garcke_angle(1.0) == doctest::Approx(2 * pi / 3).epsilon(1e-14));
    CHECK(garcke_angle(3.0) == doctest::Approx(2.80669649515041457).epsilon(1e-14));
    CHECK(garcke_angle(0.5 + 1e-12) < 1e-5);
    CHECK_THROWS_AS(garcke_angle(0.5), WettingLimitError);
    CHECK_THROWS_AS(garcke_angle(0.2), WettingLimitError);
    for (double rg : {0.51, 0.8, 1.0, 2.5, 40.0}) CHECK(gamma_ratio_from_angle(garcke_angle(rg)) == doctest::Approx(rg));
}

TEST_CASE("garcke velocity") {
    CHECK(garcke_velocity(pi) == doctest::Approx(0.0));
    CHECK(garcke_velocity(2 * pi / 3) == doctest::Approx(1.0471975511965976).epsilon(1e-14));
    CHECK(garcke_velocity(1e-12) == doctest::Approx(pi));
    CHECK(garcke_velocity(2 * pi / 3, 2.0, 0.5, 1.0) == doctest::Approx(pi / 3));
    CHECK(garcke_velocity(2 * pi / 3, 1.0, 1.0, 2.0) == doctest::Approx(pi / 6));
}

TEST_CASE("garcke profile") {
    for (double x : {-0.5, 0.5}) CHECK(garcke_profile(x, 0.37, 1.3) == doctest::Approx(0.37 * 1.3));
    CHECK(garcke_profile(0.0, 0.0, pi / 3) == doctest::Approx(-0.137358071608865113).epsilon(1e-13));
    CHECK(std::abs(garcke_profile(0.1, 5.0, 1e-9)) < 1e-8);
    CHECK_THROWS(garcke_profile(0.0, 0.0, pi));
    CHECK_THROWS(garcke_profile(0.7, 0.0, 1.0));
    // Even in x, lowest at the junction, rising toward the walls.
    for (double v : {0.3, 1.0, 2.5}) {
        double prev = garcke_profile(0.0, 0.2, v);
        for (double x = 0.01; x <= 0.5; x += 0.01) {
            const double y = garcke_profile(x, 0.2, v);
            CHECK(y == doctest::Approx(garcke_profile(-x, 0.2, v)).epsilon(1e-15));
            CHECK(y >= prev);
            prev = y;
        }
    }
    // Dimensional form with unit parameters reduces to the dimensionless one.
    CHECK(garcke_profile(0.2, 0.3, 1.1, 1.0, 1.0, 1.0) == doctest::Approx(garcke_profile(0.2, 0.3, 1.1)));
}

TEST_CASE("ratio conversions") {
    CHECK(lambda_ratio_from_gamma_ratio(1.0) == doctest::Approx(1.0));
    CHECK(lambda_ratio_from_gamma_ratio(3.0) == doctest::Approx(0.2));
    CHECK(lambda_ratio_from_gamma_ratio(0.6) == doctest::Approx(5.0));
    CHECK(gamma_ratio_from_lambda_ratio(1e3) == doctest::Approx(0.5005).epsilon(1e-14));
    CHECK_THROWS_AS(lambda_ratio_from_gamma_ratio(0.5), WettingLimitError);
    CHECK_THROWS_AS(gamma_ratio_from_lambda_ratio(0.0), WettingLimitError);
    for (double rg = 0.5 + 1e-6; rg <= 1e3; rg *= 1.37)
        CHECK(gamma_ratio_from_lambda_ratio(lambda_ratio_from_gamma_ratio(rg)) == doctest::Approx(rg).epsilon(1e-12));
}

TEST_CASE("table pipeline lands on the line") {
    for (const auto& t : table1_tuples()) {
        const GarckePoint p = garcke_from_lambda_ratio(t.lambda0 / t.lambda1);
        CHECK(deviation_from_line(p.xi0, p.v) < 1e-12);
        const GarckePoint q = garcke_from_gamma_ratio(p.r_gamma);
        CHECK(q.r_lambda == doctest::Approx(p.r_lambda).epsilon(1e-10));
    }
}

TEST_CASE("young angles") {
    for (double x : young_angles(1, 1, 1)) CHECK(x == doctest::Approx(2 * pi / 3).epsilon(1e-14));
    for (double gt : {0.55, 0.8, 1.0, 2.0, 7.0})
        CHECK(std::abs(young_angles(gt, gt, 1.0)[0] - garcke_angle(gt)) < 1e-12);
    CHECK_THROWS_AS(young_angles(0.4, 0.5, 1.0), WettingLimitError);
    CHECK_THROWS_AS(young_angles(-1.0, 0.5, 1.0), ConfigError);

    const auto a = young_angles(1.2, 0.9, 1.0);
    const auto s = young_angles(3.6, 2.7, 3.0);
    for (int k = 0; k < 3; ++k) CHECK(a[k] == doctest::Approx(s[k]).epsilon(1e-14));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.3, 2.0);
    int tested = 0;
    while (tested < 100) {
        const double g01 = u(rng), g02 = u(rng), g12 = u(rng);
        if (!(g01 + g02 > g12 + 0.05 && g01 + g12 > g02 + 0.05 && g02 + g12 > g01 + 0.05)) continue;
        const auto closed = young_angles(g01, g02, g12);
        const auto oracle = sine_law_oracle(g01, g02, g12);
        const auto force = young_angles_by_root_search(g01, g02, g12);
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(closed[k] - oracle[k]) < 1e-8);
            CHECK(std::abs(closed[k] - force[k]) < 1e-8);
        }
        CHECK(closed[0] + closed[1] + closed[2] == doctest::Approx(2 * pi).epsilon(1e-14));
        CHECK(std::sin(closed[0]) / g12 == doctest::Approx(std::sin(closed[1]) / g02).epsilon(1e-12));
        CHECK(std::sin(closed[0]) / g12 == doctest::Approx(std::sin(closed[2]) / g01).epsilon(1e-12));
        ++tested;
    }
    const auto o = sine_law_oracle(1.2, 0.9, 1.0);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(a[k] - o[k]) < 1e-8);
}

TEST_CASE("deviation from the line") {
    CHECK(deviation_from_line(2 * pi / 3, pi / 3) == doctest::Approx(0.0));
    CHECK(deviation_from_line(2 * pi / 3, pi / 3 + 0.1) == doctest::Approx(0.0707106781186548).epsilon(1e-12));
    CHECK(deviation_from_line(pi, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("degree conversion") {
    CHECK(degrees(pi) == doctest::Approx(180.0));
    CHECK(radians(90.0) == doctest::Approx(pi / 2));
}

}

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lsgb/error.hpp"
#include "lsgb/levelset.hpp"
#include "lsgb/measure.hpp"
#include "lsgb/scenarios.hpp"

using namespace lsgb;

namespace {

constexpr double pi = std::numbers::pi;

Grid2 unit_grid(double h) { return Grid2::covering(0.0, 1.0, 0.0, 1.0, h); }

ScalarField circle_field(const Grid2& g, double r, double scale = 1.0) {
    ScalarField f(g);
    for (std::size_t k = 0; k < f.size(); ++k) {
        const Point2 p = g.node(k);
        f[k] = scale * (r - std::hypot(p.x - 0.5, p.y - 0.5));
    }
    return f;
}

/// Mean of the field sampled on the zero contour of psi.
double mean_on_contour(const ScalarField& f, const ScalarField& psi) {
    const Contour c = extract_contour(psi);
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& line : c.polylines)
        for (const Point2& p : line) {
            s += f.sample(p);
            ++n;
        }
    return s / static_cast<double>(n);
}

}  // namespace

TEST_SUITE("levelset") {

TEST_CASE("heaviside values") {
    const double eps = 0.02;
    CHECK(heaviside(-2 * eps, eps) == 0.0);
    CHECK(heaviside(2 * eps, eps) == 1.0);
    CHECK(heaviside(0.0, eps) == doctest::Approx(0.5));
    CHECK(heaviside(eps / 2, eps) == doctest::Approx(0.75 + 1.0 / (2.0 * pi)).epsilon(1e-14));
    for (double x = -3 * eps; x <= 3 * eps; x += eps / 7) {
        CHECK(heaviside(-x, eps) == doctest::Approx(1.0 - heaviside(x, eps)).epsilon(1e-14));
        // Derivative against a central difference.
        const double d = 1e-7;
        if (std::abs(std::abs(x) - eps) > 2 * d)
            CHECK(heaviside_derivative(x, eps) ==
                  doctest::Approx((heaviside(x + d, eps) - heaviside(x - d, eps)) / (2 * d)).epsilon(1e-5));
    }
    const Grid2 g = unit_grid(0.05);
    const ScalarField psi = circle_field(g, 0.3);
    ScalarField neg = psi;
    for (std::size_t k = 0; k < neg.size(); ++k) neg[k] = -neg[k];
    const ScalarField a = heaviside_smoothed(psi, 0.1), b = heaviside_smoothed(neg, 0.1);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(b[k] == doctest::Approx(1.0 - a[k]).epsilon(1e-14));
    CHECK_THROWS_AS(heaviside_smoothed(psi, 0.0), ConfigError);
}

TEST_CASE("signed distance initialization") {
    const Grid2 g = unit_grid(0.01);
    const ScalarField d = init_signed_distance(Circle{{0.5, 0.5}, 0.25, true}, g);
    for (std::size_t k = 0; k < d.size(); k += 37) {
        const Point2 p = g.node(k);
        CHECK(d[k] == doctest::Approx(0.25 - std::hypot(p.x - 0.5, p.y - 0.5)).epsilon(1e-12));
    }
    const ScalarField o = init_signed_distance(Circle{{0.5, 0.5}, 0.25, false}, g);
    CHECK(o(50, 50) == doctest::Approx(-0.25));

    GarckeScenario scn;
    scn.y0 = 0.5;
    scn.stop_height = 0.2;
    scn.h = 0.01;
    const Microstructure ms = build_garcke(scn);
    auto at = [&](int phase, double x, double y) {
        const Grid2& gg = ms.grid;
        const int i = static_cast<int>(std::lround((x - gg.origin().x) / gg.h()));
        const int j = static_cast<int>(std::lround((y - gg.origin().y) / gg.h()));
        return ms.phases[phase].psi(i, j);
    };
    CHECK(at(0, 0.25, 0.7) == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(at(1, -0.1, 0.3) == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(at(1, -0.3, 0.45) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(at(2, -0.1, 0.3) == doctest::Approx(-0.1).epsilon(1e-9));
}

TEST_CASE("curvature of circles and lines") {
    const double h = 0.005;
    const Grid2 g = unit_grid(h);
    const double r = 0.2;
    const ScalarField psi = circle_field(g, r);
    const ScalarField kappa = curvature(psi);
    CHECK(mean_on_contour(kappa, psi) == doctest::Approx(1.0 / r).epsilon(0.05));
    for (double s : {-0.08, -0.04, 0.04, 0.08}) {
        ScalarField shifted = psi;
        for (std::size_t k = 0; k < shifted.size(); ++k) shifted[k] -= s;
        CHECK(mean_on_contour(kappa, shifted) == doctest::Approx(1.0 / (r - s)).epsilon(0.1));
    }
    ScalarField flat(g);
    for (std::size_t k = 0; k < flat.size(); ++k) flat[k] = g.node(k).y - 0.5;
    const ScalarField kf = curvature(flat);
    for (int j = 1; j < g.ny() - 1; ++j) CHECK(std::abs(kf(50, j)) < 1e-9);
}

TEST_CASE("reinitialization") {
    const double h = 0.01;
    const Grid2 g = unit_grid(h);
    const double band = 0.15;

    SUBCASE("line distance is a fixed point") {
        ScalarField line(g);
        for (std::size_t k = 0; k < line.size(); ++k) {
            const Point2 p = g.node(k);
            line[k] = 0.6 * p.x + 0.8 * p.y - 0.7;
        }
        const ScalarField r = reinitialize(line, band);
        // Only nodes whose foot point lies inside the domain see the untruncated line.
        // Closest points are refined within 8 cells and propagated beyond.
        auto inside = [&](double v) { return v > 2 * h && v < 1 - 2 * h; };
        for (std::size_t k = 0; k < line.size(); ++k) {
            const Point2 foot = g.node(k) - line[k] * Point2{0.6, 0.8};
            if (std::abs(line[k]) < band - h && inside(foot.x) && inside(foot.y))
                CHECK(std::abs(r[k] - line[k]) <= (std::abs(line[k]) < 8 * h ? h * h : 0.05 * h));
        }
    }

    SUBCASE("doubled and distorted distances recover the distance") {
        const ScalarField exact = circle_field(g, 0.3);
        ScalarField distorted(g);
        for (std::size_t k = 0; k < g.size(); ++k) {
            const Point2 p = g.node(k);
            const double theta = std::atan2(p.y - 0.5, p.x - 0.5);
            distorted[k] = exact[k] * (1.25 + 0.7 * std::sin(3 * theta));  // |grad| in about [0.5, 2]
        }
        ScalarField doubled = exact;
        for (std::size_t k = 0; k < g.size(); ++k) doubled[k] *= 2.0;
        const ScalarField rd = reinitialize(doubled, band);
        const ScalarField rs = reinitialize(distorted, band);
        const ScalarField gn = gradient_norm(rs);
        for (int j = 1; j < g.ny() - 1; ++j)
            for (int i = 1; i < g.nx() - 1; ++i) {
                const std::size_t k = g.index(i, j);
                if (std::abs(exact[k]) > band - 2 * h) continue;
                CHECK(std::abs(rd[k] - exact[k]) < 0.1 * h);
                CHECK(std::abs(rs[k] - exact[k]) < 0.1 * h);
                CHECK(gn[k] == doctest::Approx(1.0).epsilon(0.05));
            }
    }

    SUBCASE("idempotent within the band") {
        const ScalarField once = reinitialize(circle_field(g, 0.27, 1.6), band);
        const ScalarField twice = reinitialize(once, band);
        for (std::size_t k = 0; k < g.size(); ++k)
            if (std::abs(once[k]) < band) CHECK(std::abs(twice[k] - once[k]) <= 10 * h * h);
    }

    SUBCASE("clamped outside the band") {
        const ScalarField r = reinitialize(circle_field(g, 0.3), 0.05);
        CHECK(r.max_abs() == doctest::Approx(0.05));
    }

    SUBCASE("curvature of redistanced circles scales as 1/r") {
        for (double radius : {0.1, 0.2, 0.3}) {
            const ScalarField psi = reinitialize(circle_field(g, radius, 0.5), band);
            CHECK(mean_on_contour(curvature(psi), psi) * radius == doctest::Approx(1.0).epsilon(0.1));
        }
    }

    CHECK_THROWS_AS(reinitialize(ScalarField(g, 1.0), band), GeometryError);
}

TEST_CASE("upwind gradient norm is one on a medial axis") {
    const double h = 0.01;
    const Grid2 g = unit_grid(h);
    ScalarField strip(g);
    for (std::size_t k = 0; k < g.size(); ++k) strip[k] = 0.2 - std::abs(g.node(k).x - 0.5);
    const ScalarField u = upwind_gradient_norm(strip);
    for (int j = 1; j < g.ny() - 1; ++j)
        for (int i = 1; i < g.nx() - 1; ++i) CHECK(u(i, j) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("phase freezing") {
    const Grid2 g = unit_grid(0.1);
    Phase p{0, circle_field(g, 0.3), 1.0, {}, {}};
    std::vector<std::uint8_t> mask(g.size(), 0);
    mask[0] = 1;
    p.freeze(mask);
    const double held = p.psi[0];
    p.psi[0] = 42.0;
    p.psi[1] = 7.0;
    p.reimpose_frozen();
    CHECK(p.psi[0] == held);
    CHECK(p.psi[1] == 7.0);
    CHECK_THROWS_AS(p.freeze(std::vector<std::uint8_t>(3, 1)), ConfigError);
}

}

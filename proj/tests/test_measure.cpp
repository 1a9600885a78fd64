#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "lsgb/analytic.hpp"
#include "lsgb/error.hpp"
#include "lsgb/measure.hpp"

using namespace lsgb;

namespace {

constexpr double pi = std::numbers::pi;

/// Three wedge grains meeting at `c`; grain k opens by open_deg[k], grain 0
/// centred on the +y axis, grains ordered counterclockwise.
std::vector<Phase> sectors(const Grid2& g, Point2 c, std::array<double, 3> open_deg) {
    double start = 90.0 - 0.5 * open_deg[0];
    std::vector<Phase> out;
    for (int k = 0; k < 3; ++k) {
        const double a = start, b = start + open_deg[static_cast<std::size_t>(k)];
        auto ray = [&](double deg) {
            const double r = analytic::radians(deg);
            return Point2{c.x + 5.0 * std::cos(r), c.y + 5.0 * std::sin(r)};
        };
        const PolygonRegion wedge{{c, ray(a), ray(0.5 * (a + b)), ray(b)}, {true, false, false, true}};
        out.push_back(Phase{k, init_signed_distance(wedge, g), 1.0, {}, {}});
        start = b;
    }
    return out;
}

std::vector<TJRecord> linear_records(double y0, double v, int n, double dt) {
    std::vector<TJRecord> r;
    for (int k = 0; k < n; ++k) {
        TJRecord rec;
        rec.t = k * dt;
        rec.pos = {0.0, y0 + v * rec.t};
        rec.angles = {2 * pi / 3, 2 * pi / 3, 2 * pi / 3};
        r.push_back(rec);
    }
    return r;
}

}  // namespace

TEST_SUITE("measure") {

TEST_CASE("contour of a linear field") {
    const Grid2 g = Grid2::covering(0.0, 1.0, 0.0, 1.0, 0.05);
    ScalarField f(g);
    for (std::size_t k = 0; k < g.size(); ++k) f[k] = g.node(k).y - 0.52;
    const Contour c = extract_contour(f);
    REQUIRE(c.polylines.size() == 1);
    CHECK_FALSE(c.is_closed(0));
    for (const auto& p : c.polylines[0]) CHECK(std::abs(p.y - 0.52) < 1e-12);

    ScalarField slanted(g);
    for (std::size_t k = 0; k < g.size(); ++k) slanted[k] = 0.3 * g.node(k).x - g.node(k).y + 0.41;
    for (const auto& line : extract_contour(slanted).polylines)
        for (const auto& p : line) CHECK(std::abs(0.3 * p.x - p.y + 0.41) < 1e-12);

    CHECK_THROWS_AS(extract_contour(ScalarField(g, 1.0)), MeasurementError);
}

TEST_CASE("contours of circles") {
    const Grid2 g = Grid2::covering(0.0, 1.0, 0.0, 1.0, 0.01);
    const ScalarField one = init_signed_distance(Circle{{0.5, 0.5}, 0.25, true}, g);
    const Contour c = extract_contour(one);
    REQUIRE(c.polylines.size() == 1);
    CHECK(c.is_closed(0));
    CHECK(polygon_area(c.polylines[0]) == doctest::Approx(pi * 0.0625).epsilon(0.01));

    const ScalarField a = init_signed_distance(Circle{{0.25, 0.3}, 0.12, true}, g);
    const ScalarField b = init_signed_distance(Circle{{0.7, 0.65}, 0.15, true}, g);
    ScalarField two(g);
    for (std::size_t k = 0; k < g.size(); ++k) two[k] = std::max(a[k], b[k]);
    const Contour c2 = extract_contour(two);
    REQUIRE(c2.polylines.size() == 2);
    CHECK(c2.is_closed(0));
    CHECK(c2.is_closed(1));
}

TEST_CASE("polygon area") {
    const std::vector<Point2> square{{0, 0}, {2, 0}, {2, 1}, {0, 1}, {0, 0}};
    CHECK(polygon_area(square) == doctest::Approx(2.0));
}

TEST_CASE("junction location and angles of constructed sectors") {
    const double h = 0.01;
    const Grid2 g = Grid2::covering(0.0, 1.0, 0.0, 1.0, h);

    SUBCASE("three 120 degree sectors") {
        const auto ph = sectors(g, {0.3, 0.4}, {120, 120, 120});
        const Point2 tj = locate_tj(ph);
        CHECK(std::abs(tj.x - 0.3) <= h / 2);
        CHECK(std::abs(tj.y - 0.4) <= h / 2);
        const auto a = dihedral_angles(ph, tj);
        for (double x : a) CHECK(analytic::degrees(x) == doctest::Approx(120.0).epsilon(1.0 / 120));
        CHECK(a[0] + a[1] + a[2] == doctest::Approx(2 * pi).epsilon(0.05 / (2 * pi)));
    }

    SUBCASE("unequal sectors") {
        for (bool quadratic : {true, false}) {
            const auto ph = sectors(g, {0.47, 0.52}, {150, 130, 80});
            const Point2 tj = locate_tj(ph);
            AngleOptions opts;
            opts.quadratic = quadratic;
            const auto a = dihedral_angles(ph, tj, opts);
            CHECK(std::abs(analytic::degrees(a[0]) - 150) <= 1.0);
            CHECK(std::abs(analytic::degrees(a[1]) - 130) <= 1.0);
            CHECK(std::abs(analytic::degrees(a[2]) - 80) <= 1.0);
        }
    }

    SUBCASE("relabeling the lower grains swaps their angles") {
        auto ph = sectors(g, {0.5, 0.5}, {140, 110, 110});
        const auto a = dihedral_angles(ph, locate_tj(ph));
        std::swap(ph[1], ph[2]);
        const auto b = dihedral_angles(ph, locate_tj(ph));
        CHECK(analytic::degrees(std::abs(a[0] - b[0])) < 0.5);
        CHECK(analytic::degrees(std::abs(a[1] - b[2])) < 0.5);
        CHECK(analytic::degrees(std::abs(a[2] - b[1])) < 0.5);
    }

    SUBCASE("small void at the junction") {
        // Lowering every field by d opens a void whose minimax residual is d.
        for (double d : {1.5 * h, 3.0 * h}) {
            auto ph = sectors(g, {0.5, 0.5}, {120, 120, 120});
            for (auto& p : ph)
                for (std::size_t k = 0; k < g.size(); ++k) p.psi[k] -= d;
            if (d < 2.0 * h) {
                const Point2 tj = locate_tj(ph);
                CHECK(std::abs(tj.x - 0.5) <= h / 2);
                CHECK(std::abs(tj.y - 0.5) <= h / 2);
            } else {
                CHECK_THROWS_AS(locate_tj(ph), MeasurementError);
            }
        }
    }

    SUBCASE("no junction") {
        auto ph = sectors(g, {0.5, 0.5}, {120, 120, 120});
        for (std::size_t k = 0; k < g.size(); ++k) ph[2].psi[k] = -1.0;
        CHECK_THROWS_AS(locate_tj(ph), MeasurementError);
    }
}

TEST_CASE("junction velocity") {
    SUBCASE("exact line") {
        const auto r = linear_records(0.2, 1.0472, 12, 0.01);
        const VelocityEstimate e = tj_velocity(r, 10);
        REQUIRE(e.determined);
        CHECK(std::abs(e.v - 1.0472) < 1e-9);
        CHECK(std::abs(e.vx) < 1e-12);
        CHECK(e.quasi_static);
    }
    SUBCASE("accelerating transient is not quasi-static") {
        auto r = linear_records(0.2, 0.0, 10, 0.01);
        for (auto& rec : r) rec.pos.y = 0.2 + 3.0 * rec.t * rec.t;
        CHECK_FALSE(tj_velocity(r, 10).quasi_static);
    }
    SUBCASE("drifting angles are not quasi-static") {
        auto r = linear_records(0.2, 1.0, 10, 0.01);
        for (std::size_t k = 0; k < r.size(); ++k) r[k].angles[0] += analytic::radians(0.3 * static_cast<double>(k));
        CHECK_FALSE(tj_velocity(r, 10).quasi_static);
    }
    SUBCASE("too few records") {
        CHECK_FALSE(tj_velocity(linear_records(0.0, 1.0, 3, 0.01), 10).determined);
    }
}

TEST_CASE("profile sampling and comparison") {
    const double h = 0.01;
    const Grid2 g = Grid2::covering(-0.5, 0.5, 0.0, 1.0, h);
    const double y0 = 0.503;
    ScalarField top(g), left(g), right(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Point2 p = g.node(k);
        top[k] = p.y - y0;
        left[k] = std::min(y0 - p.y, -p.x);
        right[k] = std::min(y0 - p.y, p.x);
    }
    const std::vector<Phase> ph{{0, top, 1, {}, {}}, {1, left, 1, {}, {}}, {2, right, 1, {}, {}}};
    const Profile prof = sample_profile(ph, 51);
    REQUIRE(prof.x.size() == 51);
    CHECK(prof.x.front() == doctest::Approx(-0.5));
    CHECK(prof.x.back() == doctest::Approx(0.5));
    for (double y : prof.y) CHECK(std::abs(y - y0) <= h);

    // A measured profile that is the analytic one plus an offset has zero RMS.
    const double v = 1.0;
    Profile shifted;
    for (int k = 0; k <= 20; ++k) {
        const double x = -0.5 + k * 0.05;
        shifted.x.push_back(x);
        shifted.y.push_back(analytic::garcke_profile(x, 0.0, v) + 0.77);
    }
    const ProfileComparison cmp = compare_profile(shifted, v);
    CHECK(cmp.rms < 1e-12);
    CHECK(cmp.shift == doctest::Approx(-0.77));
    std::ostringstream out;
    write_profile_csv(out, cmp);
    CHECK(out.str().rfind("x,y_measured,y_analytic\n", 0) == 0);
}

TEST_CASE("vacuum and overlap report") {
    const double h = 0.01;
    const Grid2 g = Grid2::covering(0.0, 1.0, 0.0, 1.0, h);
    ScalarField a(g), b(g), c(g), d(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = g.node(k).x;
        a[k] = x - 0.5;
        b[k] = 0.5 - x;
        c[k] = x - 0.5 - 2 * h;  // strip of width 4h between c and d
        d[k] = 0.5 - 2 * h - x;
    }
    const std::vector<Phase> exact{{0, a, 1, {}, {}}, {1, b, 1, {}, {}}};
    const DefectReport r0 = vacuum_overlap_report(exact, 2 * h);
    CHECK(r0.max_vacuum < 1e-12);
    CHECK(r0.max_overlap < 1e-12);
    CHECK(r0.l1_defect < 1e-12);
    const std::vector<Phase> gap{{0, c, 1, {}, {}}, {1, d, 1, {}, {}}};
    CHECK(vacuum_overlap_report(gap, h).max_vacuum == doctest::Approx(1.0));
    const Point2 centre[1] = {{0.5, 0.5}};
    CHECK(vacuum_overlap_report(gap, h, centre, 2.0).max_vacuum == 0.0);
}

TEST_CASE("junction CSV") {
    const auto r = linear_records(0.0, 1.0, 2, 0.5);
    std::ostringstream out;
    write_tj_csv(out, r);
    CHECK(out.str().rfind("t,x,y,xi0,xi1,xi2,v,quasi_static\n", 0) == 0);
    CHECK(out.str().find("0.5,0,0.5,120,120,120,0,0") != std::string::npos);
}

}

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "doctest.h"
#include "lsgb/analytic.hpp"
#include "lsgb/error.hpp"
#include "lsgb/scenarios.hpp"

using namespace lsgb;

namespace {

constexpr double pi = std::numbers::pi;
double deg(double r) { return r * 180.0 / pi; }

/// Angle under which a point on the axis sees the two pinned ends adjacent to the top corner.
double subtended_top_angle(double y) {
    const auto tri = young_triangle();
    const Point2 a = 0.5 * (tri[0] + tri[1]), b = 0.5 * (tri[0] + tri[2]);
    const Point2 p{0.0, y};
    const Point2 u = a - p, v = b - p;
    return std::atan2(std::abs(cross(u, v)), dot(u, v));
}

SweepRow sample_row(double l1, double l2) {
    SweepRow r;
    r.key = SweepTuple{1.0, l1, l2}.key(ScenarioKind::Young);
    r.kind = "young";
    r.formulation = "hetero";
    r.lambda0 = 1.0;
    r.lambda1 = l1;
    r.lambda2 = l2;
    r.r_lambda = 1.0 / l1;
    r.xi0_deg = 121.25;
    r.xi1_deg = 118.5;
    r.xi2_deg = 120.25;
    r.v = 0.00125;
    r.deviation = 0.5;
    r.r_gamma_inferred = 1.0;
    r.gamma02 = 0.25 + l1;
    r.gamma01 = 0.5 * l2;
    r.quasi_static = true;
    r.status = "ok";
    r.message = "quasi-static";
    return r;
}

}  // namespace

TEST_SUITE("scenarios") {

TEST_CASE("garcke initial state") {
    GarckeScenario scn;
    scn.h = 0.02;
    const Microstructure ms = build_garcke(scn);
    REQUIRE(ms.phases.size() == 3);
    const Point2 tj = locate_tj(ms.phases);
    CHECK(std::abs(tj.x) <= scn.h / 2);
    CHECK(std::abs(tj.y - scn.y0) <= scn.h / 2);
    const auto a = dihedral_angles(ms.phases, tj);
    CHECK(std::abs(deg(a[0]) - 180.0) <= 2.0);
    CHECK(std::abs(deg(a[1]) - 90.0) <= 2.0);
    CHECK(std::abs(deg(a[2]) - 90.0) <= 2.0);
    const Point2 js[1] = {tj};
    const DefectReport d = vacuum_overlap_report(ms.phases, 2 * scn.h, js, 6 * scn.h);
    CHECK(d.max_vacuum < 1e-12);
    CHECK(d.max_overlap < 1e-12);

    SUBCASE("lambdas carry over") {
        scn.lambda_top = 0.3;
        scn.lambda_bot = 0.7;
        const Microstructure m = build_garcke(scn, Formulation::ZhaoPenalized);
        CHECK(m.phases[0].lambda == 0.3);
        CHECK(m.phases[1].lambda == 0.7);
        CHECK(m.phases[2].lambda == 0.7);
        CHECK(m.formulation == Formulation::ZhaoPenalized);
    }
    SUBCASE("invalid parameters") {
        scn.lambda_top = 0.0;
        CHECK_THROWS_AS(build_garcke(scn), ConfigError);
        scn.lambda_top = 1.0;
        scn.h = -1.0;
        CHECK_THROWS_AS(build_garcke(scn), ConfigError);
    }
}

TEST_CASE("young geometry") {
    const auto tri = young_triangle();
    for (int k = 0; k < 3; ++k) {
        const Point2 m = 0.5 * (tri[k] + tri[(k + 1) % 3]);
        CHECK(norm(m) == doctest::Approx(0.5));
        CHECK(distance(tri[k], tri[(k + 1) % 3]) == doctest::Approx(std::sqrt(3.0)));
    }
    CHECK(young_equilibrium_height(2 * pi / 3) == doctest::Approx(0.0).scale(1));
    for (double xi : {1.2, 1.8, 2.0, 2.3, 2.8}) CHECK(subtended_top_angle(young_equilibrium_height(xi)) == doctest::Approx(xi));
    CHECK_THROWS_AS(young_equilibrium_height(0.0), ConfigError);
    CHECK_THROWS_AS(young_equilibrium_height(pi), ConfigError);

    YoungScenario scn;
    scn.h = 0.02;
    const Microstructure ms = build_young(scn);
    const Point2 tj = locate_tj(ms.phases);
    CHECK(norm(tj) <= scn.h);
    for (double a : dihedral_angles(ms.phases, tj)) CHECK(std::abs(deg(a) - 120.0) <= 2.0);
    for (const auto& p : ms.phases) CHECK(p.has_frozen());

    // Frozen exactly where the distance to the nearest side, positive inside,
    // is below one cell.
    auto inside_distance = [&](Point2 p) {
        double d = 1e300;
        for (int k = 0; k < 3; ++k) {
            const Point2 a = tri[k], b = tri[(k + 1) % 3];
            const Point2 n = (1.0 / distance(a, b)) * Point2{b.y - a.y, a.x - b.x};
            const Point2 c = Point2{0.0, 0.0} - a;
            const double sign = (n.x * c.x + n.y * c.y) > 0 ? 1.0 : -1.0;
            d = std::min(d, sign * (n.x * (p.x - a.x) + n.y * (p.y - a.y)));
        }
        return d;
    };
    std::size_t free_nodes = 0, mismatched = 0;
    for (std::size_t k = 0; k < ms.grid.size(); ++k) {
        const double d = inside_distance(ms.grid.node(k));
        if (std::abs(d - scn.h) < 1e-9) continue;
        const bool expect_frozen = d < scn.h;
        if (ms.phases[0].is_frozen(k) != expect_frozen) ++mismatched;
        if (!ms.phases[0].is_frozen(k)) ++free_nodes;
    }
    CHECK(mismatched == 0);
    // The free region is roughly the triangle shrunk by one cell.
    const double area = 3.0 * std::sqrt(3.0) / 4.0 * std::pow(1.0 - 2.0 * scn.h, 2);
    CHECK(free_nodes * scn.h * scn.h == doctest::Approx(area).epsilon(0.1));
}

TEST_CASE("distance property on an exact quadrant distance") {
    // Signed distance to the third quadrant, positive inside. Its medial axis
    // is the diagonal x = y < 0, where the upwind norm reads sqrt(2).
    const double h = 0.01;
    const Grid2 g = Grid2::covering(-0.5, 0.5, -0.5, 0.5, h);
    ScalarField psi(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const Point2 p = g.node(i, j);
            if (p.x <= 0 && p.y <= 0) psi(i, j) = std::min(-p.x, -p.y);
            else if (p.x > 0 && p.y > 0) psi(i, j) = -std::hypot(p.x, p.y);
            else psi(i, j) = -std::max(p.x, p.y);
        }
    const Phase ph{0, psi, 1.0, {}, {}};
    const Point2 corner[1] = {Point2{0.0, 0.0}};
    const DistanceErrors e = distance_property_error(ph, 0.3, corner, 2.0 * h);
    CHECK(e.all == doctest::Approx(std::sqrt(2.0) - 1.0));
    // Elsewhere the only error is the first-order one on the rounded corner
    // outside, about h/(2r).
    CHECK(e.off_kinks <= 0.5 * h / (2.0 * h) + 1e-9);
    CHECK(e.far <= 0.5 * h / (10.0 * h) + 1e-9);
    CHECK(e.far > 0.0);
}

TEST_CASE("energy inference") {
    auto g = infer_gamma_from_measurement(2 * pi / 3, 2 * pi / 3);
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == doctest::Approx(1.0));
    // A Young triple with gamma12 = 1 is recovered from its bottom angles.
    for (auto [g02, g01] : {std::pair{0.8, 1.3}, std::pair{1.5, 0.9}, std::pair{1.0, 0.6}}) {
        const double c0 = (g02 * g02 + g01 * g01 - 1.0) / (2 * g02 * g01);
        const double c1 = (1.0 + g01 * g01 - g02 * g02) / (2 * g01);
        const double c2 = (1.0 + g02 * g02 - g01 * g01) / (2 * g02);
        const double xi1 = pi - std::acos(c1), xi2 = pi - std::acos(c2);
        CHECK(2 * pi - xi1 - xi2 == doctest::Approx(pi - std::acos(c0)));
        const auto r = infer_gamma_from_measurement(xi1, xi2);
        CHECK(r[0] == doctest::Approx(g02));
        CHECK(r[1] == doctest::Approx(g01));
    }
    CHECK_THROWS_AS(infer_gamma_from_measurement(pi, pi), MeasurementError);
}

TEST_CASE("sweep tuples") {
    const auto t1 = table1_tuples();
    CHECK(t1.size() == 24);
    std::set<std::string> keys;
    for (const auto& t : t1) {
        keys.insert(t.key(ScenarioKind::Garcke));
        CHECK(t.lambda1 == t.lambda2);
        CHECK((t.lambda0 == 1.0 || t.lambda1 == 1.0));
    }
    CHECK(keys.size() == 24);

    const auto yg = young_grid_tuples();
    CHECK(yg.size() == 169);
    int flagged = 0;
    for (const auto& t : yg) {
        CHECK(t.lambda0 == 1.0);
        flagged += boundary_influenced(t);
    }
    CHECK(flagged == 8);
    CHECK(SweepTuple{1.0, 0.5, 0.25}.key(ScenarioKind::Young) == "young:1:0.5:0.25");
}

TEST_CASE("results csv round trip") {
    SweepRow a = sample_row(0.2, 0.3);
    a.message = "has, a comma";
    SweepRow b = sample_row(0.4, 0.5);
    b.status = "error";
    b.flag = "boundary-influenced";
    b.quasi_static = false;
    std::stringstream s;
    s << sweep_csv_header() << '\n' << to_csv_line(a) << '\n' << to_csv_line(b) << '\n';
    const auto rows = read_sweep_csv(s);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].key == a.key);
    CHECK(rows[0].gamma02 == a.gamma02);
    CHECK(rows[0].xi0_deg == a.xi0_deg);
    CHECK(rows[0].v == a.v);
    CHECK(rows[0].quasi_static);
    CHECK(rows[0].message.find(',') == std::string::npos);
    CHECK(rows[1].status == "error");
    CHECK(rows[1].flag == "boundary-influenced");
    CHECK_FALSE(rows[1].quasi_static);

    std::stringstream bad_header("key,kind\n");
    CHECK_THROWS_AS(read_sweep_csv(bad_header), ConfigError);
    std::stringstream short_row(sweep_csv_header() + "\nyoung:1:1:1,young\n");
    CHECK_THROWS_AS(read_sweep_csv(short_row), ConfigError);
}

TEST_CASE("sweep bookkeeping") {
    const auto dir = std::filesystem::temp_directory_path() / "lsgb_sweep_test";
    std::filesystem::remove_all(dir);
    SweepSpec spec;
    spec.kind = ScenarioKind::Young;
    spec.tuples = {{1.0, 0.2, 0.3}, {1.0, 0.4, 0.5}, {1.0, 0.0, 0.5}};
    spec.results_path = (dir / "results.csv").string();
    spec.resume = true;
    {
        std::filesystem::create_directories(dir);
        std::ofstream out(spec.results_path);
        out << sweep_csv_header() << '\n' << to_csv_line(sample_row(0.4, 0.5)) << '\n'
            << to_csv_line(sample_row(0.2, 0.3)) << '\n';
    }
    // Two tuples are already done; the third has an invalid lambda and becomes an error row.
    const SweepSummary s = run_sweep(spec);
    CHECK(s.skipped == 2);
    CHECK(s.ran == 1);
    CHECK(s.failed == 1);
    REQUIRE(s.rows.size() == 3);
    CHECK(s.rows[0].lambda1 == 0.2);
    CHECK(s.rows[1].lambda1 == 0.4);
    CHECK(s.rows[2].status == "error");
    CHECK(s.rows[2].flag.empty());
    std::ifstream in(spec.results_path);
    CHECK(read_sweep_csv(in).size() == 3);

    spec.tuples.push_back(spec.tuples[0]);
    CHECK_THROWS_AS(run_sweep(spec), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("calibration table") {
    std::vector<CalibrationTable::Sample> samples;
    const double l1s[] = {0.1, 0.5, 1.0}, l2s[] = {0.2, 0.6, 1.0};
    auto g02 = [](double x, double y) { return 1.0 + 0.5 * x + 0.25 * y; };
    auto g01 = [](double x, double y) { return 0.8 - 0.1 * x + 0.6 * y; };
    for (double x : l1s)
        for (double y : l2s) samples.push_back({x, y, g02(x, y), g01(x, y)});
    const CalibrationTable table(samples);

    SUBCASE("samples are reproduced") {
        for (const auto& s : samples) {
            const auto q = table.gamma_at(s.lambda1, s.lambda2);
            CHECK_FALSE(q.out_of_hull);
            CHECK(q.value[0] == doctest::Approx(s.gamma02).epsilon(1e-12));
            const auto r = table.lambda_at(s.gamma02, s.gamma01);
            CHECK(r.value[0] == doctest::Approx(s.lambda1).epsilon(1e-9));
            CHECK(r.value[1] == doctest::Approx(s.lambda2).epsilon(1e-9));
        }
    }
    SUBCASE("bilinear data is interpolated exactly in both directions") {
        for (double x : {0.15, 0.3, 0.77}) {
            for (double y : {0.25, 0.5, 0.9}) {
                const auto q = table.gamma_at(x, y);
                CHECK(q.value[0] == doctest::Approx(g02(x, y)).epsilon(1e-12));
                CHECK(q.value[1] == doctest::Approx(g01(x, y)).epsilon(1e-12));
                const auto r = table.lambda_at(g02(x, y), g01(x, y));
                CHECK_FALSE(r.out_of_hull);
                CHECK(r.value[0] == doctest::Approx(x).epsilon(1e-9));
                CHECK(r.value[1] == doctest::Approx(y).epsilon(1e-9));
            }
        }
    }
    SUBCASE("cell centre is the mean of its corners") {
        const auto q = table.gamma_at(0.3, 0.4);
        double m = 0.0;
        for (double x : {0.1, 0.5})
            for (double y : {0.2, 0.6}) m += 0.25 * g02(x, y);
        CHECK(std::abs(q.value[0] - m) <= 1e-12);
    }
    SUBCASE("outside the hull falls back to the nearest sample") {
        const auto q = table.gamma_at(2.0, 2.0);
        CHECK(q.out_of_hull);
        CHECK(q.value[0] == doctest::Approx(g02(1.0, 1.0)));
        CHECK(table.lambda_at(50.0, -50.0).out_of_hull);
    }
    SUBCASE("degenerate tables") {
        CHECK_THROWS_AS(CalibrationTable(std::vector<CalibrationTable::Sample>(samples.begin(), samples.begin() + 3)), ConfigError);
        std::vector<CalibrationTable::Sample> line{{0.1, 0.2, 1, 1}, {0.2, 0.2, 1, 1}, {0.3, 0.2, 1, 1}, {0.4, 0.2, 1, 1}};
        CHECK_THROWS_AS(CalibrationTable{line}, ConfigError);
        std::vector<CalibrationTable::Sample> holes(samples.begin(), samples.end() - 1);
        holes.push_back({0.7, 0.7, 1, 1});
        CHECK_THROWS_AS(CalibrationTable{holes}, ConfigError);
    }
    SUBCASE("from rows uses successful young rows") {
        std::vector<SweepRow> rows;
        for (double x : {0.2, 0.4})
            for (double y : {0.3, 0.5}) rows.push_back(sample_row(x, y));
        rows.push_back(sample_row(0.9, 0.9));
        rows.back().status = "error";
        const auto t = CalibrationTable::from_rows(rows);
        CHECK(t.gamma_at(0.2, 0.3).value[0] == doctest::Approx(0.45));
        CHECK_FALSE(t.gamma_at(0.9, 0.9).value[0] == doctest::Approx(1.15));
    }
}

}

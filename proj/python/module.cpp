#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lsgb/acceptance.hpp"
#include "lsgb/analytic.hpp"
#include "lsgb/config.hpp"
#include "lsgb/error.hpp"
#include "lsgb/scenarios.hpp"

namespace py = pybind11;
using namespace lsgb;

namespace {

py::array_t<double> to_array(const ScalarField& f) {
    const Grid2& g = f.grid();
    py::array_t<double> out({g.ny(), g.nx()});
    auto v = f.values();
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::dict describe(const Microstructure& ms) {
    py::dict d;
    const Grid2& g = ms.grid;
    d["h"] = g.h();
    d["origin"] = py::make_tuple(g.origin().x, g.origin().y);
    py::list psi, lambdas;
    for (const auto& p : ms.phases) {
        psi.append(to_array(p.psi));
        lambdas.append(p.lambda);
    }
    d["psi"] = psi;
    d["lambda"] = lambdas;
    return d;
}

py::dict to_dict(const RunResult& r) {
    py::dict d;
    d["angles_deg"] = py::make_tuple(analytic::degrees(r.angles[0]), analytic::degrees(r.angles[1]),
                                     analytic::degrees(r.angles[2]));
    d["v"] = r.v;
    d["deviation"] = r.deviation;
    d["quasi_static"] = r.quasi_static;
    d["stop_reason"] = r.stop_reason;
    d["r_gamma_inferred"] = r.r_gamma_inferred ? py::cast(*r.r_gamma_inferred) : py::none();
    d["gamma_inferred"] = r.gamma_inferred ? py::cast(*r.gamma_inferred) : py::none();
    d["max_vacuum"] = r.defect.max_vacuum;
    d["max_overlap"] = r.defect.max_overlap;
    d["max_distance_error"] = r.max_distance_error;
    d["max_distance_error_off_kinks"] = r.max_distance_error_off_kinks;
    d["max_distance_error_far"] = r.max_distance_error_far;
    d["steps"] = r.trajectory.steps;
    d["t"] = r.trajectory.t;
    d["profile_rms"] = r.profile ? py::cast(r.profile->rms) : py::none();
    std::vector<double> t, x, y;
    for (const auto& rec : r.records) {
        t.push_back(rec.t);
        x.push_back(rec.pos.x);
        y.push_back(rec.pos.y);
    }
    d["tj_t"] = t;
    d["tj_x"] = x;
    d["tj_y"] = y;
    return d;
}

RunOptions options_for(double h, std::optional<double> t_end, std::optional<double> dt) {
    RunOptions o = default_run_options(h);
    if (t_end) o.solver.t_end = *t_end;
    if (dt) o.solver.dt = *dt;
    return o;
}

}  // namespace

PYBIND11_MODULE(lsgb, m) {
    m.doc() = "Multi-phase level-set grain boundary simulator";
    m.attr("__version__") = LSGB_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<WettingLimitError>(m, "WettingLimitError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<MeasurementError>(m, "MeasurementError", PyExc_RuntimeError);

    auto a = m.def_submodule("analytic", "closed-form reference solutions");
    a.def("garcke_angle", &analytic::garcke_angle, py::arg("r_gamma"));
    a.def("gamma_ratio_from_angle", &analytic::gamma_ratio_from_angle, py::arg("xi0"));
    a.def("garcke_velocity", py::overload_cast<double>(&analytic::garcke_velocity), py::arg("xi0"));
    a.def("garcke_profile", py::overload_cast<double, double, double>(&analytic::garcke_profile), py::arg("x"),
          py::arg("t"), py::arg("v"));
    a.def("lambda_ratio_from_gamma_ratio", &analytic::lambda_ratio_from_gamma_ratio, py::arg("r_gamma"));
    a.def("gamma_ratio_from_lambda_ratio", &analytic::gamma_ratio_from_lambda_ratio, py::arg("r_lambda"));
    a.def("young_angles", &analytic::young_angles, py::arg("gamma01"), py::arg("gamma02"), py::arg("gamma12"));
    a.def("deviation_from_line", &analytic::deviation_from_line, py::arg("xi0"), py::arg("v"));
    a.def(
        "garcke_from_lambda_ratio",
        [](double rl) {
            const auto p = analytic::garcke_from_lambda_ratio(rl);
            return py::dict(py::arg("r_lambda") = p.r_lambda, py::arg("r_gamma") = p.r_gamma,
                            py::arg("xi0") = p.xi0, py::arg("v") = p.v);
        },
        py::arg("r_lambda"));

    m.def(
        "build_garcke",
        [](double lambda_top, double lambda_bot, double h, const std::string& formulation) {
            GarckeScenario s;
            s.lambda_top = lambda_top;
            s.lambda_bot = lambda_bot;
            s.h = h;
            return describe(build_garcke(s, parse_formulation(formulation)));
        },
        py::arg("lambda_top") = 1.0, py::arg("lambda_bot") = 1.0, py::arg("h") = 0.02,
        py::arg("formulation") = "hetero", "Initial level-set fields of the T-junction setup.");

    m.def(
        "run_garcke",
        [](double lambda_top, double lambda_bot, double h, const std::string& formulation,
           std::optional<double> t_end, std::optional<double> dt) {
            GarckeScenario s;
            s.lambda_top = lambda_top;
            s.lambda_bot = lambda_bot;
            s.h = h;
            const Formulation f = parse_formulation(formulation);
            const RunOptions o = options_for(h, t_end, dt);
            py::gil_scoped_release release;
            RunResult r = run_garcke(s, f, o);
            py::gil_scoped_acquire acquire;
            return to_dict(r);
        },
        py::arg("lambda_top") = 1.0, py::arg("lambda_bot") = 1.0, py::arg("h") = 0.02,
        py::arg("formulation") = "hetero", py::arg("t_end") = py::none(), py::arg("dt") = py::none(),
        "Run the moving T-junction and return the measured angles and velocity.");

    m.def(
        "run_young",
        [](double lambda0, double lambda1, double lambda2, double h, const std::string& formulation,
           std::optional<double> t_end, std::optional<double> dt) {
            YoungScenario s;
            s.lambda0 = lambda0;
            s.lambda1 = lambda1;
            s.lambda2 = lambda2;
            s.h = h;
            const Formulation f = parse_formulation(formulation);
            const RunOptions o = options_for(h, t_end, dt);
            py::gil_scoped_release release;
            RunResult r = run_young(s, f, o);
            py::gil_scoped_acquire acquire;
            return to_dict(r);
        },
        py::arg("lambda0") = 1.0, py::arg("lambda1") = 1.0, py::arg("lambda2") = 1.0, py::arg("h") = 0.02,
        py::arg("formulation") = "hetero", py::arg("t_end") = py::none(), py::arg("dt") = py::none(),
        "Run the pinned triple junction to equilibrium.");

    m.def(
        "run_circle",
        [](double radius, double h, std::optional<double> dt) {
            CircleScenario s;
            s.radius = radius;
            s.h = h;
            const RunOptions o = options_for(h, std::nullopt, dt);
            CircleResult r;
            {
                py::gil_scoped_release release;
                r = run_circle(s, o);
            }
            py::dict d;
            d["t"] = r.t;
            d["radius"] = r.radius;
            d["exact"] = r.exact;
            d["max_relative_error"] = r.max_relative_error;
            return d;
        },
        py::arg("radius") = 0.3, py::arg("h") = 0.01, py::arg("dt") = py::none(),
        "Shrink a disk under curvature flow and compare with sqrt(r0^2 - 2t).");

    m.def(
        "check_config",
        [](const std::string& text) { return parse_config(text, "<python>").resolved_json(); }, py::arg("text"),
        "Validate a JSON configuration and return it with all defaults filled in.");

    m.def(
        "acceptance",
        [](std::vector<std::string> only, double fine, double medium, double coarse) {
            AcceptanceOptions o;
            o.only = std::move(only);
            o.fine = fine;
            o.medium = medium;
            o.coarse = coarse;
            std::vector<CriterionResult> results;
            {
                py::gil_scoped_release release;
                results = run_acceptance(o);
            }
            py::list out;
            for (const auto& r : results)
                out.append(py::dict(py::arg("id") = r.id, py::arg("title") = r.title, py::arg("passed") = r.passed,
                                    py::arg("detail") = r.detail, py::arg("seconds") = r.seconds));
            return out;
        },
        py::arg("only") = std::vector<std::string>{}, py::arg("fine") = 2.5e-3, py::arg("medium") = 5e-3,
        py::arg("coarse") = 1e-2, "Run validation criteria and return one dict per criterion.");
}

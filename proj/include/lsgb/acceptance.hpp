#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace lsgb {

struct CriterionResult {
    std::string id;     // "C1" ... "C11", "S1", "S2"
    std::string title;
    bool passed{false};
    std::string detail;
    double seconds{0.0};
};

struct AcceptanceOptions {
    /// Spacings of the three refinement levels. The symmetric reference run
    /// uses the finest one; the other scenarios use `medium`.
    double fine{2.5e-3};
    double medium{5e-3};
    double coarse{1e-2};
    /// Criterion ids to run ("C2", "S1", ...); empty runs everything.
    std::vector<std::string> only;
    std::function<void(const CriterionResult&)> on_result;
    std::function<void(const std::string&)> log;
};

/// Every validation criterion of the solver, in order. Simulations shared by
/// several criteria are run once.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

/// "PASS C2  title: detail (12.3 s)".
std::string format_result(const CriterionResult& r);

/// Ids and titles of all criteria.
std::vector<std::array<std::string, 2>> acceptance_catalogue();

/// Young angles (xi0, xi1, xi2) by damped Newton on the force balance of three
/// unit tangents, started from the best point of a coarse scan. Independent of
/// the law-of-cosines construction in the analytic module.
std::array<double, 3> young_angles_by_root_search(double gamma01, double gamma02, double gamma12);

}  // namespace lsgb

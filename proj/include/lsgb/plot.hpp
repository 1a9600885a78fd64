#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lsgb/measure.hpp"
#include "lsgb/scenarios.hpp"

namespace lsgb {

enum class PlotKind { AngleVelocity, Profile, LambdaAngle, LambdaGamma };

std::string to_string(PlotKind k);
/// "angle-velocity", "profile", "lambda-angle", "lambda-gamma"; throws ConfigError otherwise.
PlotKind parse_plot_kind(const std::string& name);

/// Rows of a profile CSV ("x,y_measured,y_analytic").
struct ProfileTable {
    std::vector<double> x, measured, analytic;
};
ProfileTable read_profile_csv(std::istream& in);

/// Measured (xi0, v) of successful rows against the line v = pi - xi0 with a
/// band of half-width `band` (perpendicular). The summary (points, points
/// inside the band, max deviation) is embedded as SVG metadata.
std::string svg_angle_velocity(std::span<const SweepRow> rows, double band = 0.1);
/// Measured and analytic profile overlay.
std::string svg_profile(const ProfileTable& table);
/// Heat map of the top angle over (lambda1, lambda2) for Young rows.
std::string svg_lambda_angle(std::span<const SweepRow> rows);
/// Heat maps of the inferred (gamma02, gamma01) over (lambda1, lambda2).
std::string svg_lambda_gamma(std::span<const SweepRow> rows);

}  // namespace lsgb

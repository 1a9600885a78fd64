#pragma once

#include <array>

namespace lsgb::analytic {

/// Quasi-static top dihedral angle of the symmetric T-junction,
/// xi0 = 2*acos(1/(2*r_gamma)). Throws WettingLimitError for r_gamma <= 1/2.
double garcke_angle(double r_gamma);

/// Inverse of garcke_angle: r_gamma = 1/(2*cos(xi0/2)).
double gamma_ratio_from_angle(double xi0);

/// Dimensionless junction velocity v = pi - xi0, xi0 in (0, pi].
double garcke_velocity(double xi0);

/// Dimensional form: v = mu*gamma_top/Lx * (pi - xi0).
double garcke_velocity(double xi0, double mobility, double gamma_top, double width);

/// Dimensionless profile y(x, t) = v*t + ln(cos(v*(1/2 - |x|)))/v on [-1/2, 1/2].
/// Below v = 1e-6 the series limit v*t - v*(1/2-|x|)^2/2 is used.
double garcke_profile(double x, double t, double v_tj);

/// Dimensional profile with mobility, top energy and domain width.
double garcke_profile(double x, double t, double v_tj, double mobility, double gamma_top, double width);

/// r_lambda = 1/(2*r_gamma - 1).
double lambda_ratio_from_gamma_ratio(double r_gamma);

/// r_gamma = (1/r_lambda + 1)/2.
double gamma_ratio_from_lambda_ratio(double r_lambda);

/// Dihedral angles (xi0, xi1, xi2) of a junction whose boundaries carry
/// energies gamma01, gamma02, gamma12; xi_k is the angle inside grain k.
/// Built from the force triangle; the angles sum to 2*pi.
std::array<double, 3> young_angles(double gamma01, double gamma02, double gamma12);

/// Perpendicular distance from (xi0, v) to the line v = pi - xi0.
double deviation_from_line(double xi0, double v);

struct GarckePoint {
    double r_lambda;
    double r_gamma;
    double xi0;
    double v;
};

/// r_lambda -> r_gamma -> xi0 -> v.
GarckePoint garcke_from_lambda_ratio(double r_lambda);
/// r_gamma -> r_lambda, xi0, v.
GarckePoint garcke_from_gamma_ratio(double r_gamma);

double degrees(double radians);
double radians(double degrees);

}  // namespace lsgb::analytic

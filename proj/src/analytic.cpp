#include "lsgb/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lsgb/error.hpp"

namespace lsgb::analytic {

namespace {

constexpr double pi = std::numbers::pi;

void require_non_wetting(double r_gamma) {
    if (!(r_gamma > 0.5) || !std::isfinite(r_gamma)) {
        std::ostringstream msg;
        msg << "energy ratio r_gamma = " << r_gamma << " must exceed 1/2";
        throw WettingLimitError(msg.str());
    }
}

}  // namespace

double garcke_angle(double r_gamma) {
    require_non_wetting(r_gamma);
    return 2.0 * std::acos(1.0 / (2.0 * r_gamma));
}

double gamma_ratio_from_angle(double xi0) {
    if (!(xi0 > 0.0) || !(xi0 < pi)) throw ConfigError("angle must lie in (0, pi) to invert");
    return 1.0 / (2.0 * std::cos(0.5 * xi0));
}

double garcke_velocity(double xi0) {
    if (!(xi0 > 0.0) || xi0 > pi) throw ConfigError("top dihedral angle must lie in (0, pi]");
    return pi - xi0;
}

double garcke_velocity(double xi0, double mobility, double gamma_top, double width) {
    if (!(width > 0.0)) throw ConfigError("domain width must be positive");
    return mobility * gamma_top / width * garcke_velocity(xi0);
}

double garcke_profile(double x, double t, double v_tj) {
    if (std::abs(x) > 0.5 + 1e-12) throw ConfigError("profile abscissa outside [-1/2, 1/2]");
    if (v_tj < 0.0) throw ConfigError("junction velocity must be non-negative");
    const double a = 0.5 - std::abs(x);
    if (v_tj < 1e-6) return v_tj * t - 0.5 * v_tj * a * a;
    const double arg = v_tj * a;
    if (arg >= 0.5 * pi) throw ConfigError("profile undefined: v*(1/2-|x|) reaches pi/2");
    return v_tj * t + std::log(std::cos(arg)) / v_tj;
}

double garcke_profile(double x, double t, double v_tj, double mobility, double gamma_top, double width) {
    const double mg = mobility * gamma_top;
    if (!(mg > 0.0) || !(width > 0.0)) throw ConfigError("mobility, energy and width must be positive");
    if (std::abs(x) > 0.5 * width * (1 + 1e-12)) throw ConfigError("profile abscissa outside the domain");
    if (v_tj < 0.0) throw ConfigError("junction velocity must be non-negative");
    const double a = 0.5 * width - std::abs(x);
    const double k = v_tj / mg;
    if (k * width < 1e-6) return v_tj * t - 0.5 * k * a * a;
    if (k * a >= 0.5 * pi) throw ConfigError("profile undefined: argument of cos reaches pi/2");
    return v_tj * t + std::log(std::cos(k * a)) / k;
}

double lambda_ratio_from_gamma_ratio(double r_gamma) {
    require_non_wetting(r_gamma);
    return 1.0 / (2.0 * r_gamma - 1.0);
}

double gamma_ratio_from_lambda_ratio(double r_lambda) {
    if (!(r_lambda > 0.0) || !std::isfinite(r_lambda)) {
        std::ostringstream msg;
        msg << "lambda ratio " << r_lambda << " must be positive and finite";
        throw WettingLimitError(msg.str());
    }
    return 0.5 * (1.0 / r_lambda + 1.0);
}

std::array<double, 3> young_angles(double gamma01, double gamma02, double gamma12) {
    if (!(gamma01 > 0.0) || !(gamma02 > 0.0) || !(gamma12 > 0.0))
        throw ConfigError("boundary energies must be positive");
    if (!(gamma01 + gamma02 > gamma12) || !(gamma01 + gamma12 > gamma02) || !(gamma02 + gamma12 > gamma01)) {
        std::ostringstream msg;
        msg << "energies (" << gamma01 << ", " << gamma02 << ", " << gamma12
            << ") violate the triangle inequality";
        throw WettingLimitError(msg.str());
    }
    // Interior angle of the force triangle opposite the side gamma_ab.
    auto opposite = [](double a, double b, double c) {
        const double cosv = (b * b + c * c - a * a) / (2.0 * b * c);
        return std::acos(std::clamp(cosv, -1.0, 1.0));
    };
    const double a0 = opposite(gamma12, gamma01, gamma02);
    const double a1 = opposite(gamma02, gamma01, gamma12);
    const double xi0 = pi - a0;
    const double xi1 = pi - a1;
    return {xi0, xi1, 2.0 * pi - xi0 - xi1};
}

double deviation_from_line(double xi0, double v) {
    return std::abs(xi0 + v - pi) / std::numbers::sqrt2;
}

GarckePoint garcke_from_lambda_ratio(double r_lambda) {
    const double rg = gamma_ratio_from_lambda_ratio(r_lambda);
    const double xi0 = garcke_angle(rg);
    return {r_lambda, rg, xi0, garcke_velocity(xi0)};
}

GarckePoint garcke_from_gamma_ratio(double r_gamma) {
    const double rl = lambda_ratio_from_gamma_ratio(r_gamma);
    const double xi0 = garcke_angle(r_gamma);
    return {rl, r_gamma, xi0, garcke_velocity(xi0)};
}

double degrees(double r) { return r * 180.0 / pi; }
double radians(double d) { return d * pi / 180.0; }

}  // namespace lsgb::analytic

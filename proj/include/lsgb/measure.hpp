#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lsgb/levelset.hpp"

namespace lsgb {

/// Zero isocontour as polylines. Closed polylines repeat their first point at
/// the end.
struct Contour {
    std::vector<std::vector<Point2>> polylines;

    std::size_t point_count() const;
    bool is_closed(std::size_t k) const;
};

/// Marching squares with linear edge interpolation; saddle cells are resolved
/// by the sign of the cell-centre average. Throws MeasurementError when the
/// field has one sign only.
Contour extract_contour(const ScalarField& psi);

/// Same, restricted to the node window [i0, i1] x [j0, j1] (inclusive, clipped).
Contour extract_contour(const ScalarField& psi, int i0, int i1, int j0, int j1);

/// Shoelace area of a closed polyline (absolute value).
double polygon_area(std::span<const Point2> pts);

/// Junction of three phases: minimiser of max_k |psi_k| over the bilinear
/// interpolants, refined by pattern search from the best node. Throws
/// MeasurementError when the residual exceeds 2h.
Point2 locate_tj(const Phase& a, const Phase& b, const Phase& c);
Point2 locate_tj(std::span<const Phase> phases);

struct AngleOptions {
    double r_in_cells{2.0};
    double r_out_cells{10.0};
    int min_points{4};
    /// Fit a parabola across the line and take its tangent at the junction,
    /// which removes the bias of a chord on curved boundaries.
    bool quadratic{true};
};

/// Dihedral angles (radians) of the three phases at the junction `tj`. Each
/// pairwise boundary is the zero set of psi_a - psi_b where a and b dominate
/// the third phase; its points in the annulus [r_in, r_out] get a total least
/// squares line fit, optionally refined to a parabola. Angles are measured
/// through the grain.
std::array<double, 3> dihedral_angles(std::span<const Phase> phases, Point2 tj, const AngleOptions& opts = {});

struct TJRecord {
    double t{0.0};
    Point2 pos;
    std::array<double, 3> angles{};
    double v_inst{0.0};
    bool quasi_static{false};
};

struct VelocityEstimate {
    bool determined{false};
    double v{0.0};         // dy/dt over the window
    double vx{0.0};        // dx/dt over the window
    double v_first{0.0};   // dy/dt over the first half
    double v_second{0.0};  // dy/dt over the second half
    double angle_drift{0.0};  // radians, max over the three angles
    std::array<double, 3> mean_angles{};
    bool quasi_static{false};
};

struct QuasiStaticPolicy {
    double rel_velocity_tol{0.01};
    /// Velocity drift below this absolute level also counts as steady.
    double abs_velocity_tol{1e-3};
    double angle_drift_deg{0.5};
};

/// Least-squares slope of y(t) over the trailing `window` records, with the
/// quasi-static test on the two half-window slopes and the angle drift.
VelocityEstimate tj_velocity(std::span<const TJRecord> records, std::size_t window,
                             const QuasiStaticPolicy& policy = {});

struct Profile {
    std::vector<double> x;
    std::vector<double> y;
};

/// Boundary of the top phase (index 0) against the other two, sampled at
/// n uniform stations across the domain width. Throws MeasurementError if the
/// contour has a gap wider than 2h or does not span the width.
Profile sample_profile(std::span<const Phase> phases, std::size_t n_samples);

struct ProfileComparison {
    Profile measured;            // shifted so that y(0) matches the analytic TJ
    std::vector<double> analytic;
    double rms{0.0};
    double shift{0.0};
};

/// Shift the measured profile vertically so the value at x = 0 matches the
/// analytic profile with velocity v (at t = 0) and report the RMS difference.
ProfileComparison compare_profile(const Profile& measured, double v_tj);

struct DefectReport {
    double max_vacuum{0.0};
    double max_overlap{0.0};
    double l1_defect{0.0};
};

/// Vacuum / overlap statistics of 1 - sum_j H(psi_j), skipping nodes within
/// `exclusion_radius` of any junction and frozen nodes.
DefectReport vacuum_overlap_report(std::span<const Phase> phases, double eps,
                                   std::span<const Point2> junctions = {}, double exclusion_radius = 0.0);

/// CSV "t,x,y,xi0,xi1,xi2,v,quasi_static" (angles in degrees).
void write_tj_csv(std::ostream& out, std::span<const TJRecord> records);
/// CSV "x,y_measured,y_analytic".
void write_profile_csv(std::ostream& out, const ProfileComparison& cmp);

}  // namespace lsgb

#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "lsgb/grid.hpp"

namespace lsgb {

/// Disk of the given radius; positive inside unless `inside_positive` is false.
struct Circle {
    Point2 center;
    double radius{0.0};
    bool inside_positive{true};
};

/// Closed polygon describing a grain. The polygon interior is the grain; only
/// edges flagged in `interface_edge` count as grain boundary for the distance
/// (the others close the polygon outside the domain). Edge k joins vertex k
/// to vertex k+1 (mod n).
struct PolygonRegion {
    std::vector<Point2> vertices;
    std::vector<bool> interface_edge;
};

using InterfaceGeometry = std::variant<Circle, PolygonRegion>;

/// Exact signed distance to the geometry, positive inside.
ScalarField init_signed_distance(const InterfaceGeometry& geometry, const Grid2& grid);

/// Sine-smoothed Heaviside of width 2*eps.
double heaviside(double psi, double eps);
double heaviside_derivative(double psi, double eps);
ScalarField heaviside_smoothed(const ScalarField& psi, double eps);

/// Mean curvature for a distance function: kappa = -laplacian(psi).
/// Positive on the boundary of a convex grain.
ScalarField curvature(const ScalarField& psi);

/// C1 piecewise-cubic (Catmull-Rom) interpolant of a field. Outside the grid
/// the field is continued by mirroring.
class CubicInterpolant {
public:
    explicit CubicInterpolant(const ScalarField& f) : f_(&f) {}

    struct Sample {
        double value;
        Point2 grad;
    };
    Sample operator()(Point2 p) const;

private:
    const ScalarField* f_;
};

struct ReinitOptions {
    /// Nodes closer than this (in cells) get their closest point refined on the
    /// cubic interpolant; farther nodes use the propagated closest point.
    double refine_cells{8.0};
    int newton_iterations{16};
};

/// Redistancing: closest points on the zero set of the cubic interpolant of
/// psi are found near the interface, propagated outward through the band in
/// Dijkstra order, and refined by Newton projection. Values beyond the band are
/// clamped to +-band_width. Throws GeometryError when psi has no sign change.
ScalarField reinitialize(const ScalarField& psi, double band_width, const ReinitOptions& opts = {});

/// Godunov upwind |grad psi|, which equals 1 for an exact signed distance
/// function even on its medial axis.
ScalarField upwind_gradient_norm(const ScalarField& psi);
double upwind_gradient_norm_at(const ScalarField& psi, int i, int j);

/// A grain: signed distance (positive inside), normalized source amplitude and
/// optional Dirichlet-pinned nodes holding `pinned` values.
struct Phase {
    int id{0};
    ScalarField psi;
    double lambda{1.0};
    std::vector<std::uint8_t> frozen;  // empty, or one flag per node
    std::vector<double> pinned;        // values held at frozen nodes

    bool has_frozen() const { return !frozen.empty(); }
    bool is_frozen(std::size_t k) const { return !frozen.empty() && frozen[k] != 0; }
    /// Freeze the nodes flagged in `mask` at their current psi values.
    void freeze(std::vector<std::uint8_t> mask);
    void reimpose_frozen();
};

}  // namespace lsgb

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lsgb {

struct Point2 {
    double x{0.0};
    double y{0.0};

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

enum class EdgeBc { ZeroFlux, Pinned };
enum class Edge { Left = 0, Right = 1, Bottom = 2, Top = 3 };

/// Uniform square-cell Cartesian grid. Node (i, j) sits at
/// (origin.x + i*h, origin.y + j*h); storage is row-major in j.
class Grid2 {
public:
    using BcSet = std::array<EdgeBc, 4>;

    Grid2(int nx, int ny, double spacing, Point2 origin = {},
          BcSet bc = {EdgeBc::ZeroFlux, EdgeBc::ZeroFlux, EdgeBc::ZeroFlux, EdgeBc::ZeroFlux});

    /// Smallest grid with spacing h whose nodes cover [xmin, xmax] x [ymin, ymax],
    /// anchored at (xmin, ymin).
    static Grid2 covering(double xmin, double xmax, double ymin, double ymax, double h,
                          BcSet bc = {EdgeBc::ZeroFlux, EdgeBc::ZeroFlux, EdgeBc::ZeroFlux,
                                      EdgeBc::ZeroFlux});

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double h() const { return h_; }
    double dx() const { return h_; }
    double dy() const { return h_; }
    Point2 origin() const { return origin_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }

    double x(int i) const { return origin_.x + i * h_; }
    double y(int j) const { return origin_.y + j * h_; }
    Point2 node(int i, int j) const { return {x(i), y(j)}; }
    Point2 node(std::size_t k) const { return node(i_of(k), j_of(k)); }
    double xmax() const { return x(nx_ - 1); }
    double ymax() const { return y(ny_ - 1); }

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
    }
    int i_of(std::size_t k) const { return static_cast<int>(k % static_cast<std::size_t>(nx_)); }
    int j_of(std::size_t k) const { return static_cast<int>(k / static_cast<std::size_t>(nx_)); }
    bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }
    bool contains(Point2 p) const;

    EdgeBc bc(Edge e) const { return bc_[static_cast<std::size_t>(e)]; }
    const BcSet& bcs() const { return bc_; }
    /// True when node (i, j) lies on an edge tagged Pinned.
    bool on_pinned_edge(int i, int j) const;

    /// Index reflected across the domain edge (ghost-node mirroring).
    int mirror_i(int i) const { return mirror(i, nx_); }
    int mirror_j(int j) const { return mirror(j, ny_); }

    friend bool operator==(const Grid2&, const Grid2&) = default;

private:
    static int mirror(int i, int n) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i;
            if (i >= n) i = 2 * (n - 1) - i;
        }
        return i;
    }

    int nx_;
    int ny_;
    double h_;
    Point2 origin_;
    BcSet bc_;
};

/// One real value per grid node.
class ScalarField {
public:
    explicit ScalarField(Grid2 grid, double fill = 0.0);
    ScalarField(Grid2 grid, std::vector<double> values);

    const Grid2& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::vector<double>& raw() { return values_; }

    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
    double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }

    /// Bilinear interpolation; points outside the grid are clamped onto it.
    double sample(Point2 p) const;

    bool all_finite() const;
    double max_abs() const;

private:
    Grid2 grid_;
    std::vector<double> values_;
};

/// 5-point Laplacian. ZeroFlux edges mirror the ghost node; nodes on Pinned
/// edges get 0.
ScalarField laplacian(const ScalarField& f);

/// |grad f| with central differences inside, one-sided differences on the edges.
ScalarField gradient_norm(const ScalarField& f);

/// VTK legacy STRUCTURED_POINTS (ASCII), one SCALARS block per named field.
/// All fields must share the same grid.
void write_vtk(std::ostream& out, std::span<const ScalarField* const> fields,
               std::span<const std::string> names, const std::string& title = "lsgb fields");
void write_vtk_file(const std::string& path, std::span<const ScalarField* const> fields,
                    std::span<const std::string> names);

/// Flat CSV: header "i,j,x,y,value", one row per node.
void write_field_csv(std::ostream& out, const ScalarField& f);

}  // namespace lsgb

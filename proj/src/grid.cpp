#include "lsgb/grid.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "lsgb/error.hpp"

namespace lsgb {

Grid2::Grid2(int nx, int ny, double spacing, Point2 origin, BcSet bc)
    : nx_(nx), ny_(ny), h_(spacing), origin_(origin), bc_(bc) {
    if (nx < 3 || ny < 3) throw ConfigError("grid needs at least 3 nodes per axis");
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError("grid spacing must be positive");
}

Grid2 Grid2::covering(double xmin, double xmax, double ymin, double ymax, double h, BcSet bc) {
    if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
    if (!(xmax > xmin) || !(ymax > ymin)) throw ConfigError("empty grid extent");
    const int nx = static_cast<int>(std::ceil((xmax - xmin) / h - 1e-9)) + 1;
    const int ny = static_cast<int>(std::ceil((ymax - ymin) / h - 1e-9)) + 1;
    return Grid2(nx, ny, h, {xmin, ymin}, bc);
}

bool Grid2::contains(Point2 p) const {
    const double tol = 1e-12 * h_;
    return p.x >= origin_.x - tol && p.y >= origin_.y - tol && p.x <= xmax() + tol &&
           p.y <= ymax() + tol;
}

bool Grid2::on_pinned_edge(int i, int j) const {
    return (i == 0 && bc(Edge::Left) == EdgeBc::Pinned) ||
           (i == nx_ - 1 && bc(Edge::Right) == EdgeBc::Pinned) ||
           (j == 0 && bc(Edge::Bottom) == EdgeBc::Pinned) ||
           (j == ny_ - 1 && bc(Edge::Top) == EdgeBc::Pinned);
}

ScalarField::ScalarField(Grid2 grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(Grid2 grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw ConfigError("field size does not match grid");
}

double ScalarField::sample(Point2 p) const {
    const double fx = std::clamp((p.x - grid_.origin().x) / grid_.h(), 0.0, double(grid_.nx() - 1));
    const double fy = std::clamp((p.y - grid_.origin().y) / grid_.h(), 0.0, double(grid_.ny() - 1));
    const int i = std::min(static_cast<int>(fx), grid_.nx() - 2);
    const int j = std::min(static_cast<int>(fy), grid_.ny() - 2);
    const double tx = fx - i;
    const double ty = fy - j;
    const double a = (*this)(i, j);
    const double b = (*this)(i + 1, j);
    const double c = (*this)(i, j + 1);
    const double d = (*this)(i + 1, j + 1);
    return (1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * c + tx * d);
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

ScalarField laplacian(const ScalarField& f) {
    const Grid2& g = f.grid();
    ScalarField out(g);
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const int nx = g.nx();
    const int ny = g.ny();
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (g.on_pinned_edge(i, j)) continue;
            const double c = f(i, j);
            const double l = f(g.mirror_i(i - 1), j);
            const double r = f(g.mirror_i(i + 1), j);
            const double b = f(i, g.mirror_j(j - 1));
            const double t = f(i, g.mirror_j(j + 1));
            out(i, j) = (l + r + b + t - 4.0 * c) * inv_h2;
        }
    }
    return out;
}

ScalarField gradient_norm(const ScalarField& f) {
    const Grid2& g = f.grid();
    ScalarField out(g);
    const double h = g.h();
    const int nx = g.nx();
    const int ny = g.ny();
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            double gx, gy;
            if (i == 0) gx = (f(1, j) - f(0, j)) / h;
            else if (i == nx - 1) gx = (f(i, j) - f(i - 1, j)) / h;
            else gx = (f(i + 1, j) - f(i - 1, j)) / (2 * h);
            if (j == 0) gy = (f(i, 1) - f(i, 0)) / h;
            else if (j == ny - 1) gy = (f(i, j) - f(i, j - 1)) / h;
            else gy = (f(i, j + 1) - f(i, j - 1)) / (2 * h);
            out(i, j) = std::hypot(gx, gy);
        }
    }
    return out;
}

void write_vtk(std::ostream& out, std::span<const ScalarField* const> fields,
               std::span<const std::string> names, const std::string& title) {
    if (fields.empty()) throw ConfigError("write_vtk: no fields");
    if (fields.size() != names.size()) throw ConfigError("write_vtk: one name per field required");
    const Grid2& g = fields.front()->grid();
    for (const auto* f : fields)
        if (!(f->grid() == g)) throw ConfigError("write_vtk: fields live on different grids");
    for (const auto& n : names)
        if (n.empty() || n.find_first_of(" \t\n") != std::string::npos)
            throw ConfigError("write_vtk: field names must be non-empty without whitespace");

    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << g.nx() << ' ' << g.ny() << " 1\n";
    out << std::setprecision(17);
    out << "ORIGIN " << g.origin().x << ' ' << g.origin().y << " 0\n";
    out << "SPACING " << g.h() << ' ' << g.h() << " 1\n";
    out << "POINT_DATA " << g.size() << '\n';
    for (std::size_t n = 0; n < fields.size(); ++n) {
        out << "SCALARS " << names[n] << " double 1\nLOOKUP_TABLE default\n";
        for (double v : fields[n]->values()) out << v << '\n';
    }
}

void write_vtk_file(const std::string& path, std::span<const ScalarField* const> fields,
                    std::span<const std::string> names) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path);
    write_vtk(out, fields, names);
}

void write_field_csv(std::ostream& out, const ScalarField& f) {
    const Grid2& g = f.grid();
    out << "i,j,x,y,value\n" << std::setprecision(17);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            out << i << ',' << j << ',' << g.x(i) << ',' << g.y(j) << ',' << f(i, j) << '\n';
}

}  // namespace lsgb

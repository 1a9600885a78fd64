#include "lsgb/levelset.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <queue>

#include "lsgb/error.hpp"

namespace lsgb {

namespace {

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + t * ab);
}

bool point_in_polygon(Point2 p, const std::vector<Point2>& v) {
    bool inside = false;
    const std::size_t n = v.size();
    for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
        if ((v[a].y > p.y) != (v[b].y > p.y)) {
            const double xc = v[b].x + (p.y - v[b].y) * (v[a].x - v[b].x) / (v[a].y - v[b].y);
            if (p.x < xc) inside = !inside;
        }
    }
    return inside;
}

struct CubicWeights {
    double w[4];
    double dw[4];
};

// Catmull-Rom weights for offsets -1, 0, 1, 2 at fractional position t.
CubicWeights catmull_rom(double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return {{0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t),
             0.5 * (t3 - t2)},
            {0.5 * (-3 * t2 + 4 * t - 1), 0.5 * (9 * t2 - 10 * t), 0.5 * (-9 * t2 + 8 * t + 1),
             0.5 * (3 * t2 - 2 * t)}};
}

std::optional<Point2> project_onto_zero_set(const CubicInterpolant& interp, Point2 x, Point2 start,
                                            double h, int max_iter) {
    Point2 p = start;
    for (int it = 0; it < max_iter; ++it) {
        const auto s = interp(p);
        const double gg = dot(s.grad, s.grad);
        if (gg < 1e-12) return std::nullopt;
        const Point2 d1 = (-s.value / gg) * s.grad;
        const Point2 q = p + d1;
        const Point2 xq = x - q;
        const Point2 d2 = xq - (dot(xq, s.grad) / gg) * s.grad;
        Point2 step = d1 + d2;
        const double len = norm(step);
        if (len > h) step = (h / len) * step;
        p = p + step;
        if (distance(p, start) > 4.0 * h + distance(x, start)) return std::nullopt;
        if (len < 1e-10 * h) {
            if (std::abs(interp(p).value) > 1e-8 * h) return std::nullopt;
            return p;
        }
    }
    return std::nullopt;
}

}  // namespace

ScalarField init_signed_distance(const InterfaceGeometry& geometry, const Grid2& grid) {
    ScalarField out(grid);
    if (const auto* c = std::get_if<Circle>(&geometry)) {
        if (!(c->radius > 0.0)) throw GeometryError("circle radius must be positive");
        const double s = c->inside_positive ? 1.0 : -1.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
            out[k] = s * (c->radius - distance(grid.node(k), c->center));
        return out;
    }
    const auto& poly = std::get<PolygonRegion>(geometry);
    const std::size_t n = poly.vertices.size();
    if (n < 3) throw GeometryError("polygon needs at least 3 vertices");
    std::vector<bool> active = poly.interface_edge;
    if (active.empty()) active.assign(n, true);
    if (active.size() != n) throw GeometryError("one interface flag per polygon edge required");
    std::vector<std::pair<Point2, Point2>> segments;
    for (std::size_t e = 0; e < n; ++e) {
        const Point2 a = poly.vertices[e];
        const Point2 b = poly.vertices[(e + 1) % n];
        if (distance(a, b) <= 1e-14 * (1.0 + norm(a))) throw GeometryError("zero-length polygon edge");
        if (active[e]) segments.emplace_back(a, b);
    }
    if (segments.empty()) throw GeometryError("polygon has no interface edge");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Point2 p = grid.node(k);
        double d = std::numeric_limits<double>::infinity();
        for (const auto& [a, b] : segments) d = std::min(d, point_segment_distance(p, a, b));
        out[k] = point_in_polygon(p, poly.vertices) ? d : -d;
    }
    return out;
}

double heaviside(double psi, double eps) {
    if (psi <= -eps) return 0.0;
    if (psi >= eps) return 1.0;
    const double r = psi / eps;
    return 0.5 * (1.0 + r + std::sin(std::numbers::pi * r) / std::numbers::pi);
}

double heaviside_derivative(double psi, double eps) {
    if (psi <= -eps || psi >= eps) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * psi / eps)) / eps;
}

ScalarField heaviside_smoothed(const ScalarField& psi, double eps) {
    if (!(eps > 0.0)) throw ConfigError("heaviside width must be positive");
    ScalarField out(psi.grid());
    for (std::size_t k = 0; k < psi.size(); ++k) out[k] = heaviside(psi[k], eps);
    return out;
}

ScalarField curvature(const ScalarField& psi) {
    ScalarField out = laplacian(psi);
    for (double& v : out.values()) v = -v;
    return out;
}

CubicInterpolant::Sample CubicInterpolant::operator()(Point2 p) const {
    const Grid2& g = f_->grid();
    const double h = g.h();
    const double fx = (p.x - g.origin().x) / h;
    const double fy = (p.y - g.origin().y) / h;
    const int i0 = static_cast<int>(std::floor(fx));
    const int j0 = static_cast<int>(std::floor(fy));
    const CubicWeights wx = catmull_rom(fx - i0);
    const CubicWeights wy = catmull_rom(fy - j0);
    const bool interior = i0 >= 1 && j0 >= 1 && i0 + 2 < g.nx() && j0 + 2 < g.ny();
    const auto vals = f_->values();
    double v = 0, gx = 0, gy = 0;
    for (int b = 0; b < 4; ++b) {
        const int j = interior ? j0 - 1 + b : g.mirror_j(j0 - 1 + b);
        double row = 0, drow = 0;
        for (int a = 0; a < 4; ++a) {
            const int i = interior ? i0 - 1 + a : g.mirror_i(i0 - 1 + a);
            const double fv = vals[g.index(i, j)];
            row += wx.w[a] * fv;
            drow += wx.dw[a] * fv;
        }
        v += wy.w[b] * row;
        gx += wy.w[b] * drow;
        gy += wy.dw[b] * row;
    }
    return {v, {gx / h, gy / h}};
}

ScalarField reinitialize(const ScalarField& psi, double band_width, const ReinitOptions& opts) {
    if (!(band_width > 0.0)) throw ConfigError("band width must be positive");
    const Grid2& g = psi.grid();
    const double h = g.h();
    const std::size_t n = g.size();
    const int nx = g.nx();
    const int ny = g.ny();
    const CubicInterpolant interp(psi);
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> dist(n, inf);
    std::vector<Point2> cp(n);
    std::vector<std::uint8_t> state(n, 0);  // bit0 seeded, bit1 finalized
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;

    auto seed = [&](std::size_t k) {
        if (state[k] & 1u) return;
        state[k] |= 1u;
        const Point2 x = g.node(k);
        const double v = psi[k];
        if (v == 0.0) {
            dist[k] = 0.0;
            cp[k] = x;
        } else {
            const auto s = interp(x);
            const double gg = std::max(dot(s.grad, s.grad), 1e-12);
            const Point2 p0 = x - (v / gg) * s.grad;
            if (auto p = project_onto_zero_set(interp, x, p0, h, opts.newton_iterations)) {
                dist[k] = distance(x, *p);
                cp[k] = *p;
            } else {
                dist[k] = std::abs(v) / std::sqrt(gg);
                cp[k] = p0;
            }
        }
        heap.emplace(dist[k], k);
    };

    bool crossed = false;
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const std::size_t k00 = g.index(i, j);
            const std::size_t k10 = k00 + 1;
            const std::size_t k01 = k00 + static_cast<std::size_t>(nx);
            const std::size_t k11 = k01 + 1;
            const int pos = (psi[k00] >= 0) + (psi[k10] >= 0) + (psi[k01] >= 0) + (psi[k11] >= 0);
            if (pos == 0 || pos == 4) continue;
            crossed = true;
            seed(k00);
            seed(k10);
            seed(k01);
            seed(k11);
        }
    }
    if (!crossed) throw GeometryError("reinitialize: field has no zero crossing");

    const double refine_dist = opts.refine_cells * h;
    const double reach = band_width + 2.0 * h;
    while (!heap.empty()) {
        const auto [d, k] = heap.top();
        heap.pop();
        if (state[k] & 2u) continue;
        state[k] |= 2u;
        const Point2 x = g.node(k);
        if (!(state[k] & 1u) && dist[k] < refine_dist) {
            if (auto p = project_onto_zero_set(interp, x, cp[k], h, opts.newton_iterations)) {
                const double dn = distance(x, *p);
                if (dn < dist[k]) {
                    dist[k] = dn;
                    cp[k] = *p;
                }
            }
        }
        if (dist[k] > reach) continue;
        const int i = g.i_of(k);
        const int j = g.j_of(k);
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                if ((di | dj) == 0 || !g.contains(i + di, j + dj)) continue;
                const std::size_t m = g.index(i + di, j + dj);
                if (state[m] & 2u) continue;
                const double c = distance(g.node(m), cp[k]);
                if (c < dist[m]) {
                    dist[m] = c;
                    cp[m] = cp[k];
                    heap.emplace(c, m);
                }
            }
        }
    }

    ScalarField out(g);
    for (std::size_t k = 0; k < n; ++k) {
        const double d = std::min(dist[k], band_width);
        out[k] = psi[k] >= 0.0 ? d : -d;
    }
    return out;
}

double upwind_gradient_norm_at(const ScalarField& psi, int i, int j) {
    const Grid2& g = psi.grid();
    const double h = g.h();
    const double c = psi(i, j);
    const double a = (c - psi(g.mirror_i(i - 1), j)) / h;
    const double b = (psi(g.mirror_i(i + 1), j) - c) / h;
    const double e = (c - psi(i, g.mirror_j(j - 1))) / h;
    const double f = (psi(i, g.mirror_j(j + 1)) - c) / h;
    auto sq = [](double v) { return v * v; };
    double gx2, gy2;
    if (c >= 0) {
        gx2 = std::max(sq(std::max(a, 0.0)), sq(std::min(b, 0.0)));
        gy2 = std::max(sq(std::max(e, 0.0)), sq(std::min(f, 0.0)));
    } else {
        gx2 = std::max(sq(std::min(a, 0.0)), sq(std::max(b, 0.0)));
        gy2 = std::max(sq(std::min(e, 0.0)), sq(std::max(f, 0.0)));
    }
    return std::sqrt(gx2 + gy2);
}

ScalarField upwind_gradient_norm(const ScalarField& psi) {
    const Grid2& g = psi.grid();
    ScalarField out(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) out(i, j) = upwind_gradient_norm_at(psi, i, j);
    return out;
}

void Phase::freeze(std::vector<std::uint8_t> mask) {
    if (mask.size() != psi.size()) throw ConfigError("frozen mask size does not match grid");
    frozen = std::move(mask);
    pinned.assign(psi.values().begin(), psi.values().end());
}

void Phase::reimpose_frozen() {
    if (frozen.empty()) return;
    for (std::size_t k = 0; k < frozen.size(); ++k)
        if (frozen[k]) psi[k] = pinned[k];
}

}  // namespace lsgb

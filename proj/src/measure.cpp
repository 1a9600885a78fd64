#include "lsgb/measure.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "lsgb/analytic.hpp"
#include "lsgb/error.hpp"

namespace lsgb {

std::size_t Contour::point_count() const {
    std::size_t n = 0;
    for (const auto& p : polylines) n += p.size();
    return n;
}

bool Contour::is_closed(std::size_t k) const {
    const auto& p = polylines.at(k);
    return p.size() > 2 && p.front() == p.back();
}

namespace {

struct EdgeLinks {
    std::int64_t a{-1};
    std::int64_t b{-1};
    void add(std::int64_t e) {
        if (a < 0) a = e;
        else b = e;
    }
};

}  // namespace

Contour extract_contour(const ScalarField& psi, int i0, int i1, int j0, int j1) {
    const Grid2& g = psi.grid();
    i0 = std::max(i0, 0);
    j0 = std::max(j0, 0);
    i1 = std::min(i1, g.nx() - 1);
    j1 = std::min(j1, g.ny() - 1);

    // Edge ids: 2*node for the edge to the right neighbour, 2*node+1 upward.
    std::unordered_map<std::int64_t, Point2> points;
    std::unordered_map<std::int64_t, EdgeLinks> links;
    auto edge_point = [&](std::int64_t id, std::size_t ka, std::size_t kb) {
        if (points.count(id)) return;
        const double va = psi[ka];
        const double vb = psi[kb];
        const double t = va / (va - vb);
        const Point2 pa = g.node(ka);
        const Point2 pb = g.node(kb);
        points.emplace(id, pa + t * (pb - pa));
    };
    auto connect = [&](std::int64_t e, std::int64_t f) {
        links[e].add(f);
        links[f].add(e);
    };

    bool any_pos = false, any_neg = false;
    for (int j = j0; j < j1; ++j) {
        for (int i = i0; i < i1; ++i) {
            const std::size_t k00 = g.index(i, j);
            const std::size_t k10 = g.index(i + 1, j);
            const std::size_t k01 = g.index(i, j + 1);
            const std::size_t k11 = g.index(i + 1, j + 1);
            const bool s00 = psi[k00] >= 0, s10 = psi[k10] >= 0, s01 = psi[k01] >= 0, s11 = psi[k11] >= 0;
            any_pos |= s00 || s10 || s01 || s11;
            any_neg |= !s00 || !s10 || !s01 || !s11;
            const int code = s00 | (s10 << 1) | (s11 << 2) | (s01 << 3);
            if (code == 0 || code == 15) continue;
            const std::int64_t eb = 2 * static_cast<std::int64_t>(k00);      // bottom
            const std::int64_t er = 2 * static_cast<std::int64_t>(k10) + 1;  // right
            const std::int64_t et = 2 * static_cast<std::int64_t>(k01);      // top
            const std::int64_t el = 2 * static_cast<std::int64_t>(k00) + 1;  // left
            std::int64_t crossing[4];
            int nc = 0;
            if (s00 != s10) { edge_point(eb, k00, k10); crossing[nc++] = eb; }
            if (s10 != s11) { edge_point(er, k10, k11); crossing[nc++] = er; }
            if (s01 != s11) { edge_point(et, k01, k11); crossing[nc++] = et; }
            if (s00 != s01) { edge_point(el, k00, k01); crossing[nc++] = el; }
            if (nc == 2) {
                connect(crossing[0], crossing[1]);
            } else {
                const double centre = 0.25 * (psi[k00] + psi[k10] + psi[k01] + psi[k11]);
                if ((centre >= 0) == s00) {
                    connect(eb, er);  // isolates corner (i+1, j)
                    connect(et, el);  // isolates corner (i, j+1)
                } else {
                    connect(eb, el);
                    connect(er, et);
                }
            }
        }
    }
    if (!(any_pos && any_neg) && points.empty())
        throw MeasurementError("extract_contour: field has a single sign");

    Contour out;
    std::unordered_map<std::int64_t, bool> used;
    used.reserve(points.size());
    auto walk = [&](std::int64_t start) {
        std::vector<Point2> line;
        std::int64_t prev = -1;
        std::int64_t cur = start;
        while (true) {
            line.push_back(points.at(cur));
            used[cur] = true;
            const EdgeLinks& l = links[cur];
            std::int64_t next = -1;
            if (l.a >= 0 && l.a != prev && !used[l.a]) next = l.a;
            else if (l.b >= 0 && l.b != prev && !used[l.b]) next = l.b;
            if (next < 0) {
                // Closed loop: the start is a neighbour of the last edge.
                if (line.size() > 2 && (l.a == start || l.b == start)) line.push_back(points.at(start));
                break;
            }
            prev = cur;
            cur = next;
        }
        out.polylines.push_back(std::move(line));
    };
    // Deterministic order: sort edge ids.
    std::vector<std::int64_t> ids;
    ids.reserve(points.size());
    for (const auto& kv : points) ids.push_back(kv.first);
    std::sort(ids.begin(), ids.end());
    for (auto id : ids) {
        const EdgeLinks& l = links[id];
        if (!used[id] && (l.a < 0 || l.b < 0)) walk(id);
    }
    for (auto id : ids)
        if (!used[id]) walk(id);
    return out;
}

Contour extract_contour(const ScalarField& psi) {
    const Grid2& g = psi.grid();
    return extract_contour(psi, 0, g.nx() - 1, 0, g.ny() - 1);
}

double polygon_area(std::span<const Point2> pts) {
    double a = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) a += cross(pts[k], pts[k + 1]);
    if (!pts.empty() && !(pts.front() == pts.back())) a += cross(pts.back(), pts.front());
    return 0.5 * std::abs(a);
}

namespace {

struct BilinearSample {
    double value;
    Point2 grad;
};

BilinearSample bilinear(const ScalarField& f, Point2 p) {
    const Grid2& g = f.grid();
    const double h = g.h();
    const double fx = std::clamp((p.x - g.origin().x) / h, 0.0, double(g.nx() - 1));
    const double fy = std::clamp((p.y - g.origin().y) / h, 0.0, double(g.ny() - 1));
    const int i = std::min(static_cast<int>(fx), g.nx() - 2);
    const int j = std::min(static_cast<int>(fy), g.ny() - 2);
    const double tx = fx - i, ty = fy - j;
    const double a = f(i, j), b = f(i + 1, j), c = f(i, j + 1), d = f(i + 1, j + 1);
    const double v = (1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * c + tx * d);
    const double gx = ((1 - ty) * (b - a) + ty * (d - c)) / h;
    const double gy = ((1 - tx) * (c - a) + tx * (d - b)) / h;
    return {v, {gx, gy}};
}

double minimax_residual(const ScalarField* f[3], Point2 p) {
    double r = 0.0;
    for (int k = 0; k < 3; ++k) r = std::max(r, std::abs(f[k]->sample(p)));
    return r;
}

}  // namespace

Point2 locate_tj(const Phase& a, const Phase& b, const Phase& c) {
    const ScalarField* f[3] = {&a.psi, &b.psi, &c.psi};
    const Grid2& g = a.psi.grid();
    if (!(b.psi.grid() == g) || !(c.psi.grid() == g)) throw ConfigError("phases on different grids");
    const double h = g.h();

    std::size_t best = 0;
    double best_r = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double r = std::max({std::abs(a.psi[k]), std::abs(b.psi[k]), std::abs(c.psi[k])});
        if (r < best_r) {
            best_r = r;
            best = k;
        }
    }
    Point2 p = g.node(best);
    double pr = best_r;

    // Chebyshev-centre iterations on the linearised |psi_k|: the optimum of a
    // max of three affine moduli has all three equal.
    for (int iter = 0; iter < 8; ++iter) {
        BilinearSample s[3];
        for (int k = 0; k < 3; ++k) s[k] = bilinear(*f[k], p);
        Point2 best_step{};
        double best_t = std::numeric_limits<double>::infinity();
        for (int signs = 0; signs < 8; ++signs) {
            // sigma_k * (v_k + g_k . d) - t = 0
            double m[3][4];
            for (int k = 0; k < 3; ++k) {
                const double sg = (signs >> k) & 1 ? -1.0 : 1.0;
                m[k][0] = sg * s[k].grad.x;
                m[k][1] = sg * s[k].grad.y;
                m[k][2] = -1.0;
                m[k][3] = -sg * s[k].value;
            }
            const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            if (std::abs(det) < 1e-12) continue;
            auto solve_col = [&](int col) {
                double mm[3][3];
                for (int r = 0; r < 3; ++r)
                    for (int q = 0; q < 3; ++q) mm[r][q] = (q == col) ? m[r][3] : m[r][q];
                return (mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1]) -
                        mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0]) +
                        mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0])) /
                       det;
            };
            const double dx = solve_col(0), dy = solve_col(1), t = solve_col(2);
            if (t < -1e-14 || t >= best_t) continue;
            best_t = t;
            best_step = {dx, dy};
        }
        if (!std::isfinite(best_t)) break;
        const double len = norm(best_step);
        if (len > 2.0 * h) best_step = (2.0 * h / len) * best_step;
        const Point2 q = p + best_step;
        const double qr = minimax_residual(f, q);
        if (qr > pr) break;
        const bool done = norm(q - p) < 1e-9 * h;
        p = q;
        pr = qr;
        if (done) break;
    }
    // Voids or overlaps up to the default smoothing half-width still count as
    // one junction.
    if (pr > 2.0 * h) throw MeasurementError("locate_tj: no common junction of the three phases");
    return p;
}

Point2 locate_tj(std::span<const Phase> phases) {
    if (phases.size() != 3) throw MeasurementError("locate_tj needs exactly three phases");
    return locate_tj(phases[0], phases[1], phases[2]);
}

std::array<double, 3> dihedral_angles(std::span<const Phase> phases, Point2 tj, const AngleOptions& opts) {
    if (phases.size() != 3) throw MeasurementError("dihedral_angles needs exactly three phases");
    const Grid2& g = phases[0].psi.grid();
    const double h = g.h();
    const double r_in = opts.r_in_cells * h;
    const double r_out = opts.r_out_cells * h;
    if (!(r_in < r_out)) throw ConfigError("annulus needs r_in < r_out");

    const double reach = r_out + 2.0 * h;
    const int ia = static_cast<int>(std::floor((tj.x - reach - g.origin().x) / h));
    const int ib = static_cast<int>(std::ceil((tj.x + reach - g.origin().x) / h));
    const int ja = static_cast<int>(std::floor((tj.y - reach - g.origin().y) / h));
    const int jb = static_cast<int>(std::ceil((tj.y + reach - g.origin().y) / h));
    const int i0 = std::max(ia, 0), i1 = std::min(ib, g.nx() - 1);
    const int j0 = std::max(ja, 0), j1 = std::min(jb, g.ny() - 1);
    if (i1 - i0 < 2 || j1 - j0 < 2) throw MeasurementError("junction window outside the grid");
    const Grid2 sub(i1 - i0 + 1, j1 - j0 + 1, h, g.node(i0, j0));

    // Ray direction for each pair: 0 = (0,1), 1 = (0,2), 2 = (1,2).
    const int pairs[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};
    Point2 dir[3];
    for (int pr = 0; pr < 3; ++pr) {
        const auto& pa = phases[static_cast<std::size_t>(pairs[pr][0])].psi;
        const auto& pb = phases[static_cast<std::size_t>(pairs[pr][1])].psi;
        const auto& pc = phases[static_cast<std::size_t>(pairs[pr][2])].psi;
        ScalarField diff(sub);
        for (int j = 0; j < sub.ny(); ++j)
            for (int i = 0; i < sub.nx(); ++i) diff(i, j) = pa(i0 + i, j0 + j) - pb(i0 + i, j0 + j);
        std::vector<Point2> pts;
        try {
            const Contour c = extract_contour(diff);
            for (const auto& line : c.polylines) {
                for (std::size_t q = 0; q < line.size(); ++q) {
                    if (q + 1 == line.size() && line.size() > 2 && line.front() == line.back()) continue;
                    const Point2 p = line[q];
                    const double r = distance(p, tj);
                    if (r < r_in || r > r_out) continue;
                    if (pa.sample(p) < pc.sample(p)) continue;
                    pts.push_back(p);
                }
            }
        } catch (const MeasurementError&) {
        }
        if (static_cast<int>(pts.size()) < opts.min_points)
            throw MeasurementError("dihedral_angles: too few boundary points in the annulus");
        Point2 mean{};
        for (const auto& p : pts) mean = mean + p;
        mean = (1.0 / static_cast<double>(pts.size())) * mean;
        double sxx = 0, sxy = 0, syy = 0;
        for (const auto& p : pts) {
            const Point2 d = p - mean;
            sxx += d.x * d.x;
            sxy += d.x * d.y;
            syy += d.y * d.y;
        }
        const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
        Point2 u{std::cos(theta), std::sin(theta)};
        if (dot(u, mean - tj) < 0) u = -1.0 * u;
        if (opts.quadratic) {
            // Offset q(t) = a + b t + c t^2 across the line; the tangent at the
            // junction follows the slope at t = 0.
            const Point2 nrm{-u.y, u.x};
            double m[3][3] = {}, rhs[3] = {};
            for (const auto& p : pts) {
                const double t = dot(p - tj, u), q = dot(p - tj, nrm);
                const double basis[3] = {1.0, t, t * t};
                for (int r = 0; r < 3; ++r) {
                    rhs[r] += basis[r] * q;
                    for (int c = 0; c < 3; ++c) m[r][c] += basis[r] * basis[c];
                }
            }
            const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            if (std::abs(det) > 1e-300) {
                const double det_b = m[0][0] * (rhs[1] * m[2][2] - m[1][2] * rhs[2]) -
                                     rhs[0] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                                     m[0][2] * (m[1][0] * rhs[2] - rhs[1] * m[2][0]);
                const double b = det_b / det;
                const Point2 d = u + b * nrm;
                u = (1.0 / norm(d)) * d;
            }
        }
        dir[pr] = u;
    }

    const double rho = 0.5 * (r_in + r_out);
    auto grain_angle = [&](int grain, Point2 u, Point2 w) {
        double phi = std::atan2(cross(u, w), dot(u, w));
        if (phi < 0) phi += 2.0 * std::numbers::pi;
        const double base = std::atan2(u.y, u.x);
        const double mid = base + 0.5 * phi;
        const Point2 in{tj.x + rho * std::cos(mid), tj.y + rho * std::sin(mid)};
        const Point2 out{tj.x - rho * std::cos(mid), tj.y - rho * std::sin(mid)};
        const auto& f = phases[static_cast<std::size_t>(grain)].psi;
        return f.sample(in) >= f.sample(out) ? phi : 2.0 * std::numbers::pi - phi;
    };
    return {grain_angle(0, dir[0], dir[1]), grain_angle(1, dir[0], dir[2]), grain_angle(2, dir[1], dir[2])};
}

namespace {

double ls_slope(std::span<const double> t, std::span<const double> y) {
    const double n = static_cast<double>(t.size());
    double st = 0, sy = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        st += t[k];
        sy += y[k];
    }
    const double mt = st / n, my = sy / n;
    double num = 0, den = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        num += (t[k] - mt) * (y[k] - my);
        den += (t[k] - mt) * (t[k] - mt);
    }
    return den > 0 ? num / den : 0.0;
}

}  // namespace

VelocityEstimate tj_velocity(std::span<const TJRecord> records, std::size_t window,
                             const QuasiStaticPolicy& policy) {
    VelocityEstimate est;
    if (window < 4 || records.size() < window) return est;
    const auto recs = records.subspan(records.size() - window);
    std::vector<double> t(window), y(window), x(window);
    for (std::size_t k = 0; k < window; ++k) {
        t[k] = recs[k].t;
        y[k] = recs[k].pos.y;
        x[k] = recs[k].pos.x;
    }
    const std::size_t half = window / 2;
    est.determined = true;
    est.v = ls_slope(t, y);
    est.vx = ls_slope(t, x);
    est.v_first = ls_slope(std::span(t).first(half), std::span(y).first(half));
    est.v_second = ls_slope(std::span(t).last(half), std::span(y).last(half));
    for (int a = 0; a < 3; ++a) {
        double m1 = 0, m2 = 0, m = 0;
        for (std::size_t k = 0; k < half; ++k) m1 += recs[k].angles[a];
        for (std::size_t k = window - half; k < window; ++k) m2 += recs[k].angles[a];
        for (std::size_t k = 0; k < window; ++k) m += recs[k].angles[a];
        m1 /= static_cast<double>(half);
        m2 /= static_cast<double>(half);
        est.mean_angles[static_cast<std::size_t>(a)] = m / static_cast<double>(window);
        est.angle_drift = std::max(est.angle_drift, std::abs(m2 - m1));
    }
    const double dv = std::abs(est.v_second - est.v_first);
    const bool steady_v = dv < policy.rel_velocity_tol * std::abs(est.v) || dv < policy.abs_velocity_tol;
    est.quasi_static = steady_v && est.angle_drift < analytic::radians(policy.angle_drift_deg);
    return est;
}

Profile sample_profile(std::span<const Phase> phases, std::size_t n_samples) {
    if (phases.size() != 3) throw MeasurementError("sample_profile needs exactly three phases");
    if (n_samples < 2) throw ConfigError("profile needs at least 2 samples");
    const Grid2& g = phases[0].psi.grid();
    const double h = g.h();
    ScalarField top(g);
    for (std::size_t k = 0; k < g.size(); ++k)
        top[k] = phases[0].psi[k] - std::max(phases[1].psi[k], phases[2].psi[k]);
    const Contour c = extract_contour(top);

    const std::vector<Point2>* line = nullptr;
    double best_span = -1.0;
    for (const auto& l : c.polylines) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& p : l) {
            lo = std::min(lo, p.x);
            hi = std::max(hi, p.x);
        }
        if (hi - lo > best_span) {
            best_span = hi - lo;
            line = &l;
        }
    }
    const double xmin = g.origin().x;
    const double xmax = g.xmax();
    if (!line || best_span < (xmax - xmin) - 2.0 * h)
        throw MeasurementError("sample_profile: top boundary does not span the domain");
    for (std::size_t k = 0; k + 1 < line->size(); ++k)
        if (distance((*line)[k], (*line)[k + 1]) > 2.0 * h)
            throw MeasurementError("sample_profile: gap in the top boundary contour");

    Profile prof;
    double prev_y = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t s = 0; s < n_samples; ++s) {
        const double xs = xmin + (xmax - xmin) * static_cast<double>(s) / static_cast<double>(n_samples - 1);
        double best = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t k = 0; k + 1 < line->size(); ++k) {
            const Point2 a = (*line)[k], b = (*line)[k + 1];
            const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
            if (xs < lo - 1e-12 || xs > hi + 1e-12) continue;
            const double yv = (hi - lo) < 1e-15 ? 0.5 * (a.y + b.y) : a.y + (xs - a.x) / (b.x - a.x) * (b.y - a.y);
            if (std::isnan(best) || (!std::isnan(prev_y) && std::abs(yv - prev_y) < std::abs(best - prev_y)))
                best = yv;
        }
        if (std::isnan(best)) {
            // End stations can fall a rounding error outside the contour.
            const Point2& e = std::abs(line->front().x - xs) < std::abs(line->back().x - xs) ? line->front() : line->back();
            if (std::abs(e.x - xs) > h) throw MeasurementError("sample_profile: station not covered");
            best = e.y;
        }
        prof.x.push_back(xs);
        prof.y.push_back(best);
        prev_y = best;
    }
    return prof;
}

ProfileComparison compare_profile(const Profile& measured, double v_tj) {
    if (measured.x.size() < 2) throw ConfigError("profile too short");
    ProfileComparison cmp;
    // Measured value at x = 0.
    double y0 = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k + 1 < measured.x.size(); ++k) {
        const double a = measured.x[k], b = measured.x[k + 1];
        if (a <= 0.0 && b >= 0.0) {
            const double t = (b - a) > 0 ? (0.0 - a) / (b - a) : 0.0;
            y0 = measured.y[k] + t * (measured.y[k + 1] - measured.y[k]);
            break;
        }
    }
    if (std::isnan(y0)) throw MeasurementError("profile does not contain x = 0");
    cmp.shift = analytic::garcke_profile(0.0, 0.0, v_tj) - y0;
    double acc = 0.0;
    cmp.measured.x = measured.x;
    for (std::size_t k = 0; k < measured.x.size(); ++k) {
        const double xa = std::clamp(measured.x[k], -0.5, 0.5);
        const double ya = analytic::garcke_profile(xa, 0.0, v_tj);
        const double ym = measured.y[k] + cmp.shift;
        cmp.measured.y.push_back(ym);
        cmp.analytic.push_back(ya);
        acc += (ym - ya) * (ym - ya);
    }
    cmp.rms = std::sqrt(acc / static_cast<double>(measured.x.size()));
    return cmp;
}

DefectReport vacuum_overlap_report(std::span<const Phase> phases, double eps, std::span<const Point2> junctions,
                                   double exclusion_radius) {
    DefectReport rep;
    if (phases.empty()) return rep;
    const Grid2& g = phases[0].psi.grid();
    const double cell = g.h() * g.h();
    for (std::size_t k = 0; k < g.size(); ++k) {
        bool skip = false;
        for (const auto& ph : phases) skip |= ph.is_frozen(k);
        if (skip) continue;
        const Point2 x = g.node(k);
        for (const auto& tj : junctions) skip |= distance(x, tj) < exclusion_radius;
        if (skip) continue;
        double d = 1.0;
        for (const auto& ph : phases) d -= heaviside(ph.psi[k], eps);
        rep.max_vacuum = std::max(rep.max_vacuum, d);
        rep.max_overlap = std::max(rep.max_overlap, -d);
        rep.l1_defect += std::abs(d) * cell;
    }
    return rep;
}

void write_tj_csv(std::ostream& out, std::span<const TJRecord> records) {
    out << "t,x,y,xi0,xi1,xi2,v,quasi_static\n" << std::setprecision(12);
    for (const auto& r : records) {
        out << r.t << ',' << r.pos.x << ',' << r.pos.y << ',' << analytic::degrees(r.angles[0]) << ','
            << analytic::degrees(r.angles[1]) << ',' << analytic::degrees(r.angles[2]) << ',' << r.v_inst << ','
            << (r.quasi_static ? 1 : 0) << '\n';
    }
}

void write_profile_csv(std::ostream& out, const ProfileComparison& cmp) {
    out << "x,y_measured,y_analytic\n" << std::setprecision(12);
    for (std::size_t k = 0; k < cmp.measured.x.size(); ++k)
        out << cmp.measured.x[k] << ',' << cmp.measured.y[k] << ',' << cmp.analytic[k] << '\n';
}

}  // namespace lsgb

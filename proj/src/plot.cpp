#include "lsgb/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>

#include "lsgb/analytic.hpp"
#include "lsgb/error.hpp"

namespace lsgb {

std::string to_string(PlotKind k) {
    switch (k) {
        case PlotKind::AngleVelocity: return "angle-velocity";
        case PlotKind::Profile: return "profile";
        case PlotKind::LambdaAngle: return "lambda-angle";
        case PlotKind::LambdaGamma: return "lambda-gamma";
    }
    return "unknown";
}

PlotKind parse_plot_kind(const std::string& name) {
    for (PlotKind k : {PlotKind::AngleVelocity, PlotKind::Profile, PlotKind::LambdaAngle, PlotKind::LambdaGamma})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown plot kind '" + name +
                      "' (expected angle-velocity, profile, lambda-angle or lambda-gamma)");
}

ProfileTable read_profile_csv(std::istream& in) {
    ProfileTable t;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("profile CSV is empty");
    if (line.rfind("x,y_measured,y_analytic", 0) != 0) throw ConfigError("profile CSV has an unexpected header: " + line);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        double x, m, a;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &m, &a) != 3)
            throw ConfigError("profile CSV line " + std::to_string(lineno) + " is malformed");
        t.x.push_back(x);
        t.measured.push_back(m);
        t.analytic.push_back(a);
    }
    return t;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo{std::numeric_limits<double>::infinity()};
    double hi{-std::numeric_limits<double>::infinity()};
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad(double frac) {
        if (!(hi >= lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        const double span = hi > lo ? hi - lo : std::max(1.0, std::abs(lo));
        lo -= frac * span;
        hi += frac * span;
    }
};

/// Nice tick step covering the range with about n ticks.
double tick_step(double span, int n) {
    const double raw = span / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

/// One set of axes at (x0, y0) with the given pixel size.
class Panel {
public:
    Panel(std::ostringstream& out, double x0, double y0, double w, double hgt, Range xr, Range yr)
        : out_(out), x0_(x0), y0_(y0), w_(w), h_(hgt), xr_(xr), yr_(yr) {}

    double px(double x) const { return x0_ + (x - xr_.lo) / (xr_.hi - xr_.lo) * w_; }
    double py(double y) const { return y0_ + h_ - (y - yr_.lo) / (yr_.hi - yr_.lo) * h_; }

    void axes(const std::string& xlabel, const std::string& ylabel, const std::string& title) {
        out_ << "<rect x=\"" << x0_ << "\" y=\"" << y0_ << "\" width=\"" << w_ << "\" height=\"" << h_
             << "\" fill=\"none\" stroke=\"black\"/>\n";
        ticks(xr_, true);
        ticks(yr_, false);
        out_ << "<text x=\"" << x0_ + w_ / 2 << "\" y=\"" << y0_ + h_ + 38
             << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(xlabel) << "</text>\n";
        out_ << "<text x=\"" << x0_ - 48 << "\" y=\"" << y0_ + h_ / 2 << "\" text-anchor=\"middle\" font-size=\"13\""
             << " transform=\"rotate(-90 " << x0_ - 48 << ' ' << y0_ + h_ / 2 << ")\">" << escape(ylabel)
             << "</text>\n";
        out_ << "<text x=\"" << x0_ + w_ / 2 << "\" y=\"" << y0_ - 10
             << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
    }

    void polyline(std::span<const double> xs, std::span<const double> ys, const std::string& style) {
        out_ << "<polyline fill=\"none\" " << style << " points=\"";
        for (std::size_t k = 0; k < xs.size(); ++k)
            if (std::isfinite(xs[k]) && std::isfinite(ys[k])) out_ << fmt(px(xs[k])) << ',' << fmt(py(ys[k])) << ' ';
        out_ << "\"/>\n";
    }

    void polygon(std::span<const double> xs, std::span<const double> ys, const std::string& style) {
        out_ << "<polygon " << style << " points=\"";
        for (std::size_t k = 0; k < xs.size(); ++k) out_ << fmt(px(xs[k])) << ',' << fmt(py(ys[k])) << ' ';
        out_ << "\"/>\n";
    }

    void dot(double x, double y, const std::string& fill, const std::string& tip) {
        out_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"4\" fill=\"" << fill
             << "\" stroke=\"black\" stroke-width=\"0.5\"><title>" << escape(tip) << "</title></circle>\n";
    }

    void cell(double x, double y, double dx, double dy, const std::string& fill, const std::string& tip) {
        const double a = px(x - dx / 2), b = py(y + dy / 2);
        out_ << "<rect x=\"" << fmt(a) << "\" y=\"" << fmt(b) << "\" width=\"" << fmt(px(x + dx / 2) - a)
             << "\" height=\"" << fmt(py(y - dy / 2) - b) << "\" fill=\"" << fill << "\"><title>" << escape(tip)
             << "</title></rect>\n";
    }

    void clip_begin(const std::string& id) {
        out_ << "<clipPath id=\"" << id << "\"><rect x=\"" << x0_ << "\" y=\"" << y0_ << "\" width=\"" << w_
             << "\" height=\"" << h_ << "\"/></clipPath>\n<g clip-path=\"url(#" << id << ")\">\n";
    }
    void clip_end() { out_ << "</g>\n"; }

private:
    void ticks(const Range& r, bool horizontal) {
        const double step = tick_step(r.hi - r.lo, 5);
        for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-12 * step; v += step) {
            const double vv = std::abs(v) < 1e-12 * step ? 0.0 : v;
            if (horizontal) {
                const double x = px(vv);
                out_ << "<line x1=\"" << fmt(x) << "\" y1=\"" << y0_ + h_ << "\" x2=\"" << fmt(x) << "\" y2=\""
                     << y0_ + h_ + 5 << "\" stroke=\"black\"/><text x=\"" << fmt(x) << "\" y=\"" << y0_ + h_ + 18
                     << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(vv) << "</text>\n";
            } else {
                const double y = py(vv);
                out_ << "<line x1=\"" << x0_ - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << x0_ << "\" y2=\"" << fmt(y)
                     << "\" stroke=\"black\"/><text x=\"" << x0_ - 8 << "\" y=\"" << fmt(y + 4)
                     << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(vv) << "</text>\n";
            }
        }
    }

    std::ostringstream& out_;
    double x0_, y0_, w_, h_;
    Range xr_, yr_;
};

void begin(std::ostringstream& out, int width, int height) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void metadata(std::ostringstream& out, const std::vector<std::pair<std::string, std::string>>& kv) {
    out << "<metadata>\n";
    for (const auto& [k, v] : kv) out << "  <lsgb:item xmlns:lsgb=\"urn:lsgb\" key=\"" << k << "\">" << escape(v) << "</lsgb:item>\n";
    out << "</metadata>\n";
}

/// Blue to red colour ramp, t in [0, 1].
std::string ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255 * std::min(1.0, 2 * t)));
    const int b = static_cast<int>(std::lround(255 * std::min(1.0, 2 * (1 - t))));
    const int g = static_cast<int>(std::lround(255 * (1 - std::abs(2 * t - 1)) * 0.85));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

std::vector<const SweepRow*> usable(std::span<const SweepRow> rows, bool young_only) {
    std::vector<const SweepRow*> out;
    for (const auto& r : rows) {
        if (r.status != "ok") continue;
        if (young_only && r.kind != "young") continue;
        out.push_back(&r);
    }
    if (out.empty())
        throw ConfigError(young_only ? "no successful young rows to plot" : "no successful rows to plot");
    return out;
}

/// Heat map of value(row) on the (lambda1, lambda2) lattice, with a colour bar.
void heat_panel(std::ostringstream& out, double x0, double y0, const std::vector<const SweepRow*>& rows,
                double (*value)(const SweepRow&), const std::string& label) {
    std::vector<double> l1, l2;
    Range vr;
    for (const auto* r : rows) {
        l1.push_back(r->lambda1);
        l2.push_back(r->lambda2);
        if (r->flag.empty()) vr.add(value(*r));
    }
    auto spacing = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        double d = 1.0;
        for (std::size_t k = 1; k < v.size(); ++k) d = std::min(d, v[k] - v[k - 1]);
        return v.size() > 1 ? d : 0.1;
    };
    const double d1 = spacing(l1), d2 = spacing(l2);
    Range xr, yr;
    for (double v : l1) xr.add(v);
    for (double v : l2) yr.add(v);
    xr.lo -= d1 / 2;
    xr.hi += d1 / 2;
    yr.lo -= d2 / 2;
    yr.hi += d2 / 2;
    if (!(vr.hi >= vr.lo)) vr = {0.0, 1.0};
    const double vspan = vr.hi > vr.lo ? vr.hi - vr.lo : 1.0;
    Panel p(out, x0, y0, 360, 360, xr, yr);
    for (const auto* r : rows) {
        const double v = value(*r);
        const std::string tip = "lambda1=" + fmt(r->lambda1) + " lambda2=" + fmt(r->lambda2) + " " + label + "=" +
                                fmt(v) + (r->flag.empty() ? "" : " (" + r->flag + ")");
        p.cell(r->lambda1, r->lambda2, d1, d2, r->flag.empty() ? ramp((v - vr.lo) / vspan) : "#bbbbbb", tip);
    }
    p.axes("lambda1", "lambda2", label);
    for (int k = 0; k < 50; ++k)
        out << "<rect x=\"" << x0 + 375 << "\" y=\"" << fmt(y0 + 360 - (k + 1) * 7.2) << "\" width=\"14\" height=\"7.3\" fill=\""
            << ramp((k + 0.5) / 50) << "\"/>\n";
    out << "<text x=\"" << x0 + 393 << "\" y=\"" << y0 + 360 << "\" font-size=\"11\">" << fmt(vr.lo) << "</text>\n"
        << "<text x=\"" << x0 + 393 << "\" y=\"" << y0 + 10 << "\" font-size=\"11\">" << fmt(vr.hi) << "</text>\n";
}

}  // namespace

std::string svg_angle_velocity(std::span<const SweepRow> rows, double band) {
    const auto pts = usable(rows, false);
    std::ostringstream out;
    begin(out, 640, 520);
    const double pi = std::numbers::pi;
    Range xr{0.0, 180.0}, yr{0.0, pi};
    for (const auto* r : pts) {
        xr.add(r->xi0_deg);
        yr.add(r->v);
    }
    Panel p(out, 80, 40, 520, 400, xr, yr);
    // The perpendicular band around v = pi - xi0 in (radian, v) units maps to
    // a vertical half-width of band*sqrt(2) in v.
    const double half = band * std::sqrt(2.0);
    std::vector<double> bx, by;
    for (double d : {xr.lo, xr.hi}) {
        bx.push_back(d);
        by.push_back(pi - analytic::radians(d) + half);
    }
    for (double d : {xr.hi, xr.lo}) {
        bx.push_back(d);
        by.push_back(pi - analytic::radians(d) - half);
    }
    p.clip_begin("av");
    p.polygon(bx, by, "fill=\"#cfe3ff\" stroke=\"none\"");
    const std::vector<double> lx{xr.lo, xr.hi}, ly{pi - analytic::radians(xr.lo), pi - analytic::radians(xr.hi)};
    p.polyline(lx, ly, "stroke=\"#1f4e9c\" stroke-width=\"1.5\"");
    int inside = 0;
    double worst = 0.0;
    for (const auto* r : pts) {
        const double dev = analytic::deviation_from_line(analytic::radians(r->xi0_deg), r->v);
        worst = std::max(worst, dev);
        if (dev <= band) ++inside;
        p.dot(r->xi0_deg, r->v, dev <= band ? "#e8702a" : "#c00000",
              r->key + " xi0=" + fmt(r->xi0_deg) + " v=" + fmt(r->v) + " dev=" + fmt(dev));
    }
    p.clip_end();
    p.axes("top dihedral angle (deg)", "junction velocity", "junction velocity against top angle");
    metadata(out, {{"kind", "angle-velocity"},
                   {"points", std::to_string(pts.size())},
                   {"within_band", std::to_string(inside)},
                   {"band", fmt(band)},
                   {"max_deviation", fmt(worst)}});
    out << "</svg>\n";
    return out.str();
}

std::string svg_profile(const ProfileTable& t) {
    if (t.x.empty()) throw ConfigError("profile table has no rows");
    std::ostringstream out;
    begin(out, 640, 520);
    Range xr, yr;
    double sq = 0.0;
    for (std::size_t k = 0; k < t.x.size(); ++k) {
        xr.add(t.x[k]);
        yr.add(t.measured[k]);
        yr.add(t.analytic[k]);
        sq += (t.measured[k] - t.analytic[k]) * (t.measured[k] - t.analytic[k]);
    }
    yr.pad(0.08);
    Panel p(out, 80, 40, 520, 400, xr, yr);
    p.polyline(t.x, t.analytic, "stroke=\"black\" stroke-width=\"2\"");
    p.polyline(t.x, t.measured, "stroke=\"#e8702a\" stroke-width=\"1.5\" stroke-dasharray=\"6 3\"");
    p.axes("x", "y (aligned at the junction)", "boundary profile: measured (dashed) and analytic (solid)");
    metadata(out, {{"kind", "profile"},
                   {"samples", std::to_string(t.x.size())},
                   {"rms", fmt(std::sqrt(sq / static_cast<double>(t.x.size())))}});
    out << "</svg>\n";
    return out.str();
}

std::string svg_lambda_angle(std::span<const SweepRow> rows) {
    const auto pts = usable(rows, true);
    std::ostringstream out;
    begin(out, 560, 460);
    heat_panel(out, 80, 40, pts, [](const SweepRow& r) { return r.xi0_deg; }, "top angle (deg)");
    metadata(out, {{"kind", "lambda-angle"}, {"points", std::to_string(pts.size())}});
    out << "</svg>\n";
    return out.str();
}

std::string svg_lambda_gamma(std::span<const SweepRow> rows) {
    const auto pts = usable(rows, true);
    std::ostringstream out;
    begin(out, 1060, 460);
    heat_panel(out, 80, 40, pts, [](const SweepRow& r) { return r.gamma02; }, "gamma02");
    heat_panel(out, 580, 40, pts, [](const SweepRow& r) { return r.gamma01; }, "gamma01");
    metadata(out, {{"kind", "lambda-gamma"}, {"points", std::to_string(pts.size())}});
    out << "</svg>\n";
    return out.str();
}

}  // namespace lsgb

#include "lsgb/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "lsgb/analytic.hpp"
#include "lsgb/error.hpp"

namespace lsgb {

namespace {

constexpr double pi = std::numbers::pi;

void require_lambda(double l, const char* name) {
    if (!(l > 0.0) || !(l <= 1.0)) {
        std::ostringstream msg;
        msg << name << " = " << l << " must lie in (0, 1]";
        throw ConfigError(msg.str());
    }
}

void require_spacing(double h, double extent) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid spacing must be positive");
    if (h > extent / 20.0) throw ConfigError("grid spacing too coarse for the domain");
}

}  // namespace

Microstructure build_garcke(const GarckeScenario& scn, Formulation formulation) {
    require_lambda(scn.lambda_top, "lambda_top");
    require_lambda(scn.lambda_bot, "lambda_bot");
    if (!(scn.width > 0.0) || !(scn.height > 0.0)) throw ConfigError("domain extent must be positive");
    require_spacing(scn.h, std::min(scn.width, scn.height));
    if (scn.y0 > scn.height - 0.1 * scn.width || scn.y0 < 0.3 * scn.width)
        throw ConfigError("initial junction too close to the domain boundary");
    if (!(scn.stop_height < scn.y0) || scn.stop_height < 0.1 * scn.width)
        throw ConfigError("stop height must lie between 0.1*width and y0");

    const double half = 0.5 * scn.width;
    const Grid2 grid = Grid2::covering(-half, half, 0.0, scn.height, scn.h);
    // Polygons reach past the domain so that only the boundary edges matter.
    const double m = scn.width + scn.height;
    const double y0 = scn.y0;
    const PolygonRegion top{{{-half - m, y0}, {half + m, y0}, {half + m, scn.height + m}, {-half - m, scn.height + m}},
                            {true, false, false, false}};
    const PolygonRegion left{{{-half - m, -m}, {0.0, -m}, {0.0, y0}, {-half - m, y0}}, {false, true, true, false}};
    const PolygonRegion right{{{0.0, -m}, {half + m, -m}, {half + m, y0}, {0.0, y0}}, {false, false, true, true}};

    Microstructure ms{grid, {}, 1.0, 1.0, formulation, scn.lambda_max};
    ms.phases.push_back(Phase{0, init_signed_distance(top, grid), scn.lambda_top, {}, {}});
    ms.phases.push_back(Phase{1, init_signed_distance(left, grid), scn.lambda_bot, {}, {}});
    ms.phases.push_back(Phase{2, init_signed_distance(right, grid), scn.lambda_bot, {}, {}});
    ms.validate();
    return ms;
}

std::array<Point2, 3> young_triangle() {
    const double s = std::sqrt(3.0) / 2.0;
    return {Point2{0.0, 1.0}, Point2{-s, -0.5}, Point2{s, -0.5}};
}

double young_equilibrium_height(double xi0) {
    if (!(xi0 > 0.0) || !(xi0 < pi)) throw ConfigError("top angle must lie in (0, pi)");
    return 0.25 - (std::sqrt(3.0) / 4.0) / std::tan(0.5 * xi0);
}

Microstructure build_young(const YoungScenario& scn, Formulation formulation) {
    require_lambda(scn.lambda0, "lambda0");
    require_lambda(scn.lambda1, "lambda1");
    require_lambda(scn.lambda2, "lambda2");
    require_spacing(scn.h, 1.0);

    const auto tri = young_triangle();
    const double margin = 2.0 * scn.h;
    const Grid2 grid = Grid2::covering(tri[1].x - margin, tri[2].x + margin, -0.5 - margin, 1.0 + margin, scn.h);

    // Boundaries run from the incentre to the side midpoints; grains are the
    // three wedges between them, closed far outside the triangle.
    const double k = 4.0;
    auto ray = [&](double deg) {
        const double a = analytic::radians(deg);
        return Point2{k * std::cos(a), k * std::sin(a)};
    };
    const Point2 o{0.0, 0.0};
    const PolygonRegion g0{{o, ray(30), ray(90), ray(150)}, {true, false, false, true}};
    const PolygonRegion g1{{o, ray(150), ray(210), ray(270)}, {true, false, false, true}};
    const PolygonRegion g2{{o, ray(270), ray(330), ray(30)}, {true, false, false, true}};

    Microstructure ms{grid, {}, 1.0, 1.0, formulation, scn.lambda_max};
    ms.phases.push_back(Phase{0, init_signed_distance(g0, grid), scn.lambda0, {}, {}});
    ms.phases.push_back(Phase{1, init_signed_distance(g1, grid), scn.lambda1, {}, {}});
    ms.phases.push_back(Phase{2, init_signed_distance(g2, grid), scn.lambda2, {}, {}});

    // Signed distance to the triangle sides, positive inside.
    std::vector<std::uint8_t> mask(grid.size(), 0);
    for (std::size_t n = 0; n < grid.size(); ++n) {
        const Point2 p = grid.node(n);
        double d = std::numeric_limits<double>::infinity();
        for (int e = 0; e < 3; ++e) {
            const Point2 a = tri[static_cast<std::size_t>(e)];
            const Point2 b = tri[static_cast<std::size_t>((e + 1) % 3)];
            const Point2 t = b - a;
            // Corners are listed counterclockwise, so the interior is on the left.
            d = std::min(d, cross(t, p - a) / norm(t));
        }
        mask[n] = d < scn.h * (1.0 + 1e-9) ? 1 : 0;
    }
    for (auto& ph : ms.phases) ph.freeze(mask);
    ms.validate();
    return ms;
}

Microstructure build_circle(const CircleScenario& scn) {
    require_spacing(scn.h, 1.0);
    if (!(scn.radius > 2.0 * scn.h) || scn.radius > 0.45) throw ConfigError("circle radius out of range");
    const Grid2 grid = Grid2::covering(0.0, 1.0, 0.0, 1.0, scn.h);
    Microstructure ms{grid, {}, 1.0, 1.0, Formulation::PlainMCF, 600.0};
    ms.phases.push_back(Phase{0, init_signed_distance(Circle{{0.5, 0.5}, scn.radius, true}, grid), 1.0, {}, {}});
    ms.validate();
    return ms;
}

RunOptions default_run_options(double h) {
    RunOptions o;
    o.solver.dt = default_time_step(h);
    o.solver.eps_heaviside = 2.0 * h;
    o.solver.band_width = 20.0 * h;
    o.solver.t_end = 3.0;
    o.solver.reinit_every = 1;
    return o;
}

std::array<double, 2> infer_gamma_from_measurement(double xi1, double xi2) {
    const double xi0 = 2.0 * pi - xi1 - xi2;
    const double s0 = std::sin(xi0);
    if (std::abs(s0) < 1e-9) throw MeasurementError("degenerate junction: sin(xi0) vanishes");
    return {std::sin(xi1) / s0, std::sin(xi2) / s0};
}

DistanceErrors distance_property_error(const Phase& phase, double limit, std::span<const Point2> junctions,
                                       double exclusion, double kink_jump, double far_cells) {
    const ScalarField& psi = phase.psi;
    const Grid2& g = psi.grid();
    const double h = g.h();
    DistanceErrors out;
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            if (std::abs(psi[k]) > limit || phase.is_frozen(k)) continue;
            const Point2 x = g.node(i, j);
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& tj : junctions) nearest = std::min(nearest, distance(x, tj));
            if (nearest <= exclusion) continue;
            const double e = std::abs(upwind_gradient_norm_at(psi, i, j) - 1.0);
            out.all = std::max(out.all, e);
            const double c = psi[k];
            const double jx = std::abs(psi(g.mirror_i(i + 1), j) - 2.0 * c + psi(g.mirror_i(i - 1), j)) / h;
            const double jy = std::abs(psi(i, g.mirror_j(j + 1)) - 2.0 * c + psi(i, g.mirror_j(j - 1))) / h;
            if (std::max(jx, jy) > kink_jump) continue;
            out.off_kinks = std::max(out.off_kinks, e);
            if (nearest > far_cells * h) out.far = std::max(out.far, e);
        }
    }
    return out;
}

namespace {

long steps_per_interval(double interval, double dt) {
    return std::max(1L, static_cast<long>(std::llround(interval / dt)));
}

void write_snapshot(const Microstructure& ms, const std::string& dir, int index) {
    std::filesystem::create_directories(dir);
    std::vector<const ScalarField*> fields;
    std::vector<std::string> names;
    for (const auto& ph : ms.phases) {
        fields.push_back(&ph.psi);
        names.push_back("psi" + std::to_string(ph.id));
    }
    char name[64];
    std::snprintf(name, sizeof name, "snapshot_%05d.vtk", index);
    write_vtk_file((std::filesystem::path(dir) / name).string(), fields, names);
}

using ExtraStop = std::function<std::string(const Microstructure&, const TJRecord&)>;

/// `direction` projects the velocity: -1 for downward advance, 0 for speed.
RunResult run_three_phase(Microstructure ms, const RunOptions& opts, const ExtraStop& extra_stop, double direction) {
    SolverConfig cfg = opts.solver;
    const MeasureConfig& mc = opts.measure;
    cfg.snapshot_every = static_cast<int>(steps_per_interval(mc.interval, cfg.dt));
    const double h = ms.grid.h();

    RunResult res;
    int consecutive = 0;
    int snap_index = 0;
    std::size_t last_good_end = 0;  // records.size() at the last quasi-static window

    AdvanceObserver obs;
    obs.on_step = [&](const Microstructure& m, const SnapshotInfo& info) {
        if (opts.cancel && opts.cancel->load()) return StepControl::Stop;
        if (opts.track_distance && info.step % cfg.reinit_every == 0) {
            const Point2 tj = locate_tj(m.phases);
            const Point2 js[1] = {tj};
            for (const auto& ph : m.phases) {
                const DistanceErrors e = distance_property_error(ph, 0.5 * cfg.band_width, js, 2.0 * h);
                res.max_distance_error = std::max(res.max_distance_error, e.all);
                res.max_distance_error_off_kinks = std::max(res.max_distance_error_off_kinks, e.off_kinks);
                res.max_distance_error_far = std::max(res.max_distance_error_far, e.far);
            }
            ++res.distance_checks;
        }
        return StepControl::Continue;
    };
    obs.on_snapshot = [&](const Microstructure& m, const SnapshotInfo& info) {
        TJRecord rec;
        rec.t = info.t;
        rec.pos = locate_tj(m.phases);
        rec.angles = dihedral_angles(m.phases, rec.pos, mc.angles);
        res.records.push_back(rec);
        const VelocityEstimate est = tj_velocity(res.records, mc.window, mc.policy);
        if (est.determined)
            res.records.back().v_inst = direction != 0.0 ? direction * est.v : std::hypot(est.v, est.vx);
        res.records.back().quasi_static = est.quasi_static;
        if (est.quasi_static && info.t >= mc.min_time) {
            ++consecutive;
            last_good_end = res.records.size();
        } else {
            consecutive = 0;
        }
        if (!opts.vtk_dir.empty() && opts.vtk_every > 0 && snap_index % opts.vtk_every == 0)
            write_snapshot(m, opts.vtk_dir, snap_index);
        ++snap_index;
        if (opts.progress && !opts.progress(info)) {
            res.stop_reason = "aborted";
            return StepControl::Stop;
        }
        if (mc.stop_on_quasi_static && consecutive >= mc.hold) {
            res.stop_reason = "quasi-static";
            return StepControl::Stop;
        }
        if (extra_stop) {
            std::string why = extra_stop(m, res.records.back());
            if (!why.empty()) {
                res.stop_reason = std::move(why);
                return StepControl::Stop;
            }
        }
        return StepControl::Continue;
    };

    res.trajectory = advance(ms, cfg, obs);
    if (res.stop_reason.empty()) res.stop_reason = res.trajectory.stopped_by_observer ? "cancelled" : "t_end";
    if (opts.cancel && opts.cancel->load()) throw SolverError("run cancelled");

    // Report the last quasi-static window, or the trailing window otherwise.
    std::span<const TJRecord> recs(res.records);
    if (last_good_end > 0) recs = recs.first(last_good_end);
    res.velocity = tj_velocity(recs, mc.window, mc.policy);
    res.quasi_static = last_good_end > 0;
    if (res.velocity.determined) {
        res.angles = res.velocity.mean_angles;
        res.v = direction != 0.0 ? direction * res.velocity.v : std::hypot(res.velocity.v, res.velocity.vx);
    } else if (!res.records.empty()) {
        res.angles = res.records.back().angles;
    }
    res.deviation = analytic::deviation_from_line(res.angles[0], res.v);
    // Moving junctions are projected onto the line v = pi - xi0 first.
    const double xi0_line = direction != 0.0 ? 0.5 * (res.angles[0] + pi - res.v) : res.angles[0];
    if (xi0_line > 0.0 && xi0_line < pi) res.r_gamma_inferred = analytic::gamma_ratio_from_angle(xi0_line);
    try {
        res.gamma_inferred = infer_gamma_from_measurement(res.angles[1], res.angles[2]);
    } catch (const MeasurementError&) {
    }
    const Point2 tj = res.records.empty() ? locate_tj(ms.phases) : res.records.back().pos;
    const Point2 js[1] = {tj};
    res.defect = vacuum_overlap_report(ms.phases, cfg.eps_heaviside, js, 3.0 * cfg.eps_heaviside);
    res.final_state = std::move(ms);
    return res;
}

}  // namespace

RunResult run_garcke(const GarckeScenario& scn, Formulation formulation, const RunOptions& opts) {
    Microstructure ms = build_garcke(scn, formulation);
    ExtraStop stop = [&](const Microstructure&, const TJRecord& rec) -> std::string {
        if (rec.pos.y <= scn.stop_height) return "junction reached stop height";
        return {};
    };
    RunResult res = run_three_phase(std::move(ms), opts, stop, -1.0);
    try {
        const Profile p = sample_profile(res.final_state->phases, opts.measure.profile_samples);
        res.raw_profile = p;
        if (res.v > 0.0 && res.v * 0.5 < 0.5 * pi) res.profile = compare_profile(p, res.v);
    } catch (const Error&) {
    }
    return res;
}

RunResult run_young(const YoungScenario& scn, Formulation formulation, const RunOptions& opts) {
    return run_three_phase(build_young(scn, formulation), opts, {}, 0.0);
}

CircleResult run_circle(const CircleScenario& scn, const RunOptions& opts, double stop_cells) {
    Microstructure ms = build_circle(scn);
    SolverConfig cfg = opts.solver;
    const double stop_r = stop_cells * scn.h;
    // Run until the exact radius reaches the stop radius. Every step is sampled
    // so a fast collapse near the end is caught before the disk vanishes.
    cfg.t_end = 0.5 * (scn.radius * scn.radius - stop_r * stop_r);
    if (!(cfg.t_end > 0.0)) throw ConfigError("circle radius is below the stop radius");
    cfg.snapshot_every = 1;
    CircleResult out;
    AdvanceObserver obs;
    obs.on_snapshot = [&](const Microstructure& m, const SnapshotInfo& info) {
        const Contour c = extract_contour(m.phases[0].psi);
        double area = 0.0;
        for (std::size_t k = 0; k < c.polylines.size(); ++k)
            if (c.is_closed(k)) area = std::max(area, polygon_area(c.polylines[k]));
        const double r = std::sqrt(area / pi);
        const double r2 = scn.radius * scn.radius - 2.0 * info.t;
        if (r < stop_r || r2 <= 0.0) return StepControl::Stop;
        const double exact = std::sqrt(r2);
        out.t.push_back(info.t);
        out.radius.push_back(r);
        out.exact.push_back(exact);
        out.max_relative_error = std::max(out.max_relative_error, std::abs(r - exact) / exact);
        return StepControl::Continue;
    };
    advance(ms, cfg, obs);
    return out;
}

// ---------------------------------------------------------------- sweeps

std::string to_string(ScenarioKind k) { return k == ScenarioKind::Garcke ? "garcke" : "young"; }

std::string SweepTuple::key(ScenarioKind kind) const {
    std::ostringstream s;
    s << to_string(kind) << ':' << std::setprecision(10) << lambda0 << ':' << lambda1 << ':' << lambda2;
    return s.str();
}

void SweepSpec::validate() const {
    std::set<std::string> seen;
    for (const auto& t : tuples)
        if (!seen.insert(t.key(kind)).second) throw ConfigError("duplicate sweep tuple " + t.key(kind));
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    if (results_path.empty() && !tuples.empty()) throw ConfigError("sweep needs a results path");
}

std::vector<SweepTuple> table1_tuples() {
    const double lam[] = {1e-3, 1e-2, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    const double bot[] = {0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 1e-2, 1e-3};
    std::vector<SweepTuple> out;
    for (double t : lam) out.push_back({t, 1.0, 1.0});
    for (double b : bot) out.push_back({1.0, b, b});
    return out;
}

std::vector<SweepTuple> young_grid_tuples() {
    const double lam[] = {1e-3, 1e-2, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<SweepTuple> out;
    for (double l1 : lam)
        for (double l2 : lam) out.push_back({1.0, l1, l2});
    return out;
}

bool boundary_influenced(const SweepTuple& t) { return t.lambda1 + t.lambda2 < 0.1; }

std::string sweep_csv_header() {
    return "key,kind,formulation,lambda0,lambda1,lambda2,r_lambda,xi0_deg,xi1_deg,xi2_deg,v,deviation,"
           "r_gamma_inferred,gamma02,gamma01,quasi_static,flag,status,message";
}

namespace {

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    return s;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_num(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ConfigError("bad number '" + s + "' in results file");
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("bad number '" + s + "' in results file");
    }
}

}  // namespace

std::string to_csv_line(const SweepRow& r) {
    std::ostringstream s;
    s << r.key << ',' << r.kind << ',' << r.formulation << ',' << num(r.lambda0) << ',' << num(r.lambda1) << ','
      << num(r.lambda2) << ',' << num(r.r_lambda) << ',' << num(r.xi0_deg) << ',' << num(r.xi1_deg) << ','
      << num(r.xi2_deg) << ',' << num(r.v) << ',' << num(r.deviation) << ',' << num(r.r_gamma_inferred) << ','
      << num(r.gamma02) << ',' << num(r.gamma01) << ',' << (r.quasi_static ? 1 : 0) << ',' << sanitize(r.flag)
      << ',' << r.status << ',' << sanitize(r.message);
    return s.str();
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    std::vector<SweepRow> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != sweep_csv_header()) throw ConfigError("results file has an unexpected header");
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 19) throw ConfigError("results line " + std::to_string(lineno) + " has wrong field count");
        SweepRow r;
        r.key = f[0];
        r.kind = f[1];
        r.formulation = f[2];
        r.lambda0 = parse_num(f[3]);
        r.lambda1 = parse_num(f[4]);
        r.lambda2 = parse_num(f[5]);
        r.r_lambda = parse_num(f[6]);
        r.xi0_deg = parse_num(f[7]);
        r.xi1_deg = parse_num(f[8]);
        r.xi2_deg = parse_num(f[9]);
        r.v = parse_num(f[10]);
        r.deviation = parse_num(f[11]);
        r.r_gamma_inferred = parse_num(f[12]);
        r.gamma02 = parse_num(f[13]);
        r.gamma01 = parse_num(f[14]);
        r.quasi_static = f[15] == "1";
        r.flag = f[16];
        r.status = f[17];
        r.message = f[18];
        rows.push_back(std::move(r));
    }
    return rows;
}

SweepRow make_row(ScenarioKind kind, const SweepTuple& t, Formulation f, const RunResult& r) {
    SweepRow row;
    row.key = t.key(kind);
    row.kind = to_string(kind);
    row.formulation = to_string(f);
    row.lambda0 = t.lambda0;
    row.lambda1 = t.lambda1;
    row.lambda2 = t.lambda2;
    row.r_lambda = t.lambda0 / t.lambda1;
    row.xi0_deg = analytic::degrees(r.angles[0]);
    row.xi1_deg = analytic::degrees(r.angles[1]);
    row.xi2_deg = analytic::degrees(r.angles[2]);
    row.v = r.v;
    row.deviation = r.deviation;
    row.r_gamma_inferred = r.r_gamma_inferred.value_or(0.0);
    if (r.gamma_inferred) {
        row.gamma02 = (*r.gamma_inferred)[0];
        row.gamma01 = (*r.gamma_inferred)[1];
    }
    row.quasi_static = r.quasi_static;
    if (kind == ScenarioKind::Young && boundary_influenced(t)) row.flag = "boundary-influenced";
    row.status = "ok";
    row.message = r.stop_reason;
    return row;
}

SweepSummary run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepSummary summary;
    if (spec.tuples.empty()) return summary;

    std::map<std::string, SweepRow> done;
    const bool exists = std::filesystem::exists(spec.results_path);
    if (spec.resume && exists) {
        std::ifstream in(spec.results_path);
        for (auto& r : read_sweep_csv(in)) done[r.key] = std::move(r);
    } else {
        const auto parent = std::filesystem::path(spec.results_path).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        std::ofstream out(spec.results_path, std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + spec.results_path);
        out << sweep_csv_header() << '\n';
    }

    std::vector<std::size_t> todo;
    for (std::size_t k = 0; k < spec.tuples.size(); ++k) {
        if (done.count(spec.tuples[k].key(spec.kind))) ++summary.skipped;
        else todo.push_back(k);
    }

    std::mutex write_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t n = next.fetch_add(1);
            if (n >= todo.size()) return;
            const SweepTuple& t = spec.tuples[todo[n]];
            SweepRow row;
            try {
                RunResult r;
                if (spec.kind == ScenarioKind::Garcke) {
                    GarckeScenario g = spec.garcke;
                    g.lambda_top = t.lambda0;
                    g.lambda_bot = t.lambda1;
                    r = run_garcke(g, spec.formulation, spec.options);
                } else {
                    YoungScenario y = spec.young;
                    y.lambda0 = t.lambda0;
                    y.lambda1 = t.lambda1;
                    y.lambda2 = t.lambda2;
                    r = run_young(y, spec.formulation, spec.options);
                }
                row = make_row(spec.kind, t, spec.formulation, r);
            } catch (const std::exception& e) {
                row = SweepRow{};
                row.key = t.key(spec.kind);
                row.kind = to_string(spec.kind);
                row.formulation = to_string(spec.formulation);
                row.lambda0 = t.lambda0;
                row.lambda1 = t.lambda1;
                row.lambda2 = t.lambda2;
                row.r_lambda = t.lambda0 / t.lambda1;
                if (spec.kind == ScenarioKind::Young && boundary_influenced(t)) row.flag = "boundary-influenced";
                row.status = "error";
                row.message = e.what();
            }
            std::lock_guard lock(write_mutex);
            std::ofstream out(spec.results_path, std::ios::app);
            out << to_csv_line(row) << '\n';
            out.flush();
            ++summary.ran;
            if (row.status != "ok") ++summary.failed;
            if (spec.on_row) spec.on_row(row);
            done[row.key] = std::move(row);
        }
    };
    const int nthreads = std::max(1, std::min<int>(spec.jobs, static_cast<int>(todo.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Rewrite in tuple order; rows for keys outside this sweep are kept at the end.
    std::vector<SweepRow> ordered;
    for (const auto& t : spec.tuples) {
        auto it = done.find(t.key(spec.kind));
        if (it != done.end()) {
            ordered.push_back(it->second);
            done.erase(it);
        }
    }
    for (auto& kv : done) ordered.push_back(kv.second);
    {
        std::ofstream out(spec.results_path, std::ios::trunc);
        out << sweep_csv_header() << '\n';
        for (const auto& r : ordered) out << to_csv_line(r) << '\n';
    }
    summary.rows = std::move(ordered);
    return summary;
}

// ---------------------------------------------------------------- calibration

CalibrationTable::CalibrationTable(std::vector<Sample> samples) {
    if (samples.size() < 4) throw ConfigError("calibration needs at least 4 samples");
    std::set<double> xs, ys;
    for (const auto& s : samples) {
        xs.insert(s.lambda1);
        ys.insert(s.lambda2);
    }
    if (xs.size() < 2 || ys.size() < 2) throw ConfigError("calibration samples are collinear");
    xs_.assign(xs.begin(), xs.end());
    ys_.assign(ys.begin(), ys.end());
    grid_.assign(xs_.size() * ys_.size(), Sample{std::nan(""), std::nan(""), std::nan(""), std::nan("")});
    for (const auto& s : samples) {
        const auto i = static_cast<std::size_t>(std::lower_bound(xs_.begin(), xs_.end(), s.lambda1) - xs_.begin());
        const auto j = static_cast<std::size_t>(std::lower_bound(ys_.begin(), ys_.end(), s.lambda2) - ys_.begin());
        grid_[j * xs_.size() + i] = s;
    }
    for (const auto& s : grid_)
        if (std::isnan(s.lambda1)) throw ConfigError("calibration samples do not form a full tensor grid");
}

CalibrationTable CalibrationTable::from_rows(std::span<const SweepRow> rows) {
    std::vector<Sample> samples;
    for (const auto& r : rows)
        if (r.status == "ok" && r.kind == "young") samples.push_back({r.lambda1, r.lambda2, r.gamma02, r.gamma01});
    return CalibrationTable(std::move(samples));
}

CalibrationTable::Query CalibrationTable::gamma_at(double l1, double l2) const {
    const bool inside = l1 >= xs_.front() && l1 <= xs_.back() && l2 >= ys_.front() && l2 <= ys_.back();
    if (!inside) {
        const Sample* best = nullptr;
        double bd = std::numeric_limits<double>::infinity();
        for (const auto& s : grid_) {
            const double d = std::hypot(s.lambda1 - l1, s.lambda2 - l2);
            if (d < bd) {
                bd = d;
                best = &s;
            }
        }
        return {{best->gamma02, best->gamma01}, true};
    }
    auto cell = [](const std::vector<double>& v, double q) {
        const auto it = std::upper_bound(v.begin(), v.end(), q);
        return std::min<std::size_t>(static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - v.begin() - 1, 0)),
                                     v.size() - 2);
    };
    const std::size_t i = cell(xs_, l1), j = cell(ys_, l2);
    const double s = (l1 - xs_[i]) / (xs_[i + 1] - xs_[i]);
    const double t = (l2 - ys_[j]) / (ys_[j + 1] - ys_[j]);
    auto mix = [&](double Sample::*f) {
        return (1 - s) * (1 - t) * at(i, j).*f + s * (1 - t) * at(i + 1, j).*f + (1 - s) * t * at(i, j + 1).*f +
               s * t * at(i + 1, j + 1).*f;
    };
    return {{mix(&Sample::gamma02), mix(&Sample::gamma01)}, false};
}

CalibrationTable::Query CalibrationTable::lambda_at(double g02, double g01) const {
    double scale = 0.0;
    for (const auto& s : grid_) scale = std::max({scale, std::abs(s.gamma02), std::abs(s.gamma01)});
    for (std::size_t j = 0; j + 1 < ys_.size(); ++j) {
        for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
            const Sample &a = at(i, j), &b = at(i + 1, j), &c = at(i, j + 1), &d = at(i + 1, j + 1);
            double s = 0.5, t = 0.5;
            bool ok = false;
            for (int it = 0; it < 40; ++it) {
                const double f0 = (1 - s) * (1 - t) * a.gamma02 + s * (1 - t) * b.gamma02 + (1 - s) * t * c.gamma02 +
                                  s * t * d.gamma02 - g02;
                const double f1 = (1 - s) * (1 - t) * a.gamma01 + s * (1 - t) * b.gamma01 + (1 - s) * t * c.gamma01 +
                                  s * t * d.gamma01 - g01;
                if (std::hypot(f0, f1) < 1e-12 * std::max(scale, 1.0)) {
                    ok = true;
                    break;
                }
                const double j00 = (1 - t) * (b.gamma02 - a.gamma02) + t * (d.gamma02 - c.gamma02);
                const double j01 = (1 - s) * (c.gamma02 - a.gamma02) + s * (d.gamma02 - b.gamma02);
                const double j10 = (1 - t) * (b.gamma01 - a.gamma01) + t * (d.gamma01 - c.gamma01);
                const double j11 = (1 - s) * (c.gamma01 - a.gamma01) + s * (d.gamma01 - b.gamma01);
                const double det = j00 * j11 - j01 * j10;
                if (std::abs(det) < 1e-300) break;
                s -= (j11 * f0 - j01 * f1) / det;
                t -= (-j10 * f0 + j00 * f1) / det;
                if (!std::isfinite(s) || !std::isfinite(t) || std::abs(s) > 10 || std::abs(t) > 10) break;
            }
            const double tol = 1e-9;
            if (ok && s >= -tol && s <= 1 + tol && t >= -tol && t <= 1 + tol) {
                s = std::clamp(s, 0.0, 1.0);
                t = std::clamp(t, 0.0, 1.0);
                return {{xs_[i] + s * (xs_[i + 1] - xs_[i]), ys_[j] + t * (ys_[j + 1] - ys_[j])}, false};
            }
        }
    }
    const Sample* best = nullptr;
    double bd = std::numeric_limits<double>::infinity();
    for (const auto& s : grid_) {
        const double d = std::hypot(s.gamma02 - g02, s.gamma01 - g01);
        if (d < bd) {
            bd = d;
            best = &s;
        }
    }
    return {{best->lambda1, best->lambda2}, true};
}

}  // namespace lsgb

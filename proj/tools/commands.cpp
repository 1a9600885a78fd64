#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "lsgb/acceptance.hpp"
#include "lsgb/analytic.hpp"
#include "lsgb/config.hpp"
#include "lsgb/error.hpp"
#include "lsgb/plot.hpp"
#include "lsgb/scenarios.hpp"

#ifndef LSGB_VERSION
#define LSGB_VERSION "0.0.0"
#endif

namespace lsgb::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Writes `<dir>/manifest.json`; one per output directory.
class Manifest {
public:
    Manifest(std::string command, const GlobalOptions& g) : command_(std::move(command)), g_(g) {
        started_ = utc_now();
        t0_ = std::chrono::steady_clock::now();
    }

    void write(const fs::path& dir, const std::string& formulation, const std::string& resolved, int status,
               json extra = json::object()) const {
        json m;
        m["tool"] = "lsgb";
        m["version"] = LSGB_VERSION;
        m["command"] = command_;
        m["config"] = g_.config.empty() ? json(nullptr) : json(fs::absolute(g_.config).string());
        m["output_dir"] = fs::absolute(dir).string();
        m["formulation"] = formulation;
        m["parameters"] = resolved.empty() ? json::object() : json::parse(resolved);
        m["overrides"] = {{"resolution", g_.resolution ? json(*g_.resolution) : json(nullptr)},
                          {"formulation", g_.formulation.empty() ? json(nullptr) : json(g_.formulation)},
                          {"jobs", g_.jobs ? json(*g_.jobs) : json(nullptr)},
                          {"resume", g_.resume}};
        m["started_at"] = started_;
        m["finished_at"] = utc_now();
        m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        m["exit_status"] = status;
        for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
        std::ofstream out(dir / "manifest.json");
        out << m.dump(2) << '\n';
    }

private:
    std::string command_;
    const GlobalOptions& g_;
    std::string started_;
    std::chrono::steady_clock::time_point t0_;
};

AppConfig load(const GlobalOptions& g) {
    if (g.config.empty()) throw ConfigError("--config is required");
    AppConfig c = load_config(g.config);
    if (g.resolution) c.set_resolution(*g.resolution);
    if (!g.formulation.empty()) c.formulation = parse_formulation(g.formulation);
    if (g.jobs) {
        if (*g.jobs < 1) throw ConfigError("--jobs must be at least 1");
        c.jobs = *g.jobs;
    }
    if (!g.out.empty()) c.out_dir = g.out;
    return c;
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
    return p;
}

std::function<bool(const SnapshotInfo&)> progress_printer(bool quiet) {
    if (quiet) return {};
    return [](const SnapshotInfo& s) {
        std::fprintf(stderr, "  t=%.4f step=%ld cg=%d\n", s.t, s.step, s.cg_iterations);
        return true;
    };
}

json angles_json(const std::array<double, 3>& a) {
    return json::array({analytic::degrees(a[0]), analytic::degrees(a[1]), analytic::degrees(a[2])});
}

/// Report of a three-phase run, written as report.json and printed.
json three_phase_report(const RunResult& r) {
    json j;
    j["stop_reason"] = r.stop_reason;
    j["quasi_static"] = r.quasi_static;
    j["steps"] = r.trajectory.steps;
    j["t_final"] = r.trajectory.t;
    j["xi_deg"] = angles_json(r.angles);
    j["angle_sum_deg"] = analytic::degrees(r.angles[0] + r.angles[1] + r.angles[2]);
    j["v"] = r.v;
    j["deviation"] = r.deviation;
    j["r_gamma_inferred"] = r.r_gamma_inferred ? json(*r.r_gamma_inferred) : json(nullptr);
    if (r.gamma_inferred) j["gamma_inferred"] = {{"gamma02", (*r.gamma_inferred)[0]}, {"gamma01", (*r.gamma_inferred)[1]}};
    j["defect"] = {{"max_vacuum", r.defect.max_vacuum}, {"max_overlap", r.defect.max_overlap}, {"l1", r.defect.l1_defect}};
    return j;
}

void print_report(const json& j) {
    for (auto it = j.begin(); it != j.end(); ++it) std::cout << it.key() << ": " << it.value().dump() << '\n';
}

int run_body(const GlobalOptions& g, AppConfig& c, json& report) {
    const fs::path dir = prepare_dir(c.out_dir);
    RunOptions ro = c.run_options();
    ro.progress = progress_printer(g.quiet);
    if (c.vtk_every > 0) {
        ro.vtk_dir = (dir / "vtk").string();
        ro.vtk_every = c.vtk_every;
        fs::create_directories(ro.vtk_dir);
    }
    if (c.kind == ConfigKind::Circle) {
        const CircleResult r = run_circle(c.circle, ro);
        std::ofstream out(dir / "circle.csv");
        out << "t,radius,exact\n";
        for (std::size_t k = 0; k < r.t.size(); ++k) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", r.t[k], r.radius[k], r.exact[k]);
            out << buf;
        }
        report["samples"] = r.t.size();
        report["max_relative_error"] = r.max_relative_error;
        return Success;
    }
    RunResult r = c.kind == ConfigKind::Garcke ? run_garcke(c.garcke, c.formulation, ro)
                                               : run_young(c.young, c.formulation, ro);
    {
        std::ofstream out(dir / "tj.csv");
        write_tj_csv(out, r.records);
    }
    report = three_phase_report(r);
    if (c.kind == ConfigKind::Garcke) {
        const auto pred = analytic::garcke_from_lambda_ratio(c.garcke.lambda_top / c.garcke.lambda_bot);
        report["predicted"] = {{"r_lambda", pred.r_lambda},
                               {"r_gamma", pred.r_gamma},
                               {"xi0_deg", analytic::degrees(pred.xi0)},
                               {"v", pred.v}};
        if (r.raw_profile) {
            const ProfileComparison cmp = compare_profile(*r.raw_profile, pred.v);
            std::ofstream out(dir / "profile.csv");
            write_profile_csv(out, cmp);
            report["profile_rms"] = cmp.rms;
        }
    }
    if (r.final_state) {
        std::vector<const ScalarField*> fields;
        std::vector<std::string> names;
        for (const auto& ph : r.final_state->phases) {
            fields.push_back(&ph.psi);
            names.push_back("psi" + std::to_string(ph.id));
        }
        write_vtk_file((dir / "final.vtk").string(), fields, names);
    }
    return Success;
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const Error& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return SolverFailure;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return SolverFailure;
    }
}

}  // namespace

int cmd_run(const GlobalOptions& g) {
    AppConfig c;
    const int loaded = guarded([&] {
        c = load(g);
        return Success;
    });
    if (loaded != Success) return loaded;
    Manifest manifest("run", g);
    json report = json::object();
    const int status = guarded([&] { return run_body(g, c, report); });
    try {
        const fs::path dir = prepare_dir(c.out_dir);
        report["status"] = status;
        std::ofstream(dir / "report.json") << report.dump(2) << '\n';
        manifest.write(dir, to_string(c.formulation), c.resolved_json(), status, {{"kind", to_string(c.kind)}});
    } catch (const std::exception& e) {
        std::cerr << "cannot write outputs: " << e.what() << '\n';
        return status == Success ? SolverFailure : status;
    }
    if (status == Success) print_report(report);
    return status;
}

int cmd_sweep(const GlobalOptions& g) {
    AppConfig c;
    const int loaded = guarded([&] {
        c = load(g);
        if (c.sweep_tuples.empty()) throw ConfigError("sweep: no tuples (set sweep.preset or sweep.tuples)");
        if (c.kind == ConfigKind::Circle) throw ConfigError("sweep: scenario.kind must be garcke or young");
        return Success;
    });
    if (loaded != Success) return loaded;
    Manifest manifest("sweep", g);
    SweepSummary summary;
    const int status = guarded([&] {
        const fs::path dir = prepare_dir(c.out_dir);
        SweepSpec spec;
        spec.kind = c.kind == ConfigKind::Garcke ? ScenarioKind::Garcke : ScenarioKind::Young;
        spec.tuples = c.sweep_tuples;
        spec.formulation = c.formulation;
        spec.garcke = c.garcke;
        spec.young = c.young;
        spec.options = c.run_options();
        spec.results_path = (dir / "results.csv").string();
        spec.jobs = c.jobs;
        spec.resume = g.resume;
        if (!g.quiet)
            spec.on_row = [](const SweepRow& r) {
                std::fprintf(stderr, "  %s %s xi0=%.2f v=%.4f %s\n", r.key.c_str(), r.status.c_str(), r.xi0_deg, r.v,
                             r.message.c_str());
            };
        summary = run_sweep(spec);
        std::cout << "rows=" << summary.rows.size() << " ran=" << summary.ran << " skipped=" << summary.skipped
                  << " failed=" << summary.failed << '\n';
        const bool any_ok = std::any_of(summary.rows.begin(), summary.rows.end(),
                                        [](const SweepRow& r) { return r.status == "ok"; });
        return any_ok ? Success : SolverFailure;
    });
    try {
        const fs::path dir = prepare_dir(c.out_dir);
        manifest.write(dir, to_string(c.formulation), c.resolved_json(), status,
                       {{"kind", to_string(c.kind)},
                        {"rows", summary.rows.size()},
                        {"ran", summary.ran},
                        {"skipped", summary.skipped},
                        {"failed", summary.failed}});
    } catch (const std::exception& e) {
        std::cerr << "cannot write manifest: " << e.what() << '\n';
    }
    return status;
}

int cmd_tabulate(const std::vector<double>& r_lambda, const std::vector<double>& r_gamma) {
    return guarded([&] {
        std::vector<analytic::GarckePoint> rows;
        for (double rl : r_lambda) rows.push_back(analytic::garcke_from_lambda_ratio(rl));
        for (double rg : r_gamma) rows.push_back(analytic::garcke_from_gamma_ratio(rg));
        std::cout << "r_lambda,r_gamma,xi0_deg,v\n";
        for (const auto& p : rows) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", p.r_lambda, p.r_gamma,
                          analytic::degrees(p.xi0), p.v);
            std::cout << buf;
        }
        return Success;
    });
}

int cmd_plot(const GlobalOptions& g, const std::string& kind, const std::string& results) {
    return guarded([&] {
        const PlotKind k = parse_plot_kind(kind);
        if (results.empty()) throw ConfigError("plot: --results is required");
        std::ifstream in(results);
        if (!in) throw ConfigError("plot: cannot read " + results);
        std::string svg;
        if (k == PlotKind::Profile) {
            svg = svg_profile(read_profile_csv(in));
        } else {
            const std::vector<SweepRow> rows = read_sweep_csv(in);
            if (rows.empty()) throw ConfigError("plot: " + results + " holds no result rows");
            if (k == PlotKind::AngleVelocity) svg = svg_angle_velocity(rows);
            else if (k == PlotKind::LambdaAngle) svg = svg_lambda_angle(rows);
            else svg = svg_lambda_gamma(rows);
        }
        const fs::path dir = prepare_dir(g.out.empty() ? "." : g.out);
        const fs::path file = dir / (kind + ".svg");
        std::ofstream(file) << svg;
        std::cout << file.string() << '\n';
        return Success;
    });
}

int cmd_validate(const GlobalOptions& g, const std::vector<std::string>& only) {
    return guarded([&] {
        AcceptanceOptions o;
        if (g.resolution) {
            if (!(*g.resolution > 0.0)) throw ConfigError("--resolution must be positive");
            o.medium = *g.resolution;
            o.fine = 0.5 * o.medium;
            o.coarse = 2.0 * o.medium;
        }
        o.only = only;
        if (!g.quiet) o.log = [](const std::string& s) { std::fprintf(stderr, "  running %s\n", s.c_str()); };
        o.on_result = [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; };
        const auto results = run_acceptance(o);
        int failed = 0;
        for (const auto& r : results) failed += r.passed ? 0 : 1;
        std::cout << results.size() - failed << "/" << results.size() << " criteria passed\n";
        if (!g.out.empty()) {
            const fs::path dir = prepare_dir(g.out);
            json j = json::array();
            for (const auto& r : results)
                j.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
            std::ofstream(dir / "validation.json") << j.dump(2) << '\n';
            Manifest("validate", g).write(dir, "hetero", "", failed ? SolverFailure : Success);
        }
        return failed ? SolverFailure : Success;
    });
}

}  // namespace lsgb::cli

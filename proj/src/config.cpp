#include "lsgb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lsgb/analytic.hpp"
#include "lsgb/error.hpp"

namespace lsgb {

using nlohmann::json;

std::string to_string(ConfigKind k) {
    switch (k) {
        case ConfigKind::Garcke: return "garcke";
        case ConfigKind::Young: return "young";
        case ConfigKind::Circle: return "circle";
    }
    return "unknown";
}

namespace {

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(path_ + (key.empty() ? "" : "." + key) + ": " + what);
    }

    bool has(const std::string& key) {
        used_.insert(key);
        return j_.contains(key);
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) fail(key, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key, "must be finite");
        return d;
    }
    double positive(const std::string& key, double fallback) {
        const double d = number(key, fallback);
        if (!(d > 0.0)) fail(key, "must be positive");
        return d;
    }
    int integer(const std::string& key, int fallback, int min_value) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) fail(key, "expected an integer");
        const long long n = v.get<long long>();
        if (n < min_value || n > 1000000000LL) fail(key, "must be >= " + std::to_string(min_value));
        return static_cast<int>(n);
    }
    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_boolean()) fail(key, "expected true or false");
        return v.get<bool>();
    }
    std::string string(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }
    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }
    const std::string& path() const { return path_; }

    /// Rejects keys that were never queried (typos).
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(it.key(), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::string locate(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return std::to_string(line) + ":" + std::to_string(col);
}

const json& empty_object() {
    static const json e = json::object();
    return e;
}

void read_ratio_pair(Section& s, double& top, double& bot) {
    const bool has_rl = s.has("r_lambda");
    const bool has_rg = s.has("r_gamma");
    if (has_rl && has_rg) s.fail("r_gamma", "give either r_lambda or r_gamma, not both");
    if (!has_rl && !has_rg) return;
    double rl;
    if (has_rg) {
        const double rg = s.number("r_gamma", 1.0);
        try {
            rl = analytic::lambda_ratio_from_gamma_ratio(rg);
        } catch (const WettingLimitError&) {
            std::ostringstream msg;
            msg << s.path() << ".r_gamma = " << rg << " violates the wetting limit (needs r_gamma > 1/2)";
            throw WettingLimitError(msg.str());
        }
    } else {
        rl = s.number("r_lambda", 1.0);
        if (!(rl > 0.0)) {
            std::ostringstream msg;
            msg << s.path() << ".r_lambda = " << rl << " violates the wetting limit (needs r_lambda > 0)";
            throw WettingLimitError(msg.str());
        }
    }
    if (rl <= 1.0) {
        top = rl;
        bot = 1.0;
    } else {
        top = 1.0;
        bot = 1.0 / rl;
    }
}

}  // namespace

void AppConfig::set_resolution(double spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError("resolution must be positive");
    h = spacing;
    garcke.h = spacing;
    young.h = spacing;
    circle.h = spacing;
    dt.reset();
}

RunOptions AppConfig::run_options() const {
    RunOptions o;
    o.solver = solver;
    o.solver.dt = dt.value_or(default_time_step(h));
    o.solver.eps_heaviside = eps_cells * h;
    o.solver.band_width = band_cells * h;
    o.measure = measure;
    return o;
}

AppConfig parse_config(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::string what = e.what();
        const auto cut = what.find("parse error");
        if (cut != std::string::npos) what = what.substr(cut);
        throw ConfigError(source + ":" + locate(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + what);
    }
    AppConfig c;
    c.source = source;
    Section top(root, source);

    {
        Section g(top.has("grid") ? top.raw("grid") : empty_object(), "grid");
        c.h = g.positive("h", c.h);
        g.finish();
    }
    {
        Section s(top.has("solver") ? top.raw("solver") : empty_object(), "solver");
        if (s.has("dt")) c.dt = s.positive("dt", 1.0);
        c.solver.t_end = s.positive("t_end", 3.0);
        c.eps_cells = s.positive("eps_cells", c.eps_cells);
        c.band_cells = s.positive("band_cells", c.band_cells);
        if (c.band_cells < c.eps_cells + 2.0) s.fail("band_cells", "must exceed eps_cells by at least 2");
        c.solver.reinit_every = s.integer("reinit_every", c.solver.reinit_every, 1);
        c.solver.zhao_lambda = s.positive("zhao_lambda", c.solver.zhao_lambda);
        c.solver.cg_tolerance = s.positive("cg_tolerance", c.solver.cg_tolerance);
        c.solver.cg_max_iterations = s.integer("cg_max_iterations", c.solver.cg_max_iterations, 1);
        c.solver.narrow_band = s.boolean("narrow_band", c.solver.narrow_band);
        const std::string src = s.string("source", "coupled");
        if (src == "coupled") c.solver.source_treatment = SourceTreatment::Coupled;
        else if (src == "implicit") c.solver.source_treatment = SourceTreatment::Implicit;
        else if (src == "explicit") c.solver.source_treatment = SourceTreatment::Explicit;
        else s.fail("source", "expected coupled|implicit|explicit");
        if (s.has("formulation")) {
            try {
                c.formulation = parse_formulation(s.string("formulation", "hetero"));
            } catch (const ConfigError& e) {
                s.fail("formulation", e.what());
            }
        }
        s.finish();
    }
    {
        Section s(top.has("scenario") ? top.raw("scenario") : empty_object(), "scenario");
        const std::string kind = s.string("kind", "garcke");
        if (kind == "garcke") c.kind = ConfigKind::Garcke;
        else if (kind == "young") c.kind = ConfigKind::Young;
        else if (kind == "circle") c.kind = ConfigKind::Circle;
        else s.fail("kind", "expected garcke|young|circle");
        const double lambda_max = s.positive("lambda_max", 600.0);
        if (c.kind == ConfigKind::Garcke) {
            auto& g = c.garcke;
            g.lambda_top = s.number("lambda_top", g.lambda_top);
            g.lambda_bot = s.number("lambda_bot", g.lambda_bot);
            read_ratio_pair(s, g.lambda_top, g.lambda_bot);
            g.width = s.positive("width", g.width);
            g.height = s.positive("height", g.height);
            g.y0 = s.positive("y0", g.y0);
            g.stop_height = s.positive("stop_height", g.stop_height);
            g.lambda_max = lambda_max;
            for (const char* k : {"lambda_top", "lambda_bot"}) {
                const double v = std::string(k) == "lambda_top" ? g.lambda_top : g.lambda_bot;
                if (!(v > 0.0) || v > 1.0) s.fail(k, "must lie in (0, 1]");
            }
        } else if (c.kind == ConfigKind::Young) {
            auto& y = c.young;
            y.lambda0 = s.number("lambda0", y.lambda0);
            y.lambda1 = s.number("lambda1", y.lambda1);
            y.lambda2 = s.number("lambda2", y.lambda2);
            y.lambda_max = lambda_max;
            const double l[3] = {y.lambda0, y.lambda1, y.lambda2};
            const char* names[3] = {"lambda0", "lambda1", "lambda2"};
            for (int k = 0; k < 3; ++k)
                if (!(l[k] > 0.0) || l[k] > 1.0) s.fail(names[k], "must lie in (0, 1]");
        } else {
            c.circle.radius = s.positive("radius", c.circle.radius);
        }
        s.finish();
    }
    {
        Section s(top.has("measure") ? top.raw("measure") : empty_object(), "measure");
        auto& m = c.measure;
        m.interval = s.positive("interval", m.interval);
        m.window = static_cast<std::size_t>(s.integer("window", static_cast<int>(m.window), 4));
        m.hold = s.integer("hold", m.hold, 1);
        m.min_time = s.number("min_time", m.min_time);
        m.stop_on_quasi_static = s.boolean("stop_on_quasi_static", m.stop_on_quasi_static);
        m.profile_samples = static_cast<std::size_t>(s.integer("profile_samples", static_cast<int>(m.profile_samples), 2));
        m.angles.r_in_cells = s.positive("r_in_cells", m.angles.r_in_cells);
        m.angles.r_out_cells = s.positive("r_out_cells", m.angles.r_out_cells);
        if (!(m.angles.r_out_cells > m.angles.r_in_cells)) s.fail("r_out_cells", "must exceed r_in_cells");
        m.angles.quadratic = s.boolean("quadratic", m.angles.quadratic);
        m.policy.rel_velocity_tol = s.positive("rel_velocity_tol", m.policy.rel_velocity_tol);
        m.policy.abs_velocity_tol = s.positive("abs_velocity_tol", m.policy.abs_velocity_tol);
        m.policy.angle_drift_deg = s.positive("angle_drift_deg", m.policy.angle_drift_deg);
        s.finish();
    }
    {
        Section s(top.has("output") ? top.raw("output") : empty_object(), "output");
        c.out_dir = s.string("dir", c.out_dir);
        c.vtk_every = s.integer("vtk_every", c.vtk_every, 0);
        s.finish();
    }
    if (top.has("sweep")) {
        Section s(top.raw("sweep"), "sweep");
        c.sweep_preset = s.string("preset", "");
        c.jobs = s.integer("jobs", c.jobs, 1);
        if (c.sweep_preset == "table1") {
            if (c.kind != ConfigKind::Garcke) s.fail("preset", "table1 needs scenario.kind = garcke");
            c.sweep_tuples = table1_tuples();
        } else if (c.sweep_preset == "young169") {
            if (c.kind != ConfigKind::Young) s.fail("preset", "young169 needs scenario.kind = young");
            c.sweep_tuples = young_grid_tuples();
        } else if (!c.sweep_preset.empty()) {
            s.fail("preset", "expected table1|young169");
        }
        if (s.has("tuples")) {
            const json& t = s.raw("tuples");
            if (!t.is_array()) s.fail("tuples", "expected an array");
            for (std::size_t k = 0; k < t.size(); ++k) {
                const json& e = t[k];
                const std::string where = "tuples[" + std::to_string(k) + "]";
                if (!e.is_array() || !std::all_of(e.begin(), e.end(), [](const json& x) { return x.is_number(); }))
                    s.fail(where, "expected an array of numbers");
                SweepTuple tup;
                if (c.kind == ConfigKind::Garcke) {
                    if (e.size() != 2) s.fail(where, "expected [lambda_top, lambda_bot]");
                    tup = {e[0].get<double>(), e[1].get<double>(), e[1].get<double>()};
                } else if (c.kind == ConfigKind::Young) {
                    if (e.size() == 2) tup = {1.0, e[0].get<double>(), e[1].get<double>()};
                    else if (e.size() == 3) tup = {e[0].get<double>(), e[1].get<double>(), e[2].get<double>()};
                    else s.fail(where, "expected [lambda1, lambda2] or [lambda0, lambda1, lambda2]");
                } else {
                    s.fail("tuples", "sweeps need scenario.kind garcke or young");
                }
                for (double v : {tup.lambda0, tup.lambda1, tup.lambda2})
                    if (!(v > 0.0) || v > 1.0) s.fail(where, "lambdas must lie in (0, 1]");
                c.sweep_tuples.push_back(tup);
            }
        }
        s.finish();
    }
    top.finish();
    c.set_resolution(c.h);
    if (top.has("solver") && root.at("solver").contains("dt")) c.dt = root.at("solver").at("dt").get<double>();
    return c;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string AppConfig::resolved_json() const {
    const RunOptions o = run_options();
    json j;
    j["grid"] = {{"h", h}};
    const char* src = o.solver.source_treatment == SourceTreatment::Coupled    ? "coupled"
                      : o.solver.source_treatment == SourceTreatment::Implicit ? "implicit"
                                                                               : "explicit";
    j["solver"] = {{"formulation", to_string(formulation)},
                   {"dt", o.solver.dt},
                   {"t_end", o.solver.t_end},
                   {"eps_heaviside", o.solver.eps_heaviside},
                   {"band_width", o.solver.band_width},
                   {"reinit_every", o.solver.reinit_every},
                   {"zhao_lambda", o.solver.zhao_lambda},
                   {"source", src},
                   {"cg_tolerance", o.solver.cg_tolerance},
                   {"cg_max_iterations", o.solver.cg_max_iterations},
                   {"narrow_band", o.solver.narrow_band}};
    json scn;
    scn["kind"] = to_string(kind);
    if (kind == ConfigKind::Garcke) {
        scn.update({{"lambda_top", garcke.lambda_top},
                    {"lambda_bot", garcke.lambda_bot},
                    {"width", garcke.width},
                    {"height", garcke.height},
                    {"y0", garcke.y0},
                    {"stop_height", garcke.stop_height},
                    {"lambda_max", garcke.lambda_max}});
    } else if (kind == ConfigKind::Young) {
        scn.update({{"lambda0", young.lambda0},
                    {"lambda1", young.lambda1},
                    {"lambda2", young.lambda2},
                    {"lambda_max", young.lambda_max}});
    } else {
        scn["radius"] = circle.radius;
    }
    j["scenario"] = scn;
    j["measure"] = {{"interval", measure.interval},
                    {"window", measure.window},
                    {"hold", measure.hold},
                    {"min_time", measure.min_time},
                    {"stop_on_quasi_static", measure.stop_on_quasi_static},
                    {"profile_samples", measure.profile_samples},
                    {"r_in_cells", measure.angles.r_in_cells},
                    {"r_out_cells", measure.angles.r_out_cells},
                    {"quadratic", measure.angles.quadratic},
                    {"rel_velocity_tol", measure.policy.rel_velocity_tol},
                    {"abs_velocity_tol", measure.policy.abs_velocity_tol},
                    {"angle_drift_deg", measure.policy.angle_drift_deg}};
    j["output"] = {{"dir", out_dir}, {"vtk_every", vtk_every}};
    if (!sweep_tuples.empty()) {
        json t = json::array();
        for (const auto& s : sweep_tuples) t.push_back({s.lambda0, s.lambda1, s.lambda2});
        j["sweep"] = {{"preset", sweep_preset}, {"jobs", jobs}, {"tuples", t}};
    }
    return j.dump(2);
}

}  // namespace lsgb

#pragma once

#include <array>
#include <atomic>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lsgb/evolution.hpp"
#include "lsgb/measure.hpp"

namespace lsgb {

/// Symmetric T-junction: grain 0 on top, grains 1 and 2 below, split at x = 0.
/// The domain is [-width/2, width/2] x [0, height]. The top grain grows, so
/// the junction travels downward.
struct GarckeScenario {
    double lambda_top{1.0};
    double lambda_bot{1.0};
    double width{1.0};
    double height{2.0};
    double y0{1.5};
    double h{5e-3};
    double lambda_max{600.0};
    /// Runs stop once the junction has descended to this height.
    double stop_height{0.4};
};

/// Junction at the incentre of an equilateral triangle with unit incircle
/// diameter; the boundaries end at the side midpoints, which stay pinned.
struct YoungScenario {
    double lambda0{1.0};
    double lambda1{1.0};
    double lambda2{1.0};
    double h{5e-3};
    double lambda_max{600.0};
};

/// Single shrinking disk in the unit square.
struct CircleScenario {
    double radius{0.3};
    double h{2.5e-3};
};

Microstructure build_garcke(const GarckeScenario& scn, Formulation formulation = Formulation::HeterogeneousSource);
Microstructure build_young(const YoungScenario& scn, Formulation formulation = Formulation::HeterogeneousSource);
Microstructure build_circle(const CircleScenario& scn);

/// Triangle corners of the Young case (top, bottom-left, bottom-right).
std::array<Point2, 3> young_triangle();
/// Junction height of the Young equilibrium whose top angle is xi0: the point
/// on the vertical axis seeing both pinned ends under that angle.
double young_equilibrium_height(double xi0);

struct MeasureConfig {
    AngleOptions angles;
    QuasiStaticPolicy policy;
    /// Time between junction measurements.
    double interval{0.01};
    /// Number of measurements in the velocity window.
    std::size_t window{10};
    /// Consecutive quasi-static windows before a run may stop early.
    int hold{3};
    /// Earliest time at which a run may stop on quasi-static state.
    double min_time{0.2};
    bool stop_on_quasi_static{true};
    std::size_t profile_samples{101};
};

struct RunOptions {
    SolverConfig solver;
    MeasureConfig measure;
    /// Write VTK snapshots of all phases every `vtk_every` measurements into
    /// `vtk_dir` (disabled when empty or 0).
    std::string vtk_dir;
    int vtk_every{0};
    /// Check the distance property after every reinitialization.
    bool track_distance{false};
    /// Observer for progress reporting; return false to abort.
    std::function<bool(const SnapshotInfo&)> progress;
    /// Cooperative cancellation flag, may be null.
    const std::atomic<bool>* cancel{nullptr};
};

/// Solver and measurement settings tied to the spacing h (dt, eps, band).
RunOptions default_run_options(double h);

struct RunResult {
    std::vector<TJRecord> records;
    VelocityEstimate velocity;
    bool quasi_static{false};
    std::array<double, 3> angles{};  // radians; window mean when available
    double v{0.0};                   // junction speed (Garcke: downward advance)
    double deviation{0.0};
    /// Energy ratio from the top angle; moving junctions are projected onto
    /// the line v = pi - xi0 first.
    std::optional<double> r_gamma_inferred;
    std::optional<std::array<double, 2>> gamma_inferred;  // (gamma02, gamma01)
    std::optional<Profile> raw_profile;
    std::optional<ProfileComparison> profile;  // against the measured velocity
    DefectReport defect;
    /// max ||grad psi| - 1| over checked nodes, when tracked.
    double max_distance_error{0.0};
    double max_distance_error_off_kinks{0.0};
    double max_distance_error_far{0.0};
    long distance_checks{0};
    Trajectory trajectory;
    std::string stop_reason;
    std::optional<Microstructure> final_state;
};

RunResult run_garcke(const GarckeScenario& scn, Formulation formulation, const RunOptions& opts);
RunResult run_young(const YoungScenario& scn, Formulation formulation, const RunOptions& opts);

struct CircleResult {
    std::vector<double> t;
    std::vector<double> radius;
    std::vector<double> exact;
    double max_relative_error{0.0};
};

/// Shrinking disk under plain MCF, run until the exact radius reaches
/// `stop_cells` cells.
CircleResult run_circle(const CircleScenario& scn, const RunOptions& opts, double stop_cells = 5.0);

/// Boundary energies (gamma02, gamma01) relative to gamma12 = 1 from the two
/// bottom angles; xi0 = 2*pi - xi1 - xi2. Throws MeasurementError when sin(xi0)
/// vanishes.
std::array<double, 2> infer_gamma_from_measurement(double xi1, double xi2);

struct DistanceErrors {
    double all{0.0};        // every checked node
    double off_kinks{0.0};  // nodes whose stencil does not cross a kink
    double far{0.0};        // off kinks and beyond `far_cells` cells of a junction
};

/// Max ||grad psi| - 1| (upwind) at nodes with |psi| <= limit that are farther
/// than `exclusion` from every junction and not frozen. A node's stencil
/// crosses a kink when a one-sided slope jumps by more than `kink_jump`; the
/// gradient of a distance function is undefined there.
DistanceErrors distance_property_error(const Phase& phase, double limit, std::span<const Point2> junctions,
                                       double exclusion, double kink_jump = 0.25, double far_cells = 10.0);

// ---------------------------------------------------------------- sweeps

enum class ScenarioKind { Garcke, Young };
std::string to_string(ScenarioKind k);

/// One sweep tuple. For Garcke, lambda0 is lambda_top and lambda1 = lambda2 is
/// lambda_bot.
struct SweepTuple {
    double lambda0{1.0};
    double lambda1{1.0};
    double lambda2{1.0};
    std::string key(ScenarioKind kind) const;
};

struct SweepRow {
    std::string key;
    std::string kind;
    std::string formulation;
    double lambda0{0}, lambda1{0}, lambda2{0};
    double r_lambda{0};
    double xi0_deg{0}, xi1_deg{0}, xi2_deg{0};
    double v{0};
    double deviation{0};
    double r_gamma_inferred{0};
    double gamma02{0}, gamma01{0};
    bool quasi_static{false};
    std::string flag;
    std::string status;  // "ok" or "error"
    std::string message;
};

struct SweepSpec {
    ScenarioKind kind{ScenarioKind::Garcke};
    std::vector<SweepTuple> tuples;
    Formulation formulation{Formulation::HeterogeneousSource};
    GarckeScenario garcke;
    YoungScenario young;
    RunOptions options;
    std::string results_path;  // CSV; rows are appended as runs finish
    int jobs{1};
    bool resume{false};
    /// Called under the writer lock after each row is persisted.
    std::function<void(const SweepRow&)> on_row;

    /// Throws ConfigError on duplicate tuples.
    void validate() const;
};

/// The 24 (lambda_top, lambda_bot) pairs of the Garcke benchmark table.
std::vector<SweepTuple> table1_tuples();
/// The 13 x 13 (lambda1, lambda2) grid with lambda0 = 1.
std::vector<SweepTuple> young_grid_tuples();
/// Young tuples with lambda1 + lambda2 < 0.1 are dominated by the pinned walls.
bool boundary_influenced(const SweepTuple& t);

std::string sweep_csv_header();
std::string to_csv_line(const SweepRow& r);
/// Parse a results CSV written by run_sweep. Throws ConfigError on malformed rows.
std::vector<SweepRow> read_sweep_csv(std::istream& in);

struct SweepSummary {
    std::vector<SweepRow> rows;  // all rows in tuple order
    int ran{0};
    int skipped{0};
    int failed{0};
};

/// Runs every tuple (in parallel up to spec.jobs), appending one row per run
/// to the results file under a single writer; failures become error rows. On
/// completion the file is rewritten in tuple order.
SweepSummary run_sweep(const SweepSpec& spec);

SweepRow make_row(ScenarioKind kind, const SweepTuple& t, Formulation f, const RunResult& r);

/// Interpolation between (lambda1, lambda2) and (gamma02, gamma01) over a
/// tensor grid of sweep samples.
class CalibrationTable {
public:
    struct Sample {
        double lambda1, lambda2, gamma02, gamma01;
    };
    /// Needs at least 4 samples forming a full tensor grid with two or more
    /// distinct values per axis; throws ConfigError otherwise.
    explicit CalibrationTable(std::vector<Sample> samples);

    struct Query {
        std::array<double, 2> value;
        bool out_of_hull{false};
    };
    /// (lambda1, lambda2) -> (gamma02, gamma01).
    Query gamma_at(double lambda1, double lambda2) const;
    /// (gamma02, gamma01) -> (lambda1, lambda2).
    Query lambda_at(double gamma02, double gamma01) const;

    static CalibrationTable from_rows(std::span<const SweepRow> rows);

private:
    const Sample& at(std::size_t i, std::size_t j) const { return grid_[j * xs_.size() + i]; }
    std::vector<double> xs_, ys_;
    std::vector<Sample> grid_;
};

}  // namespace lsgb

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lsgb/levelset.hpp"

namespace lsgb {

enum class Formulation {
    PlainMCF,             // uncoupled mean curvature flow per phase
    MerrimanMCF,          // MCF followed by the max-based pairwise correction
    ZhaoPenalized,        // MCF + uniform void/overlap penalty
    HeterogeneousSource,  // MCF + per-grain source amplitude
};

std::string to_string(Formulation f);
Formulation parse_formulation(const std::string& name);

/// How the void/overlap source is coupled in time.
enum class SourceTreatment {
    Explicit,  // evaluated on the previous step's fields
    Implicit,  // backward Euler, solved node by node before diffusion
    Coupled,   // backward Euler together with the diffusion
};

struct Microstructure {
    Grid2 grid;
    std::vector<Phase> phases;
    double mobility{1.0};
    double gamma_ref{1.0};
    Formulation formulation{Formulation::HeterogeneousSource};
    double lambda_max{600.0};

    void validate() const;
};

struct SolverConfig {
    double dt{1e-5};
    double t_end{1.0};
    double eps_heaviside{2e-3};
    int reinit_every{1};
    int snapshot_every{100};
    double zhao_lambda{600.0};
    double band_width{2e-2};
    SourceTreatment source_treatment{SourceTreatment::Coupled};
    double cg_tolerance{1e-8};
    int cg_max_iterations{5000};
    /// Restrict each diffusion solve to nodes inside the reinitialization band;
    /// clamped far-field nodes are held fixed.
    bool narrow_band{true};

    void validate() const;
};

/// Time step tied to the spacing: 1e-5 at h = 1e-3, scaled with h^2.
double default_time_step(double h);

/// Per-step statistics from the linear solver.
struct SolveStats {
    int iterations{0};
    double relative_residual{0.0};
    std::size_t unknowns{0};
};

/// Backward Euler diffusion step: (I - dt*mu_gamma*L) psi_new = psi + dt*rhs.
/// Frozen nodes and nodes on Pinned edges are Dirichlet constraints. When
/// `active` is given, only flagged nodes are unknowns and all others keep their
/// value. Throws SolverError when CG does not reach `tolerance`.
ScalarField step_diffusion_implicit(const ScalarField& psi, double dt, double mu_gamma,
                                    const ScalarField& rhs,
                                    const std::vector<std::uint8_t>* frozen = nullptr,
                                    const std::vector<std::uint8_t>* active = nullptr,
                                    double tolerance = 1e-8, int max_iterations = 5000,
                                    SolveStats* stats = nullptr);

/// Lambda_i * mu * (1 - sum_j H(psi_j)), Lambda_i = lambda_i * lambda_max.
std::vector<ScalarField> source_heterogeneous(const Microstructure& ms, double eps);

/// zhao_lambda * mu * (1 - sum_j H(psi_j)), same for every phase.
std::vector<ScalarField> source_zhao(const Microstructure& ms, double eps, double zhao_lambda);

/// Source rates from a backward-Euler solve of d(psi_i)/dt = c_i*(1 - sum_j H(psi_j)).
/// The update is psi_i + c_i*s with one scalar s per node; the returned fields
/// are c_i*s/dt so they can be passed as the diffusion right-hand side.
std::vector<ScalarField> source_implicit(const Microstructure& ms, std::span<const double> coeffs,
                                         double eps, double dt);

/// Fully implicit source for phases sharing one diffusion operator. With
/// phi_i the diffused fields, the step is psi_i = phi_i + c_i*w where w solves
/// (I - dt*mu_gamma*L) w = dt*(1 - sum_j H(phi_j + c_j*w)). Nodes outside
/// `active`, frozen nodes and Pinned edges hold w = 0.
ScalarField solve_coupled_source(const std::vector<ScalarField>& diffused, std::span<const double> coeffs,
                                 double eps, double dt, double mu_gamma,
                                 const std::vector<std::uint8_t>* frozen = nullptr,
                                 const std::vector<std::uint8_t>* active = nullptr,
                                 double tolerance = 1e-8, int max_iterations = 5000,
                                 SolveStats* stats = nullptr);

/// psi_i <- (psi_i - max_{j != i} psi_j) / 2 for all phases at once.
void correct_merriman(std::vector<Phase>& phases);

/// Source coefficient per phase for the active formulation (0 for MCF variants).
std::vector<double> source_coefficients(const Microstructure& ms, const SolverConfig& cfg);

struct SnapshotInfo {
    long step{0};
    double t{0.0};
    double max_defect{0.0};
    int cg_iterations{0};
};

enum class StepControl { Continue, Stop };

struct AdvanceObserver {
    /// Called after every completed step (after reinitialization and pinning).
    std::function<StepControl(const Microstructure&, const SnapshotInfo&)> on_step;
    /// Called at t = 0 and every `snapshot_every` steps.
    std::function<StepControl(const Microstructure&, const SnapshotInfo&)> on_snapshot;
};

struct Trajectory {
    std::vector<SnapshotInfo> snapshots;
    long steps{0};
    double t{0.0};
    bool stopped_by_observer{false};
};

/// Integrate the microstructure from t = 0 to cfg.t_end (or until an observer stops).
/// Per step: source, implicit diffusion per phase, Merriman correction (MerrimanMCF
/// only), reinitialization on schedule, pinned values re-imposed.
Trajectory advance(Microstructure& ms, const SolverConfig& cfg, const AdvanceObserver& observer = {});

/// One step of `advance`; returns the largest CG iteration count over phases.
int advance_one_step(Microstructure& ms, const SolverConfig& cfg, long step_index);

/// Max |1 - sum_j H(psi_j)| over all nodes.
double max_partition_defect(const Microstructure& ms, double eps);

}  // namespace lsgb

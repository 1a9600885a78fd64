#include "lsgb/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <sstream>

#include "lsgb/error.hpp"

namespace lsgb {

std::string to_string(Formulation f) {
    switch (f) {
        case Formulation::PlainMCF: return "mcf";
        case Formulation::MerrimanMCF: return "merriman";
        case Formulation::ZhaoPenalized: return "zhao";
        case Formulation::HeterogeneousSource: return "hetero";
    }
    return "unknown";
}

Formulation parse_formulation(const std::string& name) {
    if (name == "mcf" || name == "plain") return Formulation::PlainMCF;
    if (name == "merriman") return Formulation::MerrimanMCF;
    if (name == "zhao") return Formulation::ZhaoPenalized;
    if (name == "hetero" || name == "heterogeneous") return Formulation::HeterogeneousSource;
    throw ConfigError("unknown formulation '" + name + "' (expected merriman|zhao|hetero|mcf)");
}

void Microstructure::validate() const {
    if (phases.empty()) throw ConfigError("microstructure has no phases");
    if (formulation != Formulation::PlainMCF && phases.size() < 2)
        throw ConfigError("coupled formulations need at least 2 phases");
    if (!(lambda_max > 0.0)) throw ConfigError("lambda_max must be positive");
    if (!(mobility > 0.0) || !(gamma_ref > 0.0)) throw ConfigError("mobility and gamma must be positive");
    for (const auto& p : phases) {
        if (!(p.psi.grid() == grid)) throw ConfigError("phase field lives on a different grid");
        if (!(p.lambda > 0.0) || p.lambda > 1.0)
            throw ConfigError("phase lambda must lie in (0, 1]");
    }
}

void SolverConfig::validate() const {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
    if (!(eps_heaviside > 0.0)) throw ConfigError("eps_heaviside must be positive");
    if (reinit_every < 1) throw ConfigError("reinit_every must be >= 1");
    if (snapshot_every < 1) throw ConfigError("snapshot_every must be >= 1");
    if (!(zhao_lambda > 0.0)) throw ConfigError("zhao_lambda must be positive");
    if (!(band_width > 0.0)) throw ConfigError("band_width must be positive");
    if (!(cg_tolerance > 0.0) || cg_max_iterations < 1) throw ConfigError("bad CG settings");
}

double default_time_step(double h) { return 1e-5 * (h / 1e-3) * (h / 1e-3); }

namespace {

/// Weighted 5-point system w_k*((1 + 4c + e_k) x_k - c*sum x_nb) = w_k*b_k over a
/// subset of nodes; all other nodes are known values. Rows carry the
/// trapezoid weight of their node so that mirrored zero-flux stencils are
/// symmetric.
class DiffusionSystem {
public:
    DiffusionSystem(const Grid2& g, double c, const std::vector<std::uint8_t>* frozen,
                    const std::vector<std::uint8_t>* active)
        : g_(g), c_(c), local_(g.size(), -1) {
        const std::size_t n = g.size();
        nodes_.reserve(active ? n / 8 : n);
        for (std::size_t k = 0; k < n; ++k) {
            if (frozen && !frozen->empty() && (*frozen)[k]) continue;
            if (active && !(*active)[k]) continue;
            if (g.on_pinned_edge(g.i_of(k), g.j_of(k))) continue;
            local_[k] = static_cast<std::int32_t>(nodes_.size());
            nodes_.push_back(k);
        }
        const std::size_t m = nodes_.size();
        weight_.resize(m);
        nb_.assign(4 * m, -1);
        known_.assign(4 * m, 0);
        for (std::size_t l = 0; l < m; ++l) {
            const std::size_t k = nodes_[l];
            const int i = g.i_of(k);
            const int j = g.j_of(k);
            weight_[l] = ((i == 0 || i == g.nx() - 1) ? 0.5 : 1.0) * ((j == 0 || j == g.ny() - 1) ? 0.5 : 1.0);
            const int ni[4] = {g.mirror_i(i - 1), g.mirror_i(i + 1), i, i};
            const int nj[4] = {j, j, g.mirror_j(j - 1), g.mirror_j(j + 1)};
            for (int s = 0; s < 4; ++s) {
                const std::size_t q = g.index(ni[s], nj[s]);
                if (local_[q] >= 0) nb_[4 * l + s] = local_[q];
                else known_[4 * l + s] = q;
            }
        }
    }

    std::size_t size() const { return nodes_.size(); }
    const std::vector<std::size_t>& nodes() const { return nodes_; }

    /// Solves for the unknowns; `b` holds one rhs per unknown, `boundary` gives
    /// the known values, `extra` an optional extra diagonal per unknown and `x`
    /// the initial guess on entry. Returns the iteration count.
    int solve(const std::vector<double>& b_in, const ScalarField* boundary, const std::vector<double>* extra,
              std::vector<double>& x, double tolerance, int max_iterations, double* residual = nullptr) const {
        const std::size_t m = nodes_.size();
        if (residual) *residual = 0.0;
        if (m == 0) return 0;
        std::vector<double> diag(m), b(m);
        for (std::size_t l = 0; l < m; ++l) {
            const double w = weight_[l];
            diag[l] = w * (1.0 + 4.0 * c_ + (extra ? (*extra)[l] : 0.0));
            double bl = w * b_in[l];
            if (boundary)
                for (int s = 0; s < 4; ++s)
                    if (nb_[4 * l + s] < 0) bl += c_ * w * (*boundary)[known_[4 * l + s]];
            b[l] = bl;
        }
        auto apply = [&](const std::vector<double>& v, std::vector<double>& y) {
            for (std::size_t l = 0; l < m; ++l) {
                double acc = diag[l] * v[l];
                double off = 0.0;
                const std::size_t o = 4 * l;
                for (int s = 0; s < 4; ++s)
                    if (nb_[o + s] >= 0) off += v[static_cast<std::size_t>(nb_[o + s])];
                y[l] = acc - c_ * weight_[l] * off;
            }
        };
        auto dotp = [&](const std::vector<double>& a, const std::vector<double>& bb) {
            double s = 0.0;
            for (std::size_t l = 0; l < m; ++l) s += a[l] * bb[l];
            return s;
        };
        std::vector<double> r(m), z(m), p(m), ap(m);
        apply(x, ap);
        for (std::size_t l = 0; l < m; ++l) r[l] = b[l] - ap[l];
        double bnorm = std::sqrt(dotp(b, b));
        if (bnorm == 0.0) bnorm = 1.0;
        for (std::size_t l = 0; l < m; ++l) z[l] = r[l] / diag[l];
        p = z;
        double rz = dotp(r, z);
        double rnorm = std::sqrt(dotp(r, r));
        int it = 0;
        while (rnorm > tolerance * bnorm) {
            if (it >= max_iterations) {
                std::ostringstream msg;
                msg << "implicit diffusion solve did not converge: relative residual " << rnorm / bnorm
                    << " after " << it << " CG iterations (" << m << " unknowns)";
                throw SolverError(msg.str());
            }
            apply(p, ap);
            const double pap = dotp(p, ap);
            if (!(pap > 0.0)) throw SolverError("implicit diffusion matrix is not positive definite");
            const double alpha = rz / pap;
            for (std::size_t l = 0; l < m; ++l) {
                x[l] += alpha * p[l];
                r[l] -= alpha * ap[l];
                z[l] = r[l] / diag[l];
            }
            const double rz_new = dotp(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t l = 0; l < m; ++l) p[l] = z[l] + beta * p[l];
            rnorm = std::sqrt(dotp(r, r));
            ++it;
        }
        if (residual) *residual = rnorm / bnorm;
        return it;
    }

    /// y = A x for unknowns, with zero known values.
    void apply_plain(const std::vector<double>& x, std::vector<double>& y) const {
        const std::size_t m = nodes_.size();
        for (std::size_t l = 0; l < m; ++l) {
            double off = 0.0;
            for (int s = 0; s < 4; ++s)
                if (nb_[4 * l + s] >= 0) off += x[static_cast<std::size_t>(nb_[4 * l + s])];
            y[l] = (1.0 + 4.0 * c_) * x[l] - c_ * off;
        }
    }

private:
    const Grid2& g_;
    double c_;
    std::vector<std::int32_t> local_;
    std::vector<std::size_t> nodes_;
    std::vector<double> weight_;
    std::vector<std::int32_t> nb_;
    std::vector<std::size_t> known_;
};

}  // namespace

ScalarField step_diffusion_implicit(const ScalarField& psi, double dt, double mu_gamma,
                                    const ScalarField& rhs, const std::vector<std::uint8_t>* frozen,
                                    const std::vector<std::uint8_t>* active, double tolerance,
                                    int max_iterations, SolveStats* stats) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    const Grid2& g = psi.grid();
    if (!(rhs.grid() == g)) throw ConfigError("rhs lives on a different grid");
    const DiffusionSystem sys(g, dt * mu_gamma / (g.h() * g.h()), frozen, active);
    ScalarField out = psi;
    const std::size_t m = sys.size();
    if (stats) *stats = {0, 0.0, m};
    if (m == 0) return out;
    std::vector<double> b(m), x(m);
    for (std::size_t l = 0; l < m; ++l) {
        const std::size_t k = sys.nodes()[l];
        b[l] = psi[k] + dt * rhs[k];
        x[l] = b[l];
    }
    double res = 0.0;
    const int it = sys.solve(b, &psi, nullptr, x, tolerance, max_iterations, &res);
    for (std::size_t l = 0; l < m; ++l) out[sys.nodes()[l]] = x[l];
    if (stats) *stats = {it, res, m};
    return out;
}

ScalarField solve_coupled_source(const std::vector<ScalarField>& diffused, std::span<const double> coeffs,
                                 double eps, double dt, double mu_gamma, const std::vector<std::uint8_t>* frozen,
                                 const std::vector<std::uint8_t>* active, double tolerance, int max_iterations,
                                 SolveStats* stats) {
    const std::size_t np = diffused.size();
    if (np == 0 || coeffs.size() != np) throw ConfigError("one source coefficient per phase required");
    const Grid2& g = diffused.front().grid();
    const DiffusionSystem sys(g, dt * mu_gamma / (g.h() * g.h()), frozen, active);
    ScalarField w(g);
    const std::size_t m = sys.size();
    if (stats) *stats = {0, 0.0, m};
    if (m == 0) return w;
    const auto& nodes = sys.nodes();

    // Nodal solution (no diffusion of w) as the starting guess.
    std::vector<double> x(m, 0.0);
    std::vector<double> val(np);
    auto residual = [&](const std::vector<double>& xv, std::vector<double>& r, std::vector<double>* jac) {
        sys.apply_plain(xv, r);
        double worst = 0.0;
        for (std::size_t l = 0; l < m; ++l) {
            const std::size_t k = nodes[l];
            double sh = 0.0, dsh = 0.0;
            for (std::size_t p = 0; p < np; ++p) {
                const double v = diffused[p][k] + coeffs[p] * xv[l];
                sh += heaviside(v, eps);
                dsh += coeffs[p] * heaviside_derivative(v, eps);
            }
            r[l] -= dt * (1.0 - sh);
            if (jac) (*jac)[l] = dt * dsh;
            worst = std::max(worst, std::abs(r[l]));
        }
        return worst;
    };
    for (std::size_t l = 0; l < m; ++l) {
        const std::size_t k = nodes[l];
        double sum_h = 0.0;
        for (std::size_t p = 0; p < np; ++p) sum_h += heaviside(diffused[p][k], eps);
        const double d0 = 1.0 - sum_h;
        if (d0 == 0.0) continue;
        double lo = d0 > 0 ? 0.0 : dt * d0;
        double hi = d0 > 0 ? dt * d0 : 0.0;
        double s = 0.0;
        for (int it = 0; it < 60; ++it) {
            double sh = 0.0, dsh = 0.0;
            for (std::size_t p = 0; p < np; ++p) {
                const double v = diffused[p][k] + coeffs[p] * s;
                sh += heaviside(v, eps);
                dsh += coeffs[p] * heaviside_derivative(v, eps);
            }
            const double res = s - dt * (1.0 - sh);
            if (res == 0.0) break;
            if (res > 0.0) hi = s;
            else lo = s;
            double next = s - res / (1.0 + dt * dsh);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - s) <= 1e-14 * dt) {
                s = next;
                break;
            }
            s = next;
        }
        x[l] = s;
    }

    // Newton on A w - dt*(1 - sum_j H(phi_j + c_j w)) = 0; the Jacobian is A
    // plus a non-negative diagonal, so each correction is a CG solve.
    std::vector<double> r(m), jac(m), delta(m), trial(m), rt(m), extra(m);
    double norm_r = residual(x, r, &jac);
    const double target = tolerance * dt;
    int total_it = 0;
    int newton = 0;
    for (; newton < 30 && norm_r > target; ++newton) {
        std::vector<double> rhs(m);
        for (std::size_t l = 0; l < m; ++l) {
            rhs[l] = -r[l];
            extra[l] = jac[l];
            delta[l] = 0.0;
        }
        total_it += sys.solve(rhs, nullptr, &extra, delta, 1e-6, max_iterations);
        double step = 1.0;
        double norm_t = norm_r;
        for (int ls = 0; ls < 20; ++ls) {
            for (std::size_t l = 0; l < m; ++l) trial[l] = x[l] + step * delta[l];
            norm_t = residual(trial, rt, nullptr);
            if (norm_t < norm_r) break;
            step *= 0.5;
        }
        if (!(norm_t < norm_r)) break;
        x.swap(trial);
        norm_r = residual(x, r, &jac);
    }
    if (norm_r > 1e3 * target) {
        std::ostringstream msg;
        msg << "coupled source solve stalled: residual " << norm_r / dt << " after " << newton << " Newton steps";
        throw SolverError(msg.str());
    }
    for (std::size_t l = 0; l < m; ++l) w[nodes[l]] = x[l];
    if (stats) *stats = {total_it, norm_r / dt, m};
    return w;
}

namespace {

ScalarField partition_defect(const Microstructure& ms, double eps) {
    if (!(eps > 0.0)) throw ConfigError("heaviside width must be positive");
    ScalarField d(ms.grid, 1.0);
    for (const auto& ph : ms.phases)
        for (std::size_t k = 0; k < d.size(); ++k) d[k] -= heaviside(ph.psi[k], eps);
    return d;
}

}  // namespace

std::vector<ScalarField> source_heterogeneous(const Microstructure& ms, double eps) {
    const ScalarField d = partition_defect(ms, eps);
    std::vector<ScalarField> out;
    out.reserve(ms.phases.size());
    for (const auto& ph : ms.phases) {
        if (!(ph.lambda > 0.0) || ph.lambda > 1.0) throw ConfigError("phase lambda must lie in (0, 1]");
        const double a = ph.lambda * ms.lambda_max * ms.mobility;
        ScalarField s(ms.grid);
        for (std::size_t k = 0; k < s.size(); ++k) s[k] = a * d[k];
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ScalarField> source_zhao(const Microstructure& ms, double eps, double zhao_lambda) {
    if (!(zhao_lambda > 0.0)) throw ConfigError("zhao_lambda must be positive");
    const ScalarField d = partition_defect(ms, eps);
    const double a = zhao_lambda * ms.mobility;
    std::vector<ScalarField> out;
    out.reserve(ms.phases.size());
    for (std::size_t p = 0; p < ms.phases.size(); ++p) {
        ScalarField s(ms.grid);
        for (std::size_t k = 0; k < s.size(); ++k) s[k] = a * d[k];
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ScalarField> source_implicit(const Microstructure& ms, std::span<const double> coeffs,
                                         double eps, double dt) {
    const std::size_t np = ms.phases.size();
    if (coeffs.size() != np) throw ConfigError("one source coefficient per phase required");
    std::vector<ScalarField> out(np, ScalarField(ms.grid));
    std::vector<double> psi(np);
    const std::size_t n = ms.grid.size();
    for (std::size_t k = 0; k < n; ++k) {
        double sum_h = 0.0;
        for (std::size_t p = 0; p < np; ++p) {
            psi[p] = ms.phases[p].psi[k];
            sum_h += heaviside(psi[p], eps);
        }
        const double d0 = 1.0 - sum_h;
        if (d0 == 0.0) continue;
        // s - dt*(1 - sum_j H(psi_j + c_j*s)) = 0 is strictly increasing in s.
        double lo = d0 > 0 ? 0.0 : dt * d0;
        double hi = d0 > 0 ? dt * d0 : 0.0;
        double s = 0.0;
        for (int it = 0; it < 100; ++it) {
            double sh = 0.0, dsh = 0.0;
            for (std::size_t p = 0; p < np; ++p) {
                const double v = psi[p] + coeffs[p] * s;
                sh += heaviside(v, eps);
                dsh += coeffs[p] * heaviside_derivative(v, eps);
            }
            const double res = s - dt * (1.0 - sh);
            if (res == 0.0) break;
            if (res > 0.0) hi = s;
            else lo = s;
            double next = s - res / (1.0 + dt * dsh);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - s) <= 1e-15 * dt) {
                s = next;
                break;
            }
            s = next;
        }
        for (std::size_t p = 0; p < np; ++p) out[p][k] = coeffs[p] * s / dt;
    }
    return out;
}

void correct_merriman(std::vector<Phase>& phases) {
    const std::size_t np = phases.size();
    if (np < 2) throw ConfigError("Merriman correction needs at least 2 phases");
    const std::size_t n = phases.front().psi.size();
    std::vector<double> old(np);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t best = 0;
        double first = -std::numeric_limits<double>::infinity();
        double second = first;
        for (std::size_t p = 0; p < np; ++p) {
            old[p] = phases[p].psi[k];
            if (old[p] > first) {
                second = first;
                first = old[p];
                best = p;
            } else if (old[p] > second) {
                second = old[p];
            }
        }
        for (std::size_t p = 0; p < np; ++p) {
            const double other = (p == best) ? second : first;
            phases[p].psi[k] = 0.5 * (old[p] - other);
        }
    }
}

std::vector<double> source_coefficients(const Microstructure& ms, const SolverConfig& cfg) {
    std::vector<double> c(ms.phases.size(), 0.0);
    for (std::size_t p = 0; p < c.size(); ++p) {
        if (ms.formulation == Formulation::HeterogeneousSource)
            c[p] = ms.phases[p].lambda * ms.lambda_max * ms.mobility;
        else if (ms.formulation == Formulation::ZhaoPenalized)
            c[p] = cfg.zhao_lambda * ms.mobility;
    }
    return c;
}

double max_partition_defect(const Microstructure& ms, double eps) {
    const ScalarField d = partition_defect(ms, eps);
    return d.max_abs();
}

int advance_one_step(Microstructure& ms, const SolverConfig& cfg, long step_index) {
    const std::size_t np = ms.phases.size();
    const double eps = cfg.eps_heaviside;
    const bool with_source = ms.formulation == Formulation::ZhaoPenalized ||
                             ms.formulation == Formulation::HeterogeneousSource;
    const bool coupled = with_source && cfg.source_treatment == SourceTreatment::Coupled;
    const auto coeffs = source_coefficients(ms, cfg);

    std::vector<ScalarField> rhs;
    if (with_source && !coupled) {
        if (cfg.source_treatment == SourceTreatment::Implicit) {
            rhs = source_implicit(ms, coeffs, eps, cfg.dt);
        } else {
            rhs = ms.formulation == Formulation::HeterogeneousSource
                      ? source_heterogeneous(ms, eps)
                      : source_zhao(ms, eps, cfg.zhao_lambda);
        }
    } else {
        rhs.assign(np, ScalarField(ms.grid));
    }

    const double mu_gamma = ms.mobility * ms.gamma_ref;
    const double band_limit = cfg.band_width - 1e-9 * ms.grid.h();
    const std::size_t n = ms.grid.size();
    int max_it = 0;
    std::vector<std::uint8_t> active;
    std::vector<std::uint8_t> any_active(n, 0);
    for (std::size_t p = 0; p < np; ++p) {
        Phase& ph = ms.phases[p];
        const std::vector<std::uint8_t>* act = nullptr;
        if (cfg.narrow_band) {
            active.assign(n, 0);
            for (std::size_t k = 0; k < n; ++k) {
                active[k] = (std::abs(ph.psi[k]) < band_limit || rhs[p][k] != 0.0) ? 1 : 0;
                any_active[k] |= active[k];
            }
            act = &active;
        }
        SolveStats st;
        ph.psi = step_diffusion_implicit(ph.psi, cfg.dt, mu_gamma, rhs[p], &ph.frozen, act,
                                         cfg.cg_tolerance, cfg.cg_max_iterations, &st);
        max_it = std::max(max_it, st.iterations);
    }

    if (coupled) {
        std::vector<std::uint8_t> frozen;
        for (const auto& ph : ms.phases) {
            if (!ph.has_frozen()) continue;
            if (frozen.empty()) frozen.assign(n, 0);
            for (std::size_t k = 0; k < n; ++k) frozen[k] |= ph.frozen[k];
        }
        std::vector<ScalarField> diffused;
        diffused.reserve(np);
        for (const auto& ph : ms.phases) diffused.push_back(ph.psi);
        SolveStats st;
        const ScalarField w = solve_coupled_source(diffused, coeffs, eps, cfg.dt, mu_gamma, &frozen,
                                                   cfg.narrow_band ? &any_active : nullptr, cfg.cg_tolerance,
                                                   cfg.cg_max_iterations, &st);
        for (std::size_t p = 0; p < np; ++p)
            for (std::size_t k = 0; k < n; ++k) ms.phases[p].psi[k] += coeffs[p] * w[k];
        max_it = std::max(max_it, st.iterations);
    }

    if (ms.formulation == Formulation::MerrimanMCF) correct_merriman(ms.phases);

    if ((step_index + 1) % cfg.reinit_every == 0) {
        for (auto& ph : ms.phases) ph.psi = reinitialize(ph.psi, cfg.band_width);
    }
    for (auto& ph : ms.phases) {
        ph.reimpose_frozen();
        if (!ph.psi.all_finite()) {
            std::ostringstream msg;
            msg << "phase " << ph.id << " became non-finite at step " << step_index + 1;
            throw SolverError(msg.str());
        }
    }
    return max_it;
}

Trajectory advance(Microstructure& ms, const SolverConfig& cfg, const AdvanceObserver& observer) {
    ms.validate();
    cfg.validate();
    Trajectory traj;
    auto snapshot = [&](long step, int it) {
        SnapshotInfo info{step, step * cfg.dt, max_partition_defect(ms, cfg.eps_heaviside), it};
        traj.snapshots.push_back(info);
        if (observer.on_snapshot && observer.on_snapshot(ms, info) == StepControl::Stop) {
            traj.stopped_by_observer = true;
        }
    };
    snapshot(0, 0);
    const long total = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
    long step = 0;
    while (!traj.stopped_by_observer && step < total) {
        const int it = advance_one_step(ms, cfg, step);
        ++step;
        traj.steps = step;
        traj.t = step * cfg.dt;
        if (observer.on_step) {
            SnapshotInfo info{step, traj.t, 0.0, it};
            if (observer.on_step(ms, info) == StepControl::Stop) traj.stopped_by_observer = true;
        }
        if (!traj.stopped_by_observer && step % cfg.snapshot_every == 0) snapshot(step, it);
    }
    return traj;
}

}  // namespace lsgb

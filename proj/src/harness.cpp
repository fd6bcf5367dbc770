#include "conservo/harness.hpp"

#include <chrono>
#include <cmath>

#include "conservo/errors.hpp"

namespace conservo {

namespace {

void merge_max(std::vector<double>& acc, std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] = std::max(acc[i], v[i]);
}

}  // namespace

Trajectory integrate(const SystemSpec& sys, const StepperConfig& cfg,
                     std::span<const double> x0, double t0, double t_final,
                     std::size_t decimate) {
    if (!(t_final > t0)) throw InvalidParams("integrate: t_final must exceed t0");
    if (decimate == 0) decimate = 1;

    const auto clock_start = std::chrono::steady_clock::now();
    const std::size_t n = sys.dim;
    const std::size_t m = sys.n_conserved;

    Trajectory traj;
    traj.state_dim = n;
    traj.psi_dim = m;
    traj.psi_ref.resize(m);
    sys.eval_conserved(t0, x0, traj.psi_ref);
    traj.max_defect_all.assign(m, 0.0);
    traj.max_defect_converged.assign(m, 0.0);

    const double span_t = t_final - t0;
    const std::size_t whole = static_cast<std::size_t>(std::floor(span_t / cfg.tau + 1e-9));
    const double rem = span_t - static_cast<double>(whole) * cfg.tau;
    const bool tail = rem > 1e-9 * cfg.tau;
    const std::size_t nsteps = whole + (tail ? 1 : 0);

    std::vector<double> x(x0.begin(), x0.end());
    std::vector<double> x_next(n);
    StepDiagnostics diag;
    StepWorkspace ws;
    std::vector<double> psi_scratch(m);

    traj.steps.push_back(0);
    traj.times.push_back(t0);
    traj.states_flat.insert(traj.states_flat.end(), x.begin(), x.end());
    traj.diagnostics.emplace_back();
    std::size_t last_stored = 0;

    StepperConfig step_cfg = cfg;
    for (std::size_t k = 0; k < nsteps; ++k) {
        const double t_k = t0 + static_cast<double>(k) * cfg.tau;
        const bool is_tail = tail && (k == nsteps - 1);
        step_cfg.tau = is_tail ? rem : cfg.tau;
        const double t_next = is_tail ? t_final : t0 + static_cast<double>(k + 1) * cfg.tau;

        try {
            switch (cfg.variant) {
                case Variant::Rk4:
                    step_rk4(sys, t_k, x, step_cfg.tau, x_next, ws);
                    if (!all_finite(x_next)) throw DomainViolation("non-finite state");
                    diag.iterations = 0;
                    diag.converged = true;
                    diag.residual_norm = 0.0;
                    diag.kappa = std::numeric_limits<double>::quiet_NaN();
                    diag.psi_defect.resize(m);
                    sys.eval_conserved(t_next, x_next, psi_scratch);
                    for (std::size_t i = 0; i < m; ++i)
                        diag.psi_defect[i] = std::abs(psi_scratch[i] - traj.psi_ref[i]);
                    break;
                case Variant::ImplicitMidpoint:
                    step_implicit_midpoint(sys, step_cfg, t_k, x, traj.psi_ref, x_next, diag, ws);
                    if (!all_finite(x_next)) throw DomainViolation("non-finite state");
                    break;
                default:
                    step_mn(sys, step_cfg, t_k, x, traj.psi_ref, x_next, diag, ws);
                    if (!all_finite(x_next)) throw DomainViolation("non-finite state");
                    break;
            }
        } catch (const DomainViolation& e) {
            traj.failure = FailureInfo{k, e.what()};
            break;
        } catch (const SingularMatrix& e) {
            traj.failure = FailureInfo{k, e.what()};
            break;
        } catch (const NoConvergence& e) {
            traj.failure = FailureInfo{k, e.what()};
            break;
        }

        x.swap(x_next);
        traj.total_steps += 1;
        merge_max(traj.max_defect_all, diag.psi_defect);
        if (cfg.variant != Variant::Rk4) {
            traj.fpi_sum += diag.iterations;
            traj.fpi_count += 1;
            if (!diag.converged) traj.nonconverged_steps += 1;
            else merge_max(traj.max_defect_converged, diag.psi_defect);
            if (!std::isnan(diag.kappa)) {
                traj.max_kappa = std::max(traj.max_kappa, diag.kappa);
                traj.kappa_valid = true;
            }
        }

        if ((k + 1) % decimate == 0 || k + 1 == nsteps) {
            traj.steps.push_back(k + 1);
            traj.times.push_back(t_next);
            traj.states_flat.insert(traj.states_flat.end(), x.begin(), x.end());
            traj.diagnostics.push_back(diag);
            last_stored = k + 1;
        }
    }

    // A truncated run keeps its last good state even off the decimation grid.
    if (traj.failure && last_stored < traj.failure->step) {
        const std::size_t k = traj.failure->step;  // steps 0..k-1 succeeded
        traj.steps.push_back(k);
        traj.times.push_back(t0 + static_cast<double>(k) * cfg.tau);
        traj.states_flat.insert(traj.states_flat.end(), x.begin(), x.end());
        traj.diagnostics.push_back(diag);
    }

    traj.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    return traj;
}

ExperimentReport summarize(const Trajectory& traj, const SystemSpec& sys,
                           std::string method_name) {
    const std::size_t m = traj.psi_dim;
    ExperimentReport rep;
    rep.method = std::move(method_name);
    rep.max_psi_defect = traj.max_defect_all;
    rep.wall_seconds = traj.wall_seconds;
    rep.nonconverged_steps = traj.nonconverged_steps;
    rep.total_steps = traj.total_steps;
    rep.truncated = traj.failure.has_value();
    if (traj.failure) {
        rep.failure_step = traj.failure->step;
        rep.failure_reason = traj.failure->reason;
    }

    // Recompute defects from the stored states; catches drift between the
    // stepper's internal bookkeeping and the stored data.
    std::vector<double> psi(m);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        sys.eval_conserved(traj.times[i], traj.state(i), psi);
        for (std::size_t c = 0; c < m; ++c)
            rep.max_psi_defect[c] =
                std::max(rep.max_psi_defect[c], std::abs(psi[c] - traj.psi_ref[c]));
    }

    if (traj.fpi_count > 0)
        rep.mean_fpi = traj.fpi_sum / static_cast<double>(traj.fpi_count);
    if (traj.kappa_valid) rep.max_kappa = traj.max_kappa;
    return rep;
}

std::vector<ConvergencePoint> convergence_study(const SystemSpec& sys,
                                                const StepperConfig& cfg,
                                                std::span<const double> x0, double t0,
                                                double t_final, int halvings) {
    if (halvings < 2) throw InvalidParams("convergence_study: need at least 2 halvings");

    std::vector<double> taus;
    for (int i = 0; i <= halvings; ++i)
        taus.push_back(cfg.tau / static_cast<double>(1 << i));

    StepperConfig ref_cfg = cfg;
    ref_cfg.variant = Variant::Rk4;
    ref_cfg.tau = taus.back() / 64.0;
    const Trajectory ref =
        integrate(sys, ref_cfg, x0, t0, t_final, std::numeric_limits<std::size_t>::max());
    if (ref.failure)
        throw NoConvergence("convergence_study: reference integration failed");
    const std::span<const double> x_ref = ref.state(ref.size() - 1);

    std::vector<ConvergencePoint> points;
    double prev_error = std::numeric_limits<double>::quiet_NaN();
    for (const double tau : taus) {
        StepperConfig run_cfg = cfg;
        run_cfg.tau = tau;
        const Trajectory traj =
            integrate(sys, run_cfg, x0, t0, t_final, std::numeric_limits<std::size_t>::max());
        double err = std::numeric_limits<double>::quiet_NaN();
        if (!traj.failure) {
            const std::span<const double> x_end = traj.state(traj.size() - 1);
            double acc = 0.0;
            for (std::size_t i = 0; i < sys.dim; ++i) {
                const double d = x_end[i] - x_ref[i];
                acc += d * d;
            }
            err = std::sqrt(acc);
        }
        const double order = std::log2(prev_error / err);
        points.push_back({tau, err, points.empty()
                                        ? std::numeric_limits<double>::quiet_NaN()
                                        : order});
        prev_error = err;
    }
    return points;
}

}  // namespace conservo

#pragma once

// Full-trajectory driver: applies a configured stepper over a time span,
// collects per-step diagnostics, and reduces them to the summary statistics
// the experiment tables report.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conservo/steppers.hpp"
#include "conservo/system.hpp"

namespace conservo {

struct FailureInfo {
    std::size_t step = 0;
    std::string reason;
};

struct Trajectory {
    std::size_t state_dim = 0;
    std::size_t psi_dim = 0;

    // Stored samples (subject to decimation; step 0 and the last reached
    // step are always kept).
    std::vector<std::size_t> steps;  // time-step index of each stored sample
    std::vector<double> times;
    std::vector<double> states_flat;
    std::vector<StepDiagnostics> diagnostics;
    std::vector<double> psi_ref;  // psi(t0, x0)

    // Aggregates over every step taken, stored or not.
    std::size_t total_steps = 0;
    std::size_t nonconverged_steps = 0;
    double fpi_sum = 0.0;
    std::size_t fpi_count = 0;
    double max_kappa = 0.0;
    bool kappa_valid = false;
    std::vector<double> max_defect_all;        // componentwise, all steps
    std::vector<double> max_defect_converged;  // componentwise, converged steps

    std::optional<FailureInfo> failure;
    double wall_seconds = 0.0;

    std::size_t size() const noexcept { return times.size(); }
    std::span<const double> state(std::size_t i) const noexcept {
        return std::span<const double>(states_flat).subspan(i * state_dim, state_dim);
    }
};

/// Integrate from (t0, x0) to t_final with uniform steps of cfg.tau (the
/// last step is shortened when the span is not an integer multiple).
/// Stepper failures truncate the trajectory and are recorded as data, not
/// rethrown. `decimate` keeps every k-th state.
Trajectory integrate(const SystemSpec& sys, const StepperConfig& cfg,
                     std::span<const double> x0, double t0, double t_final,
                     std::size_t decimate = 1);

struct ExperimentReport {
    std::string method;
    std::vector<double> max_psi_defect;  // componentwise ||psi - psi0||_inf
    std::optional<double> mean_fpi;      // absent for RK4
    std::optional<double> max_kappa;     // absent for RK4 / implicit midpoint
    double wall_seconds = 0.0;
    std::size_t nonconverged_steps = 0;
    std::size_t total_steps = 0;
    bool truncated = false;
    std::size_t failure_step = 0;
    std::string failure_reason;
};

/// Reduce a trajectory to table statistics. Defects are recomputed from the
/// stored states and merged with the running aggregates.
ExperimentReport summarize(const Trajectory& traj, const SystemSpec& sys,
                           std::string method_name = {});

struct ConvergencePoint {
    double tau;
    double error;           // global error at t_final against the reference
    double observed_order;  // log2(e(2 tau)/e(tau)); NaN for the first point
};

/// Repeated halvings of cfg.tau; the reference solution is RK4 at the
/// smallest tau divided by 64. Failed runs record NaN errors.
std::vector<ConvergencePoint> convergence_study(const SystemSpec& sys,
                                                const StepperConfig& cfg,
                                                std::span<const double> x0, double t0,
                                                double t_final, int halvings);

}  // namespace conservo

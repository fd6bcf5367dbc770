#pragma once

// Single-step integrators: the minimal-norm conservative correction in its
// three algorithmic variants (direct pseudoinverse, mixed auxiliary solve,
// mixed via SVD), closed forms for one and two conserved quantities,
// baseline RK4 / implicit midpoint, and the fixed-point driver.

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "conservo/linalg.hpp"
#include "conservo/multiplier.hpp"
#include "conservo/system.hpp"

namespace conservo {

enum class Variant {
    Direct,
    Mixed,
    MixedSvd,
    Rk4,
    ImplicitMidpoint,
};

enum class BaseScheme {
    ImprovedEuler,  // explicit in x_new
    Trapezoidal,
};

struct StepperConfig {
    double tau = 0.1;       // time step
    double delta = 1e-15;   // conserved-quantity tolerance
    double epsilon = 1e-15; // successive-iterate tolerance
    int max_iters = 20;     // fixed-point iteration cap K
    Variant variant = Variant::Direct;
    BaseScheme base_scheme = BaseScheme::ImprovedEuler;
    bool fast_path = false;       // closed-form m in {1,2} correction
    double deg_tol = kDefaultDegTol;
};

struct StepDiagnostics {
    int iterations = 0;
    bool converged = true;
    std::vector<double> psi_defect;  // |psi(t_next, x_next) - psi_ref|
    double residual_norm = 0.0;      // final successive-iterate distance
    double kappa = std::numeric_limits<double>::quiet_NaN();
};

struct StepWorkspace {
    std::vector<double> k1, k2, k3, k4, stage, xm;
    std::vector<double> x_prev, x_cur;
    std::vector<double> s;  // base-scheme value f_tau
    std::vector<double> dt_psi, psi_cur, corr;
    std::vector<double> f_mn;
    MultiplierMatrix lam;
    MultiplierWorkspace mul;
    linalg::PinvWorkspace pinv;
    DenseMatrix gram;
    linalg::SymSolveWorkspace sym;
    std::vector<double> g;
    linalg::SvdFactors svd;
    linalg::SvdWorkspace svd_ws;
    linalg::SvdFactors svd_cond;
    linalg::SvdWorkspace svd_cond_ws;
};

/// Heun predictor y + (tau/2) [f(t,y) + f(t+tau, y + tau f(t,y))].
void predictor_improved_euler(const SystemSpec& sys, double t, std::span<const double> y,
                              double tau, std::span<double> out, StepWorkspace& ws);
std::vector<double> predictor_improved_euler(const SystemSpec& sys, double t,
                                             std::span<const double> y, double tau);

/// The consistent base scheme f_tau the conservative correction is applied to.
void base_scheme_f_tau(const SystemSpec& sys, double t, std::span<const double> x_new,
                       std::span<const double> x_old, double tau, BaseScheme scheme,
                       std::span<double> out, StepWorkspace& ws);
std::vector<double> base_scheme_f_tau(const SystemSpec& sys, double t,
                                      std::span<const double> x_new,
                                      std::span<const double> x_old, double tau,
                                      BaseScheme scheme);

/// Minimal-norm correction f_mn = f_tau - pinv(Lambda) (Lambda f_tau + dt_psi).
/// Returns the condition number of the matrix the variant factors (Gram
/// matrix for Direct/Mixed, multiplier for MixedSvd), exactly 1.0 when m=1.
double mn_correct(const MultiplierMatrix& lam, std::span<const double> f_tau,
                  std::span<const double> dt_psi, Variant variant, std::span<double> f_mn,
                  StepWorkspace& ws);
std::pair<std::vector<double>, double> mn_correct(const MultiplierMatrix& lam,
                                                  std::span<const double> f_tau,
                                                  std::span<const double> dt_psi,
                                                  Variant variant);

/// Closed-form correction for a single conserved quantity.
void mn_correct_m1(std::span<const double> dpsi_dx, std::span<const double> f_tau,
                   double dt_psi, std::span<double> f_mn);

/// Closed-form correction for two conserved quantities (2x2 adjugate).
void mn_correct_m2(std::span<const double> row1, std::span<const double> row2,
                   std::span<const double> f_tau, std::span<const double> dt_psi,
                   std::span<double> f_mn);

/// One conservative step: fixed-point iteration on
/// x = y + tau * f_mn(t, x, y), seeded by the improved-Euler predictor.
/// Stops when both the conserved-quantity defect against psi_ref (the value
/// at the trajectory's global initial condition) is below delta and the
/// successive-iterate distance is below epsilon, or at max_iters with
/// converged=false.
void step_mn(const SystemSpec& sys, const StepperConfig& cfg, double t,
             std::span<const double> y, std::span<const double> psi_ref,
             std::span<double> x_next, StepDiagnostics& diag, StepWorkspace& ws);

/// Classical four-stage Runge-Kutta step.
void step_rk4(const SystemSpec& sys, double t, std::span<const double> y, double tau,
              std::span<double> out, StepWorkspace& ws);
std::vector<double> step_rk4(const SystemSpec& sys, double t, std::span<const double> y,
                             double tau);

/// Implicit midpoint step solved by fixed-point iteration; the psi defect is
/// recorded for reporting but is not a stopping criterion.
void step_implicit_midpoint(const SystemSpec& sys, const StepperConfig& cfg, double t,
                            std::span<const double> y, std::span<const double> psi_ref,
                            std::span<double> x_next, StepDiagnostics& diag,
                            StepWorkspace& ws);

}  // namespace conservo

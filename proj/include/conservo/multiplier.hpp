#pragma once

// Discrete multiplier construction. The m x n multiplier is assembled from
// telescoping partial divided differences of psi so that the discrete
// spatial chain rule
//     Lambda * (x_new - x_old) = psi(t, x_new) - psi(t, x_old)
// holds to rounding. Time is frozen at t inside the spatial differences;
// all explicit time dependence is routed through the discrete time partial.

#include <cstddef>
#include <span>
#include <vector>

#include "conservo/dense.hpp"
#include "conservo/system.hpp"

namespace conservo {

/// Discrete multiplier with degeneracy metadata: columns whose divided
/// difference denominator fell below threshold were replaced by midpoint
/// partial derivatives.
struct MultiplierMatrix {
    DenseMatrix matrix;
    std::vector<std::size_t> degenerate_columns;
};

/// Default relative degeneracy tolerance: column j is degenerate when
/// |x_new_j - x_old_j| < deg_tol * max(1, |x_new_j|, |x_old_j|).
inline constexpr double kDefaultDegTol = 1e-10;

struct MultiplierWorkspace {
    std::vector<double> z;
    std::vector<double> psi_prev;
    std::vector<double> psi_cur;
    std::vector<double> psi_lo;
    std::vector<double> psi_hi;
    DenseMatrix grad;
};

void telescoping_multiplier(const SystemSpec& sys, double t, std::span<const double> x_new,
                            std::span<const double> x_old, double deg_tol,
                            MultiplierMatrix& out, MultiplierWorkspace& ws);
MultiplierMatrix telescoping_multiplier(const SystemSpec& sys, double t,
                                        std::span<const double> x_new,
                                        std::span<const double> x_old,
                                        double deg_tol = kDefaultDegTol);

/// Componentwise defect Lambda*(x_new - x_old) - [psi(t,x_new) - psi(t,x_old)].
std::vector<double> check_chain_rule(const MultiplierMatrix& lam, const SystemSpec& sys,
                                     double t, std::span<const double> x_new,
                                     std::span<const double> x_old);

/// [psi(t_next, x_new) - psi(t_k, x_new)] / (t_next - t_k); the zero vector
/// (without evaluating psi) when the system is time-independent.
void discrete_time_partial(const SystemSpec& sys, double t_k, double t_next,
                           std::span<const double> x_new, std::span<double> out);
std::vector<double> discrete_time_partial(const SystemSpec& sys, double t_k, double t_next,
                                          std::span<const double> x_new);

/// r = Lambda * f_tau + dt_psi
void residual(const MultiplierMatrix& lam, std::span<const double> f_tau,
              std::span<const double> dt_psi, std::span<double> out);
std::vector<double> residual(const MultiplierMatrix& lam, std::span<const double> f_tau,
                             std::span<const double> dt_psi);

}  // namespace conservo

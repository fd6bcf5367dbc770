#pragma once

// The benchmark systems: Lotka-Volterra (two and three species), the planar
// restricted three-body problem, the Lorenz system with a time-dependent
// invariant, point vortices on the unit sphere, and geodesics of the
// Schwarzschild metric.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "conservo/system.hpp"

namespace conservo {

// --- two-species Lotka-Volterra -----------------------------------------

struct Lv2Params {
    double a = 1.0;
    double b = 2.0;
    double c = 3.0;
    double d = 4.0;
};

SystemSpec make_lv2(const Lv2Params& p);

// --- three-species Lotka-Volterra ----------------------------------------

struct Lv3Params {
    // Row-major 3x3 interaction matrix.
    std::array<double, 9> interaction = {0.0, 3.0, -2.0, -3.0, 0.0, 1.0, 2.0, -1.0, 0.0};
    std::array<double, 3> fixed_point = {1.0, 1.0, 1.0};
    std::array<double, 3> d_diag = {1.0, 1.0, 1.0};
    std::array<double, 3> eta = {1.0, 2.0, 3.0};
};

/// Requires D A + A^T D = 0 and eta^T A = 0 (to 1e-12); throws InvalidParams
/// otherwise.
SystemSpec make_lv3(const Lv3Params& p);

// --- planar restricted three-body problem ---------------------------------

inline constexpr double kArenstorfAlpha = 0.012277471;
inline constexpr double kArenstorfPeriod = 17.0652165601579625588917206249;
inline constexpr std::array<double, 4> kArenstorfX0 = {
    0.994, 0.0, 0.0, -2.00158510637908252240537862224};

/// State (x1, x2, y1, y2); conserved Jacobi integral. beta = 1 - alpha.
SystemSpec make_three_body(double alpha);

// --- Lorenz system ----------------------------------------------------------

/// sigma = 1/3, rho = 400, beta = 0; single time-dependent invariant.
SystemSpec make_lorenz();

// --- point vortices on the unit sphere -------------------------------------

struct VortexParams {
    std::size_t count = 0;
    std::vector<double> strengths;       // N values
    std::vector<double> positions;       // 3N values, unit 3-vectors
    std::uint64_t rng_seed = 1;
    bool include_norm_constraints = false;
};

/// Deterministic sampling: positions are normalized 3d standard Gaussians,
/// strengths uniform on [-1,1], both from a counter-based integer generator
/// so identical seeds give bit-identical data.
VortexParams make_vortex_params(std::size_t count, std::uint64_t seed,
                                bool include_norm_constraints = false);

/// Conserved momentum P (3 components) and Hamiltonian H; with
/// include_norm_constraints also each |x_i|^2.
SystemSpec make_point_vortex(const VortexParams& p);

// --- Schwarzschild geodesics -------------------------------------------------

struct SchwarzschildParams {
    double r_s = 2.0;  // Schwarzschild radius; G = M = c = 1 gives 2
};

inline constexpr std::array<double, 8> kSchwarzschildX0 = {
    0.0, 37.338379348829989, 1.5707963267948966, 3.006861595479139,
    1.0, -0.990937492340824, 0.0, 0.003597472991852};

/// Rank-3 Christoffel array, symmetric in the lower index pair.
struct Christoffel {
    std::array<double, 64> v{};
    double& operator()(std::size_t l, std::size_t j, std::size_t k) noexcept {
        return v[l * 16 + j * 4 + k];
    }
    double operator()(std::size_t l, std::size_t j, std::size_t k) const noexcept {
        return v[l * 16 + j * 4 + k];
    }
};

/// Metric diag(1 - rs/r, -(1 - rs/r)^{-1}, -r^2, -r^2 sin^2(theta)) at
/// x = (t, r, theta, phi).
DenseMatrix schwarzschild_metric(const SchwarzschildParams& p, std::span<const double> x);

/// Closed-form Christoffel symbols of the Schwarzschild metric. Requires
/// r > r_s and theta away from the polar axis.
Christoffel christoffel_schwarzschild(const SchwarzschildParams& p, std::span<const double> x);

using MetricFn = std::function<DenseMatrix(std::span<const double>)>;

/// Finite-difference oracle: Gamma^l_jk = 1/2 g^{lm} (d_j g_mk + d_k g_mj -
/// d_m g_jk) with central differences of the supplied metric.
Christoffel christoffel_fd_oracle(const MetricFn& metric, std::span<const double> x);

/// Geodesic flow, state (t, r, theta, phi, t', r', theta', phi'); conserved
/// speed S, energy E and the three angular-momentum components.
SystemSpec make_schwarzschild(const SchwarzschildParams& p);

}  // namespace conservo

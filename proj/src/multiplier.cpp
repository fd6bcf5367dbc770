#include "conservo/multiplier.hpp"

#include <algorithm>
#include <cmath>

#include "conservo/errors.hpp"
#include "conservo/kernels.hpp"

namespace conservo {

namespace {

// Column of the midpoint partial derivative d(psi)/dx_j, used when the
// divided-difference denominator is degenerate. Analytic gradient when
// supplied, else a central difference on psi.
void gradient_column(const SystemSpec& sys, double t, std::span<double> z, std::size_t j,
                     MultiplierMatrix& out, MultiplierWorkspace& ws) {
    const std::size_t m = sys.n_conserved;
    if (sys.grad_conserved) {
        sys.check_domain(z);
        sys.grad_conserved(t, z, ws.grad);
        for (std::size_t i = 0; i < m; ++i) out.matrix(i, j) = ws.grad(i, j);
        return;
    }
    const double zj = z[j];
    const double h = 1e-6 * std::max(1.0, std::abs(zj));
    z[j] = zj + h;
    sys.eval_conserved(t, z, ws.psi_hi);
    z[j] = zj - h;
    sys.eval_conserved(t, z, ws.psi_lo);
    z[j] = zj;
    for (std::size_t i = 0; i < m; ++i)
        out.matrix(i, j) = (ws.psi_hi[i] - ws.psi_lo[i]) / (2.0 * h);
}

}  // namespace

void telescoping_multiplier(const SystemSpec& sys, double t, std::span<const double> x_new,
                            std::span<const double> x_old, double deg_tol,
                            MultiplierMatrix& out, MultiplierWorkspace& ws) {
    const std::size_t n = sys.dim;
    const std::size_t m = sys.n_conserved;
    out.matrix.assign_zero(m, n);
    out.degenerate_columns.clear();

    // z walks from x_old to x_new one coordinate at a time (identity
    // permutation); psi differences between consecutive states telescope
    // to psi(x_new) - psi(x_old) exactly.
    ws.z.assign(x_old.begin(), x_old.end());
    ws.psi_prev.resize(m);
    ws.psi_cur.resize(m);
    ws.psi_lo.resize(m);
    ws.psi_hi.resize(m);
    sys.eval_conserved(t, ws.z, ws.psi_prev);

    for (std::size_t j = 0; j < n; ++j) {
        const double dx = x_new[j] - x_old[j];
        const double tol = deg_tol * std::max({1.0, std::abs(x_new[j]), std::abs(x_old[j])});
        if (std::abs(dx) < tol) {
            const double zj = ws.z[j];
            ws.z[j] = 0.5 * (x_old[j] + x_new[j]);
            gradient_column(sys, t, ws.z, j, out, ws);
            ws.z[j] = zj;
            out.degenerate_columns.push_back(j);
        }
        ws.z[j] = x_new[j];
        sys.eval_conserved(t, ws.z, ws.psi_cur);
        if (std::abs(dx) >= tol) {
            const double inv = 1.0 / dx;
            for (std::size_t i = 0; i < m; ++i)
                out.matrix(i, j) = (ws.psi_cur[i] - ws.psi_prev[i]) * inv;
        }
        std::swap(ws.psi_prev, ws.psi_cur);
    }

    if (!out.matrix.all_finite())
        throw DomainViolation(sys.name + ": non-finite multiplier entry");
}

MultiplierMatrix telescoping_multiplier(const SystemSpec& sys, double t,
                                        std::span<const double> x_new,
                                        std::span<const double> x_old, double deg_tol) {
    MultiplierMatrix out;
    MultiplierWorkspace ws;
    telescoping_multiplier(sys, t, x_new, x_old, deg_tol, out, ws);
    return out;
}

std::vector<double> check_chain_rule(const MultiplierMatrix& lam, const SystemSpec& sys,
                                     double t, std::span<const double> x_new,
                                     std::span<const double> x_old) {
    const std::size_t n = sys.dim;
    const std::size_t m = sys.n_conserved;
    std::vector<double> dx(n);
    for (std::size_t j = 0; j < n; ++j) dx[j] = x_new[j] - x_old[j];
    std::vector<double> defect(m);
    kernels::gemv(lam.matrix.data(), m, n, dx, defect);
    std::vector<double> psi_new(m), psi_old(m);
    sys.eval_conserved(t, x_new, psi_new);
    sys.eval_conserved(t, x_old, psi_old);
    for (std::size_t i = 0; i < m; ++i) defect[i] -= psi_new[i] - psi_old[i];
    return defect;
}

void discrete_time_partial(const SystemSpec& sys, double t_k, double t_next,
                           std::span<const double> x_new, std::span<double> out) {
    const std::size_t m = sys.n_conserved;
    if (!sys.time_dependent) {
        std::fill(out.begin(), out.begin() + m, 0.0);
        return;
    }
    std::vector<double> psi_next(m), psi_now(m);
    sys.eval_conserved(t_next, x_new, psi_next);
    sys.eval_conserved(t_k, x_new, psi_now);
    const double inv = 1.0 / (t_next - t_k);
    for (std::size_t i = 0; i < m; ++i) out[i] = (psi_next[i] - psi_now[i]) * inv;
}

std::vector<double> discrete_time_partial(const SystemSpec& sys, double t_k, double t_next,
                                          std::span<const double> x_new) {
    std::vector<double> out(sys.n_conserved);
    discrete_time_partial(sys, t_k, t_next, x_new, out);
    return out;
}

void residual(const MultiplierMatrix& lam, std::span<const double> f_tau,
              std::span<const double> dt_psi, std::span<double> out) {
    const std::size_t m = lam.matrix.rows();
    kernels::gemv(lam.matrix.data(), m, lam.matrix.cols(), f_tau, out);
    for (std::size_t i = 0; i < m; ++i) out[i] += dt_psi[i];
}

std::vector<double> residual(const MultiplierMatrix& lam, std::span<const double> f_tau,
                             std::span<const double> dt_psi) {
    std::vector<double> out(lam.matrix.rows());
    residual(lam, f_tau, dt_psi, out);
    return out;
}

}  // namespace conservo

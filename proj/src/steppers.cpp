#include "conservo/steppers.hpp"

#include <algorithm>
#include <cmath>

#include "conservo/errors.hpp"
#include "conservo/kernels.hpp"

namespace conservo {

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) noexcept {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]));
    return r;
}

double cond_from_factors(const linalg::SvdFactors& f) noexcept {
    const double smin = f.sigma.back();
    if (smin < 1e-300) return std::numeric_limits<double>::infinity();
    return f.sigma.front() / smin;
}

// Condition number of the 2x2 Gram matrix [[n11,n12],[n12,n22]] from its
// eigenvalues; used by the m=2 fast path.
double cond_gram_2x2(double n11, double n22, double n12) noexcept {
    const double tr = n11 + n22;
    const double disc = std::sqrt((n11 - n22) * (n11 - n22) + 4.0 * n12 * n12);
    const double lo = 0.5 * (tr - disc);
    if (lo < 1e-300) return std::numeric_limits<double>::infinity();
    return 0.5 * (tr + disc) / lo;
}

}  // namespace

void predictor_improved_euler(const SystemSpec& sys, double t, std::span<const double> y,
                              double tau, std::span<double> out, StepWorkspace& ws) {
    const std::size_t n = sys.dim;
    ws.k1.resize(n);
    ws.k2.resize(n);
    ws.stage.resize(n);
    sys.eval_source(t, y, ws.k1);
    kernels::add_scaled(ws.stage, y, tau, ws.k1);
    sys.eval_source(t + tau, ws.stage, ws.k2);
    for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + 0.5 * tau * (ws.k1[i] + ws.k2[i]);
    if (!sys.contains(out))
        throw DomainViolation(sys.name + ": predictor left the admissible domain");
}

std::vector<double> predictor_improved_euler(const SystemSpec& sys, double t,
                                             std::span<const double> y, double tau) {
    std::vector<double> out(sys.dim);
    StepWorkspace ws;
    predictor_improved_euler(sys, t, y, tau, out, ws);
    return out;
}

void base_scheme_f_tau(const SystemSpec& sys, double t, std::span<const double> x_new,
                       std::span<const double> x_old, double tau, BaseScheme scheme,
                       std::span<double> out, StepWorkspace& ws) {
    const std::size_t n = sys.dim;
    ws.k1.resize(n);
    ws.k2.resize(n);
    sys.eval_source(t, x_old, ws.k1);
    switch (scheme) {
        case BaseScheme::ImprovedEuler:
            ws.stage.resize(n);
            kernels::add_scaled(ws.stage, x_old, tau, ws.k1);
            sys.eval_source(t + tau, ws.stage, ws.k2);
            break;
        case BaseScheme::Trapezoidal:
            sys.eval_source(t + tau, x_new, ws.k2);
            break;
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (ws.k1[i] + ws.k2[i]);
}

std::vector<double> base_scheme_f_tau(const SystemSpec& sys, double t,
                                      std::span<const double> x_new,
                                      std::span<const double> x_old, double tau,
                                      BaseScheme scheme) {
    std::vector<double> out(sys.dim);
    StepWorkspace ws;
    base_scheme_f_tau(sys, t, x_new, x_old, tau, scheme, out, ws);
    return out;
}

double mn_correct(const MultiplierMatrix& lam, std::span<const double> f_tau,
                  std::span<const double> dt_psi, Variant variant, std::span<double> f_mn,
                  StepWorkspace& ws) {
    const std::size_t m = lam.matrix.rows();
    const std::size_t n = lam.matrix.cols();
    ws.corr.resize(n);

    std::vector<double>& r = ws.psi_cur;  // residual Lambda f + dt_psi
    r.resize(m);
    residual(lam, f_tau, dt_psi, r);

    double kappa = 1.0;
    switch (variant) {
        case Variant::Direct: {
            linalg::apply_pinv(lam.matrix, r, linalg::PinvBackend::NormalEq, ws.corr, ws.pinv);
            if (m > 1) {
                linalg::svd_thin(ws.pinv.gram, ws.svd_cond, ws.svd_cond_ws);
                kappa = cond_from_factors(ws.svd_cond);
            }
            break;
        }
        case Variant::Mixed: {
            linalg::form_gram(lam.matrix, ws.gram);
            ws.g.resize(m);
            linalg::solve_sym(ws.gram, r, ws.g, ws.sym);
            kernels::gemv_t(lam.matrix.data(), m, n, ws.g, ws.corr);
            if (m > 1) {
                linalg::svd_thin(ws.gram, ws.svd_cond, ws.svd_cond_ws);
                kappa = cond_from_factors(ws.svd_cond);
            }
            break;
        }
        case Variant::MixedSvd: {
            linalg::svd_thin(lam.matrix, ws.svd, ws.svd_ws);
            const double smax = ws.svd.sigma.front();
            const double smin = ws.svd.sigma.back();
            if (smin < linalg::kSingularRel * smax)
                throw SingularMatrix("mn_correct: rank-deficient multiplier (svd)");
            ws.g.resize(m);
            for (std::size_t k = 0; k < m; ++k) {
                double acc = 0.0;
                for (std::size_t i = 0; i < m; ++i) acc += ws.svd.u(i, k) * r[i];
                ws.g[k] = acc / ws.svd.sigma[k];
            }
            for (std::size_t j = 0; j < n; ++j)
                ws.corr[j] = kernels::dot(ws.svd.v.row(j), ws.g);
            if (m > 1) kappa = smax / smin;
            break;
        }
        case Variant::Rk4:
        case Variant::ImplicitMidpoint:
            throw std::invalid_argument("mn_correct: not a conservative variant");
    }

    for (std::size_t j = 0; j < n; ++j) f_mn[j] = f_tau[j] - ws.corr[j];
    return kappa;
}

std::pair<std::vector<double>, double> mn_correct(const MultiplierMatrix& lam,
                                                  std::span<const double> f_tau,
                                                  std::span<const double> dt_psi,
                                                  Variant variant) {
    std::vector<double> f_mn(lam.matrix.cols());
    StepWorkspace ws;
    const double kappa = mn_correct(lam, f_tau, dt_psi, variant, f_mn, ws);
    return {std::move(f_mn), kappa};
}

void mn_correct_m1(std::span<const double> dpsi_dx, std::span<const double> f_tau,
                   double dt_psi, std::span<double> f_mn) {
    const double den = kernels::dot(dpsi_dx, dpsi_dx);
    if (den == 0.0)
        throw SingularMatrix("mn_correct_m1: divided-difference vector vanishes");
    const double alpha = (kernels::dot(dpsi_dx, f_tau) + dt_psi) / den;
    for (std::size_t j = 0; j < f_tau.size(); ++j) f_mn[j] = f_tau[j] - alpha * dpsi_dx[j];
}

void mn_correct_m2(std::span<const double> row1, std::span<const double> row2,
                   std::span<const double> f_tau, std::span<const double> dt_psi,
                   std::span<double> f_mn) {
    const double n11 = kernels::dot(row1, row1);
    const double n22 = kernels::dot(row2, row2);
    const double n12 = kernels::dot(row1, row2);
    const double det = n11 * n22 - n12 * n12;
    if (!(det > 1e-28 * n11 * n22))
        throw SingularMatrix("mn_correct_m2: multiplier rows numerically parallel");
    const double c1 = kernels::dot(row1, f_tau) + dt_psi[0];
    const double c2 = kernels::dot(row2, f_tau) + dt_psi[1];
    const double g1 = (n22 * c1 - n12 * c2) / det;
    const double g2 = (n11 * c2 - n12 * c1) / det;
    for (std::size_t j = 0; j < f_tau.size(); ++j)
        f_mn[j] = f_tau[j] - g1 * row1[j] - g2 * row2[j];
}

void step_mn(const SystemSpec& sys, const StepperConfig& cfg, double t,
             std::span<const double> y, std::span<const double> psi_ref,
             std::span<double> x_next, StepDiagnostics& diag, StepWorkspace& ws) {
    const std::size_t n = sys.dim;
    const std::size_t m = sys.n_conserved;
    const double tau = cfg.tau;

    diag.psi_defect.assign(m, 0.0);
    diag.converged = false;
    diag.iterations = 0;
    diag.residual_norm = std::numeric_limits<double>::infinity();
    diag.kappa = 1.0;

    ws.x_prev.resize(n);
    ws.x_cur.resize(n);
    ws.s.resize(n);
    ws.f_mn.resize(n);
    ws.dt_psi.resize(m);
    std::vector<double>& psi_now = ws.k3;  // scratch for the delta test
    psi_now.resize(m);

    // With the improved-Euler base scheme, f_tau is independent of x_new
    // and constant over the corrector iterations; the predictor is then
    // exactly y + tau * f_tau, sharing the two source evaluations. A
    // predictor that overshoots the admissible domain is replaced by the
    // trivial seed x^(0) = y; the corrector converges to the same fixed
    // point from there. A source that cannot be evaluated at all aborts
    // the step and surfaces to the harness.
    const bool s_constant = (cfg.base_scheme == BaseScheme::ImprovedEuler);
    if (s_constant) {
        base_scheme_f_tau(sys, t, y, y, tau, cfg.base_scheme, ws.s, ws);
        kernels::add_scaled(ws.x_prev, y, tau, ws.s);
        if (!sys.contains(ws.x_prev)) std::copy(y.begin(), y.end(), ws.x_prev.begin());
    } else {
        try {
            predictor_improved_euler(sys, t, y, tau, ws.x_prev, ws);
        } catch (const DomainViolation&) {
            std::copy(y.begin(), y.end(), ws.x_prev.begin());
        }
    }

    double kappa_max = (m == 1) ? 1.0 : 0.0;
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        diag.iterations = iter;

        if (sys.analytic_multiplier) {
            sys.check_domain(ws.x_prev);
            sys.analytic_multiplier(t, ws.x_prev, y, ws.lam.matrix);
            ws.lam.degenerate_columns.clear();
        } else {
            telescoping_multiplier(sys, t, ws.x_prev, y, cfg.deg_tol, ws.lam, ws.mul);
        }
        if (!s_constant)
            base_scheme_f_tau(sys, t, ws.x_prev, y, tau, cfg.base_scheme, ws.s, ws);
        discrete_time_partial(sys, t, t + tau, ws.x_prev, ws.dt_psi);

        double kappa;
        if (cfg.fast_path && m == 1) {
            mn_correct_m1(ws.lam.matrix.row(0), ws.s, ws.dt_psi[0], ws.f_mn);
            kappa = 1.0;
        } else if (cfg.fast_path && m == 2) {
            mn_correct_m2(ws.lam.matrix.row(0), ws.lam.matrix.row(1), ws.s, ws.dt_psi, ws.f_mn);
            const double kb = cond_gram_2x2(kernels::dot(ws.lam.matrix.row(0), ws.lam.matrix.row(0)),
                                            kernels::dot(ws.lam.matrix.row(1), ws.lam.matrix.row(1)),
                                            kernels::dot(ws.lam.matrix.row(0), ws.lam.matrix.row(1)));
            kappa = (cfg.variant == Variant::MixedSvd) ? std::sqrt(kb) : kb;
        } else {
            kappa = mn_correct(ws.lam, ws.s, ws.dt_psi, cfg.variant, ws.f_mn, ws);
        }
        kappa_max = std::max(kappa_max, kappa);

        kernels::add_scaled(ws.x_cur, y, tau, ws.f_mn);
        sys.eval_conserved(t + tau, ws.x_cur, psi_now);
        double defect_max = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            diag.psi_defect[i] = std::abs(psi_now[i] - psi_ref[i]);
            defect_max = std::max(defect_max, diag.psi_defect[i]);
        }
        diag.residual_norm = max_abs_diff(ws.x_cur, ws.x_prev);
        std::swap(ws.x_prev, ws.x_cur);

        if (defect_max < cfg.delta && diag.residual_norm < cfg.epsilon) {
            diag.converged = true;
            break;
        }
    }

    diag.kappa = kappa_max;
    std::copy(ws.x_prev.begin(), ws.x_prev.end(), x_next.begin());
}

void step_rk4(const SystemSpec& sys, double t, std::span<const double> y, double tau,
              std::span<double> out, StepWorkspace& ws) {
    const std::size_t n = sys.dim;
    ws.k1.resize(n);
    ws.k2.resize(n);
    ws.k3.resize(n);
    ws.k4.resize(n);
    ws.stage.resize(n);
    sys.eval_source(t, y, ws.k1);
    kernels::add_scaled(ws.stage, y, 0.5 * tau, ws.k1);
    sys.eval_source(t + 0.5 * tau, ws.stage, ws.k2);
    kernels::add_scaled(ws.stage, y, 0.5 * tau, ws.k2);
    sys.eval_source(t + 0.5 * tau, ws.stage, ws.k3);
    kernels::add_scaled(ws.stage, y, tau, ws.k3);
    sys.eval_source(t + tau, ws.stage, ws.k4);
    const double w = tau / 6.0;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = y[i] + w * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
}

std::vector<double> step_rk4(const SystemSpec& sys, double t, std::span<const double> y,
                             double tau) {
    std::vector<double> out(sys.dim);
    StepWorkspace ws;
    step_rk4(sys, t, y, tau, out, ws);
    return out;
}

void step_implicit_midpoint(const SystemSpec& sys, const StepperConfig& cfg, double t,
                            std::span<const double> y, std::span<const double> psi_ref,
                            std::span<double> x_next, StepDiagnostics& diag,
                            StepWorkspace& ws) {
    const std::size_t n = sys.dim;
    const std::size_t m = sys.n_conserved;
    const double tau = cfg.tau;

    diag.psi_defect.assign(m, 0.0);
    diag.converged = false;
    diag.iterations = 0;
    diag.residual_norm = std::numeric_limits<double>::infinity();
    diag.kappa = std::numeric_limits<double>::quiet_NaN();

    ws.x_prev.resize(n);
    ws.x_cur.resize(n);
    ws.xm.resize(n);
    ws.f_mn.resize(n);
    try {
        predictor_improved_euler(sys, t, y, tau, ws.x_prev, ws);
    } catch (const DomainViolation&) {
        std::copy(y.begin(), y.end(), ws.x_prev.begin());
    }

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        diag.iterations = iter;
        for (std::size_t i = 0; i < n; ++i) ws.xm[i] = 0.5 * (ws.x_prev[i] + y[i]);
        sys.eval_source(t + 0.5 * tau, ws.xm, ws.f_mn);
        kernels::add_scaled(ws.x_cur, y, tau, ws.f_mn);
        diag.residual_norm = max_abs_diff(ws.x_cur, ws.x_prev);
        std::swap(ws.x_prev, ws.x_cur);
        if (diag.residual_norm < cfg.epsilon) {
            diag.converged = true;
            break;
        }
    }

    std::vector<double>& psi_now = ws.k3;
    psi_now.resize(m);
    sys.eval_conserved(t + tau, ws.x_prev, psi_now);
    for (std::size_t i = 0; i < m; ++i) diag.psi_defect[i] = std::abs(psi_now[i] - psi_ref[i]);
    std::copy(ws.x_prev.begin(), ws.x_prev.end(), x_next.begin());
}

}  // namespace conservo

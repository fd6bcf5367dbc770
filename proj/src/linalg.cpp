#include "conservo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "conservo/errors.hpp"
#include "conservo/kernels.hpp"

namespace conservo::linalg {

namespace {

// Forward/back substitution for the Cholesky factor stored in the lower
// triangle (diagonal holds L_kk).
void cholesky_solve(const DenseMatrix& l, std::span<const double> rhs,
                    std::span<double> out, std::vector<double>& work) {
    const std::size_t m = l.rows();
    work.assign(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < m; ++i) {
        double acc = work[i];
        for (std::size_t j = 0; j < i; ++j) acc -= l(i, j) * work[j];
        work[i] = acc / l(i, i);
    }
    for (std::size_t ii = m; ii-- > 0;) {
        double acc = work[ii];
        for (std::size_t j = ii + 1; j < m; ++j) acc -= l(j, ii) * out[j];
        out[ii] = acc / l(ii, ii);
    }
}

// Returns false when a nonpositive pivot arises (caller falls back to LU);
// throws SingularMatrix when a pivot is negligibly small in magnitude.
bool cholesky_factor(const DenseMatrix& b, DenseMatrix& l, double pivot_floor) {
    const std::size_t m = b.rows();
    l = b;
    for (std::size_t k = 0; k < m; ++k) {
        double d = l(k, k);
        for (std::size_t j = 0; j < k; ++j) d -= l(k, j) * l(k, j);
        if (std::abs(d) < pivot_floor)
            throw SingularMatrix("solve_sym: pivot below singularity threshold");
        if (d <= 0.0) return false;
        const double lkk = std::sqrt(d);
        l(k, k) = lkk;
        for (std::size_t i = k + 1; i < m; ++i) {
            double acc = l(i, k);
            for (std::size_t j = 0; j < k; ++j) acc -= l(i, j) * l(k, j);
            l(i, k) = acc / lkk;
        }
    }
    return true;
}

void lu_solve(const DenseMatrix& b, std::span<const double> rhs, std::span<double> out,
              DenseMatrix& lu, std::vector<int>& perm, double pivot_floor) {
    const std::size_t m = b.rows();
    lu = b;
    perm.resize(m);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu(k, k));
        for (std::size_t i = k + 1; i < m; ++i) {
            const double cand = std::abs(lu(i, k));
            if (cand > best) {
                best = cand;
                piv = i;
            }
        }
        if (best < pivot_floor)
            throw SingularMatrix("solve_sym: pivot below singularity threshold");
        if (piv != k) {
            for (std::size_t j = 0; j < m; ++j) std::swap(lu(k, j), lu(piv, j));
            std::swap(perm[k], perm[piv]);
        }
        for (std::size_t i = k + 1; i < m; ++i) {
            const double factor = lu(i, k) / lu(k, k);
            lu(i, k) = factor;
            for (std::size_t j = k + 1; j < m; ++j) lu(i, j) -= factor * lu(k, j);
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        double acc = rhs[static_cast<std::size_t>(perm[i])];
        for (std::size_t j = 0; j < i; ++j) acc -= lu(i, j) * out[j];
        out[i] = acc;
    }
    for (std::size_t ii = m; ii-- > 0;) {
        double acc = out[ii];
        for (std::size_t j = ii + 1; j < m; ++j) acc -= lu(ii, j) * out[j];
        out[ii] = acc / lu(ii, ii);
    }
}

}  // namespace

void solve_sym(const DenseMatrix& b, std::span<const double> rhs,
               std::span<double> out, SymSolveWorkspace& ws) {
    const double pivot_floor = kSingularRel * max_abs(b);
    if (b.rows() == 0) return;
    if (cholesky_factor(b, ws.factor, pivot_floor)) {
        cholesky_solve(ws.factor, rhs, out, ws.work);
        return;
    }
    lu_solve(b, rhs, out, ws.factor, ws.perm, pivot_floor);
}

std::vector<double> solve_sym(const DenseMatrix& b, std::span<const double> rhs) {
    std::vector<double> out(rhs.size());
    SymSolveWorkspace ws;
    solve_sym(b, rhs, out, ws);
    return out;
}

void svd_thin(const DenseMatrix& a, SvdFactors& out, SvdWorkspace& ws) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (m > n) throw std::invalid_argument("svd_thin: requires rows <= cols");

    ws.w = a;
    ws.g = DenseMatrix::identity(m);

    // One-sided Jacobi on the rows: rotate row pairs until mutually
    // orthogonal. The 1e-15 relative threshold pushes the off-diagonal
    // products to rounding level.
    constexpr double tol = 1e-15;
    constexpr int max_sweeps = 60;
    bool clean = (m <= 1);
    for (int sweep = 0; sweep < max_sweeps && !clean; ++sweep) {
        clean = true;
        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                const double app = kernels::dot(ws.w.row(p), ws.w.row(p));
                const double aqq = kernels::dot(ws.w.row(q), ws.w.row(q));
                const double apq = kernels::dot(ws.w.row(p), ws.w.row(q));
                if (apq * apq <= tol * tol * app * aqq) continue;
                clean = false;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t =
                    std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                kernels::rot(ws.w.row(p), ws.w.row(q), c, s);
                kernels::rot(ws.g.row(p), ws.g.row(q), c, s);
            }
        }
    }
    if (!clean) throw NoConvergence("svd_thin: Jacobi sweeps exceeded 60");

    out.sigma.resize(m);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> norms(m);
    for (std::size_t i = 0; i < m; ++i) norms[i] = norm2(ws.w.row(i));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    out.u.assign_zero(m, m);
    out.v.assign_zero(n, m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t src = order[k];
        out.sigma[k] = norms[src];
        for (std::size_t i = 0; i < m; ++i) out.u(i, k) = ws.g(src, i);
        if (norms[src] > 0.0) {
            const double inv = 1.0 / norms[src];
            for (std::size_t j = 0; j < n; ++j) out.v(j, k) = ws.w(src, j) * inv;
        }
    }

    // Rank-deficient rows leave zero columns in V; complete them to an
    // orthonormal set so the factor invariants still hold.
    for (std::size_t k = 0; k < m; ++k) {
        if (out.sigma[k] > 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> cand(n, 0.0);
            cand[j] = 1.0;
            for (std::size_t l = 0; l < m; ++l) {
                if (l == k) continue;
                double proj = 0.0;
                for (std::size_t i = 0; i < n; ++i) proj += out.v(i, l) * cand[i];
                for (std::size_t i = 0; i < n; ++i) cand[i] -= proj * out.v(i, l);
            }
            const double nrm = norm2(cand);
            if (nrm > 0.5) {
                for (std::size_t i = 0; i < n; ++i) out.v(i, k) = cand[i] / nrm;
                break;
            }
        }
    }
}

SvdFactors svd_thin(const DenseMatrix& a) {
    SvdFactors out;
    SvdWorkspace ws;
    svd_thin(a, out, ws);
    return out;
}

void form_gram(const DenseMatrix& a, DenseMatrix& b) {
    const std::size_t m = a.rows();
    b.assign_zero(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            const double v = kernels::dot(a.row(i), a.row(j));
            b(i, j) = v;
            b(j, i) = v;
        }
    }
}

void apply_pinv(const DenseMatrix& a, std::span<const double> v, PinvBackend backend,
                std::span<double> out, PinvWorkspace& ws) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    switch (backend) {
        case PinvBackend::NormalEq: {
            form_gram(a, ws.gram);
            ws.tmp.resize(m);
            solve_sym(ws.gram, v, ws.tmp, ws.sym);
            kernels::gemv_t(a.data(), m, n, ws.tmp, out);
            return;
        }
        case PinvBackend::Svd: {
            svd_thin(a, ws.svd, ws.svd_ws);
            const double smax = ws.svd.sigma.front();
            const double smin = ws.svd.sigma.back();
            if (smin < kSingularRel * smax)
                throw SingularMatrix("apply_pinv: rank-deficient matrix (svd backend)");
            ws.tmp.resize(m);
            for (std::size_t k = 0; k < m; ++k) {
                double acc = 0.0;
                for (std::size_t i = 0; i < m; ++i) acc += ws.svd.u(i, k) * v[i];
                ws.tmp[k] = acc / ws.svd.sigma[k];
            }
            for (std::size_t j = 0; j < n; ++j)
                out[j] = kernels::dot(ws.svd.v.row(j), ws.tmp);
            return;
        }
    }
}

std::vector<double> apply_pinv(const DenseMatrix& a, std::span<const double> v,
                               PinvBackend backend) {
    std::vector<double> out(a.cols());
    PinvWorkspace ws;
    apply_pinv(a, v, backend, out, ws);
    return out;
}

double cond_2(const DenseMatrix& a) {
    const DenseMatrix* work = &a;
    DenseMatrix transposed;
    if (a.rows() > a.cols()) {
        transposed = a.transposed();
        work = &transposed;
    }
    const SvdFactors f = svd_thin(*work);
    const double smax = f.sigma.front();
    const double smin = f.sigma.back();
    if (smin < 1e-300) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

}  // namespace conservo::linalg

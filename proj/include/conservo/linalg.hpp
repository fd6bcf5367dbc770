#pragma once

// Dense linear-algebra kernels sized for m conserved quantities (m << n):
// symmetric solve with Cholesky/LU fallback, one-sided Jacobi SVD of wide
// matrices, pseudoinverse application and condition numbers.

#include <cstddef>
#include <span>
#include <vector>

#include "conservo/dense.hpp"

namespace conservo::linalg {

/// Thin SVD of a wide matrix A (m x n, m <= n): A = U diag(sigma) V^T with
/// U m x m orthogonal, sigma descending and V n x m with orthonormal columns.
struct SvdFactors {
    DenseMatrix u;
    std::vector<double> sigma;
    DenseMatrix v;
};

enum class PinvBackend {
    NormalEq,  // A^T (A A^T)^{-1}, Gram matrix solved symmetrically
    Svd,       // V Sigma^+ U^T
};

/// Relative singularity threshold shared by the pivot and sigma checks.
inline constexpr double kSingularRel = 1e-14;

struct SymSolveWorkspace {
    DenseMatrix factor;
    std::vector<double> work;
    std::vector<int> perm;
};

/// Solve B g = rhs for symmetric B. Attempts Cholesky first (B is a Gram
/// matrix, normally SPD); falls back to LU with partial pivoting when a
/// nonpositive pivot arises. Throws SingularMatrix when the smallest pivot
/// magnitude drops below kSingularRel * max|B|.
void solve_sym(const DenseMatrix& b, std::span<const double> rhs,
               std::span<double> out, SymSolveWorkspace& ws);
std::vector<double> solve_sym(const DenseMatrix& b, std::span<const double> rhs);

struct SvdWorkspace {
    DenseMatrix w;  // row-orthogonalized copy of A
    DenseMatrix g;  // accumulated rotations
};

/// One-sided Jacobi SVD on the rows of A (requires m <= n). Throws
/// NoConvergence after 60 sweeps.
void svd_thin(const DenseMatrix& a, SvdFactors& out, SvdWorkspace& ws);
SvdFactors svd_thin(const DenseMatrix& a);

struct PinvWorkspace {
    DenseMatrix gram;
    SymSolveWorkspace sym;
    SvdFactors svd;
    SvdWorkspace svd_ws;
    std::vector<double> tmp;
};

/// w = A^+ v for full-row-rank A (m x n, m <= n), via the chosen backend.
void apply_pinv(const DenseMatrix& a, std::span<const double> v, PinvBackend backend,
                std::span<double> out, PinvWorkspace& ws);
std::vector<double> apply_pinv(const DenseMatrix& a, std::span<const double> v,
                               PinvBackend backend);

/// 2-norm condition number sigma_max/sigma_min; +inf when sigma_min
/// underflows. Matrices with more rows than columns are transposed first.
double cond_2(const DenseMatrix& a);

/// B = A A^T (m x m Gram matrix of the rows).
void form_gram(const DenseMatrix& a, DenseMatrix& b);

}  // namespace conservo::linalg

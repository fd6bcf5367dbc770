#include <cmath>
#include <numbers>

#include "conservo/counter_rng.hpp"
#include "conservo/errors.hpp"
#include "conservo/systems.hpp"

namespace conservo {

namespace {

constexpr double kCoincidenceTol = 1e-12;  // pair singularity guard on 1 - xi.xj

double dot3(const double* a, const double* b) noexcept {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Box-Muller pair from two uniforms; the generator never returns 0 so the
// log is safe.
void gaussian_pair(CounterRng& rng, double& z0, double& z1) {
    const double u1 = rng.uniform01_open_low();
    const double u2 = rng.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(a);
    z1 = r * std::sin(a);
}

struct VortexData {
    std::size_t count;
    std::vector<double> strengths;
    bool norms;
};

// d = 1 - xi.xj must stay above the coincidence guard.
void check_pair_distance(double d, const char* where) {
    if (!(d > kCoincidenceTol))
        throw DomainViolation(std::string("vortex: coincident vortices in ") + where);
}

}  // namespace

VortexParams make_vortex_params(std::size_t count, std::uint64_t seed,
                                bool include_norm_constraints) {
    VortexParams p;
    p.count = count;
    p.rng_seed = seed;
    p.include_norm_constraints = include_norm_constraints;
    p.positions.resize(3 * count);
    p.strengths.resize(count);

    // Pair speeds scale like Gamma / (4 pi (1 - xi.xj)), so a draw placing
    // two vortices nearly on top of each other makes the corrector
    // iteration diverge at the tabulated time step. Redraw (still from the
    // deterministic stream) until every pair keeps dot <= kMaxPairDot.
    constexpr double kMaxPairDot = 0.98;
    constexpr int kMaxAttempts = 100000;

    CounterRng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        int attempts = 0;
        for (;;) {
            if (++attempts > kMaxAttempts)
                throw InvalidParams("make_vortex_params: cannot place separated vortices");
            double g[3];
            double discard;
            gaussian_pair(rng, g[0], g[1]);
            gaussian_pair(rng, g[2], discard);
            const double nrm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
            if (nrm < 1e-8) continue;
            for (int c = 0; c < 3; ++c) p.positions[3 * i + c] = g[c] / nrm;
            bool separated = true;
            for (std::size_t j = 0; j < i && separated; ++j)
                separated = dot3(&p.positions[3 * i], &p.positions[3 * j]) <= kMaxPairDot;
            if (separated) break;
        }
    }
    for (std::size_t i = 0; i < count; ++i) p.strengths[i] = rng.uniform_pm1();
    return p;
}

SystemSpec make_point_vortex(const VortexParams& p) {
    const std::size_t nv = p.count;
    if (nv < 2) throw InvalidParams("make_point_vortex: need at least two vortices");
    if (p.strengths.size() != nv || p.positions.size() != 3 * nv)
        throw InvalidParams("make_point_vortex: strengths/positions size mismatch");
    for (std::size_t i = 0; i < nv; ++i) {
        const double nrm = std::sqrt(dot3(&p.positions[3 * i], &p.positions[3 * i]));
        if (std::abs(nrm - 1.0) > 1e-14)
            throw InvalidParams("make_point_vortex: positions must be unit vectors");
    }
    for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = i + 1; j < nv; ++j)
            if (!(dot3(&p.positions[3 * i], &p.positions[3 * j]) < 1.0 - kCoincidenceTol))
                throw InvalidParams("make_point_vortex: coincident vortices");

    const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
    VortexData data{nv, p.strengths, p.include_norm_constraints};

    SystemSpec sys;
    sys.name = "vortex";
    sys.dim = 3 * nv;
    sys.n_conserved = data.norms ? 4 + nv : 4;

    sys.in_domain = [data](std::span<const double> x) {
        for (std::size_t i = 0; i < data.count; ++i)
            for (std::size_t j = i + 1; j < data.count; ++j)
                if (!(dot3(&x[3 * i], &x[3 * j]) < 1.0 - kCoincidenceTol)) return false;
        return true;
    };

    sys.source = [data, inv4pi](double, std::span<const double> x, std::span<double> f) {
        const std::size_t n = data.count;
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = &x[3 * i];
            double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double* xj = &x[3 * j];
                const double w = data.strengths[j] / (1.0 - dot3(xi, xj));
                acc0 += w * (xj[1] * xi[2] - xj[2] * xi[1]);
                acc1 += w * (xj[2] * xi[0] - xj[0] * xi[2]);
                acc2 += w * (xj[0] * xi[1] - xj[1] * xi[0]);
            }
            f[3 * i + 0] = inv4pi * acc0;
            f[3 * i + 1] = inv4pi * acc1;
            f[3 * i + 2] = inv4pi * acc2;
        }
    };

    sys.conserved = [data, inv4pi](double, std::span<const double> x, std::span<double> psi) {
        const std::size_t n = data.count;
        psi[0] = psi[1] = psi[2] = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < 3; ++c) psi[c] += data.strengths[i] * x[3 * i + c];
        double h = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = 1.0 - dot3(&x[3 * i], &x[3 * j]);
                check_pair_distance(d, "conserved");
                h += data.strengths[i] * data.strengths[j] * std::log(d);
            }
        }
        psi[3] = -inv4pi * h;
        if (data.norms)
            for (std::size_t i = 0; i < n; ++i) psi[4 + i] = dot3(&x[3 * i], &x[3 * i]);
    };

    sys.grad_conserved = [data, inv4pi](double, std::span<const double> x, DenseMatrix& g) {
        const std::size_t n = data.count;
        g.assign_zero(data.norms ? 4 + n : 4, 3 * n);
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < 3; ++c) g(c, 3 * i + c) = data.strengths[i];
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = &x[3 * i];
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double* xj = &x[3 * j];
                const double w =
                    inv4pi * data.strengths[i] * data.strengths[j] / (1.0 - dot3(xi, xj));
                for (int c = 0; c < 3; ++c) g(3, 3 * i + c) += w * xj[c];
            }
        }
        if (data.norms)
            for (std::size_t i = 0; i < n; ++i)
                for (int c = 0; c < 3; ++c) g(4 + i, 3 * i + c) = 2.0 * x[3 * i + c];
    };

    // Closed-form discrete multiplier. The momentum rows are the exact
    // (constant) divided differences and the norm rows are x_new + x_old.
    // The Hamiltonian row is the midpoint gradient plus a rank-one secant
    // correction along x_new - x_old, which makes its discrete chain rule
    // exact to rounding while only ever evaluating H at the endpoints and
    // the midpoint. A coordinate-telescoped path would instead pass through
    // states that tear a tight co-moving pair apart and cross the log
    // singularity between two perfectly admissible endpoints.
    sys.analytic_multiplier = [data, inv4pi](double, std::span<const double> x_new,
                                             std::span<const double> x_old, DenseMatrix& lam) {
        const std::size_t n = data.count;
        const std::size_t m = data.norms ? 4 + n : 4;
        lam.assign_zero(m, 3 * n);
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < 3; ++c) lam(static_cast<std::size_t>(c), 3 * i + c) = data.strengths[i];
        if (data.norms)
            for (std::size_t i = 0; i < n; ++i)
                for (int c = 0; c < 3; ++c) lam(4 + i, 3 * i + c) = x_new[3 * i + c] + x_old[3 * i + c];

        std::vector<double> mid(3 * n);
        for (std::size_t k = 0; k < 3 * n; ++k) mid[k] = 0.5 * (x_old[k] + x_new[k]);

        // grad H at the midpoint state
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = &mid[3 * i];
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double* xj = &mid[3 * j];
                const double d = 1.0 - dot3(xi, xj);
                check_pair_distance(d, "multiplier");
                const double w = inv4pi * data.strengths[i] * data.strengths[j] / d;
                for (int c = 0; c < 3; ++c) lam(3, 3 * i + c) += w * xj[c];
            }
        }

        // exact pairwise H difference, then the secant correction
        double dh = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d_old = 1.0 - dot3(&x_old[3 * i], &x_old[3 * j]);
                const double d_new = 1.0 - dot3(&x_new[3 * i], &x_new[3 * j]);
                check_pair_distance(d_old, "multiplier");
                check_pair_distance(d_new, "multiplier");
                dh -= inv4pi * data.strengths[i] * data.strengths[j] *
                      std::log1p((d_new - d_old) / d_old);
            }
        }
        double denom = 0.0;
        double along = 0.0;
        for (std::size_t k = 0; k < 3 * n; ++k) {
            const double dx = x_new[k] - x_old[k];
            denom += dx * dx;
            along += lam(3, k) * dx;
        }
        if (denom > 0.0) {
            const double coeff = (dh - along) / denom;
            for (std::size_t k = 0; k < 3 * n; ++k)
                lam(3, k) += coeff * (x_new[k] - x_old[k]);
        }
    };

    return sys;
}

}  // namespace conservo

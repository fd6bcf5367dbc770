#include <cmath>

#include "conservo/errors.hpp"
#include "conservo/systems.hpp"

namespace conservo {

namespace {

constexpr double kHorizonRel = 1e-12;  // r must exceed r_s * (1 + this)
constexpr double kAxisTol = 1e-12;     // |sin theta| floor

void check_chart(double r_s, double r, double sin_theta, const char* where) {
    if (!(r > r_s * (1.0 + kHorizonRel)))
        throw DomainViolation(std::string("schwarzschild: at or inside horizon in ") + where);
    if (!(std::abs(sin_theta) > kAxisTol))
        throw DomainViolation(std::string("schwarzschild: polar axis singularity in ") + where);
}

// Gauss-Jordan inverse with partial pivoting, sized for the 4x4 metric.
DenseMatrix invert(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    DenseMatrix w = a;
    DenseMatrix inv = DenseMatrix::identity(n);
    const double floor = 1e-14 * max_abs(a);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(w(i, k)) > std::abs(w(piv, k))) piv = i;
        if (std::abs(w(piv, k)) < floor)
            throw SingularMatrix("christoffel_fd_oracle: metric not invertible");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(w(k, j), w(piv, j));
                std::swap(inv(k, j), inv(piv, j));
            }
        }
        const double d = 1.0 / w(k, k);
        for (std::size_t j = 0; j < n; ++j) {
            w(k, j) *= d;
            inv(k, j) *= d;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const double factor = w(i, k);
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                w(i, j) -= factor * w(k, j);
                inv(i, j) -= factor * inv(k, j);
            }
        }
    }
    return inv;
}

}  // namespace

DenseMatrix schwarzschild_metric(const SchwarzschildParams& p, std::span<const double> x) {
    const double r = x[1];
    const double st = std::sin(x[2]);
    const double f = 1.0 - p.r_s / r;
    DenseMatrix g(4, 4);
    g(0, 0) = f;
    g(1, 1) = -1.0 / f;
    g(2, 2) = -r * r;
    g(3, 3) = -r * r * st * st;
    return g;
}

Christoffel christoffel_schwarzschild(const SchwarzschildParams& p, std::span<const double> x) {
    const double rs = p.r_s;
    const double r = x[1];
    const double theta = x[2];
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    check_chart(rs, r, st, "christoffel");

    const double f = 1.0 - rs / r;
    const double half_fp = 0.5 * rs / (r * r);  // f'/2

    Christoffel c;
    c(0, 0, 1) = c(0, 1, 0) = half_fp / f;          // rs / (2 r (r - rs))
    c(1, 0, 0) = f * half_fp;
    c(1, 1, 1) = -half_fp / f;
    c(1, 2, 2) = -r * f;
    c(1, 3, 3) = -r * f * st * st;
    c(2, 1, 2) = c(2, 2, 1) = 1.0 / r;
    c(2, 3, 3) = -st * ct;
    c(3, 1, 3) = c(3, 3, 1) = 1.0 / r;
    c(3, 2, 3) = c(3, 3, 2) = ct / st;
    return c;
}

Christoffel christoffel_fd_oracle(const MetricFn& metric, std::span<const double> x) {
    // dg[j] holds the central difference of the metric along coordinate j.
    DenseMatrix dg[4];
    std::vector<double> xp(x.begin(), x.end());
    for (std::size_t j = 0; j < 4; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
        const double xj = xp[j];
        xp[j] = xj + h;
        DenseMatrix hi = metric(xp);
        xp[j] = xj - h;
        DenseMatrix lo = metric(xp);
        xp[j] = xj;
        dg[j].assign_zero(4, 4);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) dg[j](a, b) = (hi(a, b) - lo(a, b)) / (2.0 * h);
    }
    const DenseMatrix ginv = invert(metric(x));

    Christoffel c;
    for (std::size_t l = 0; l < 4; ++l)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t k = 0; k < 4; ++k) {
                double acc = 0.0;
                for (std::size_t mm = 0; mm < 4; ++mm)
                    acc += ginv(l, mm) * (dg[j](mm, k) + dg[k](mm, j) - dg[mm](j, k));
                c(l, j, k) = 0.5 * acc;
            }
    return c;
}

SystemSpec make_schwarzschild(const SchwarzschildParams& p) {
    if (!(p.r_s > 0.0)) throw InvalidParams("make_schwarzschild: r_s must be positive");
    const double rs = p.r_s;

    SystemSpec sys;
    sys.name = "schwarzschild";
    sys.dim = 8;
    sys.n_conserved = 5;

    sys.in_domain = [rs](std::span<const double> x) {
        return x[1] > rs * (1.0 + kHorizonRel) && std::abs(std::sin(x[2])) > kAxisTol;
    };

    sys.source = [p](double, std::span<const double> x, std::span<double> f) {
        const Christoffel c = christoffel_schwarzschild(p, x.first(4));
        for (int l = 0; l < 4; ++l) f[l] = x[4 + l];
        for (std::size_t l = 0; l < 4; ++l) {
            double acc = 0.0;
            for (std::size_t j = 0; j < 4; ++j)
                for (std::size_t k = 0; k < 4; ++k) acc += c(l, j, k) * x[4 + j] * x[4 + k];
            f[4 + l] = -acc;
        }
    };

    // Conserved along geodesics: the speed g_ij y^i y^j, the energy from
    // the timelike Killing field, and the three angular-momentum components
    // from the rotational Killing fields of the sphere.
    sys.conserved = [rs](double, std::span<const double> x, std::span<double> psi) {
        const double r = x[1];
        const double st = std::sin(x[2]);
        const double ct = std::cos(x[2]);
        const double sp = std::sin(x[3]);
        const double cp = std::cos(x[3]);
        const double tp = x[4], rp = x[5], thp = x[6], php = x[7];
        const double f = 1.0 - rs / r;
        const double r2 = r * r;
        psi[0] = f * tp * tp - rp * rp / f - r2 * thp * thp - r2 * st * st * php * php;
        psi[1] = f * tp;
        psi[2] = r2 * (sp * thp + st * ct * cp * php);
        psi[3] = r2 * (cp * thp - st * ct * sp * php);
        psi[4] = r2 * st * st * php;
    };

    sys.grad_conserved = [rs](double, std::span<const double> x, DenseMatrix& g) {
        const double r = x[1];
        const double st = std::sin(x[2]);
        const double ct = std::cos(x[2]);
        const double c2t = ct * ct - st * st;
        const double sp = std::sin(x[3]);
        const double cp = std::cos(x[3]);
        const double tp = x[4], rp = x[5], thp = x[6], php = x[7];
        const double f = 1.0 - rs / r;
        const double fp = rs / (r * r);
        const double r2 = r * r;
        g.assign_zero(5, 8);
        g(0, 1) = fp * tp * tp + fp * rp * rp / (f * f) - 2.0 * r * thp * thp -
                  2.0 * r * st * st * php * php;
        g(0, 2) = -2.0 * r2 * st * ct * php * php;
        g(0, 4) = 2.0 * f * tp;
        g(0, 5) = -2.0 * rp / f;
        g(0, 6) = -2.0 * r2 * thp;
        g(0, 7) = -2.0 * r2 * st * st * php;
        g(1, 1) = fp * tp;
        g(1, 4) = f;
        g(2, 1) = 2.0 * r * (sp * thp + st * ct * cp * php);
        g(2, 2) = r2 * c2t * cp * php;
        g(2, 3) = r2 * (cp * thp - st * ct * sp * php);
        g(2, 6) = r2 * sp;
        g(2, 7) = r2 * st * ct * cp;
        g(3, 1) = 2.0 * r * (cp * thp - st * ct * sp * php);
        g(3, 2) = -r2 * c2t * sp * php;
        g(3, 3) = r2 * (-sp * thp - st * ct * cp * php);
        g(3, 6) = r2 * cp;
        g(3, 7) = -r2 * st * ct * sp;
        g(4, 1) = 2.0 * r * st * st * php;
        g(4, 2) = 2.0 * r2 * st * ct * php;
        g(4, 7) = r2 * st * st;
    };

    return sys;
}

}  // namespace conservo

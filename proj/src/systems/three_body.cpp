#include <cmath>

#include "conservo/errors.hpp"
#include "conservo/systems.hpp"

namespace conservo {

// Planar restricted three-body problem in the rotating frame. State
// (x1, x2, y1, y2): positions and momenta relative to the two primaries at
// (beta, 0) and (-alpha, 0).

SystemSpec make_three_body(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidParams("make_three_body: alpha must lie in (0,1)");
    const double beta = 1.0 - alpha;
    constexpr double excl2 = 1e-8 * 1e-8;  // exclusion radius around each primary

    SystemSpec sys;
    sys.name = "three_body";
    sys.dim = 4;
    sys.n_conserved = 1;
    sys.in_domain = [alpha, beta](std::span<const double> x) {
        const double d1 = (x[0] - beta) * (x[0] - beta) + x[1] * x[1];
        const double d2 = (x[0] + alpha) * (x[0] + alpha) + x[1] * x[1];
        return d1 > excl2 && d2 > excl2;
    };
    sys.source = [alpha, beta](double, std::span<const double> x, std::span<double> f) {
        const double dx1 = x[0] - beta;
        const double dx2 = x[0] + alpha;
        const double r1sq = dx1 * dx1 + x[1] * x[1];
        const double r2sq = dx2 * dx2 + x[1] * x[1];
        const double inv_r1c = 1.0 / (r1sq * std::sqrt(r1sq));
        const double inv_r2c = 1.0 / (r2sq * std::sqrt(r2sq));
        f[0] = x[2];
        f[1] = x[3];
        f[2] = x[0] + 2.0 * x[3] - alpha * dx1 * inv_r1c - beta * dx2 * inv_r2c;
        f[3] = x[1] - 2.0 * x[2] - alpha * x[1] * inv_r1c - beta * x[1] * inv_r2c;
    };
    sys.conserved = [alpha, beta](double, std::span<const double> x, std::span<double> psi) {
        const double dx1 = x[0] - beta;
        const double dx2 = x[0] + alpha;
        const double r1 = std::sqrt(dx1 * dx1 + x[1] * x[1]);
        const double r2 = std::sqrt(dx2 * dx2 + x[1] * x[1]);
        psi[0] = 0.5 * (x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3]) +
                 alpha / r1 + beta / r2;
    };
    sys.grad_conserved = [alpha, beta](double, std::span<const double> x, DenseMatrix& g) {
        const double dx1 = x[0] - beta;
        const double dx2 = x[0] + alpha;
        const double r1sq = dx1 * dx1 + x[1] * x[1];
        const double r2sq = dx2 * dx2 + x[1] * x[1];
        const double inv_r1c = 1.0 / (r1sq * std::sqrt(r1sq));
        const double inv_r2c = 1.0 / (r2sq * std::sqrt(r2sq));
        g.assign_zero(1, 4);
        g(0, 0) = x[0] - alpha * dx1 * inv_r1c - beta * dx2 * inv_r2c;
        g(0, 1) = x[1] - alpha * x[1] * inv_r1c - beta * x[1] * inv_r2c;
        g(0, 2) = -x[2];
        g(0, 3) = -x[3];
    };
    return sys;
}

}  // namespace conservo

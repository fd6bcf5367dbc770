#include <cmath>

#include "conservo/systems.hpp"

namespace conservo {

// Lorenz system at sigma = 1/3, rho = 400, beta = 0. In this nonchaotic
// parameter regime the dissipative flow carries the time-dependent invariant
//   psi(t, x) = (x^4 - 4/3 x^2 z - 4/9 y^2 - 8/9 x y + 1600/3 x^2) e^{4t/3}.

SystemSpec make_lorenz() {
    constexpr double sigma = 1.0 / 3.0;
    constexpr double rho = 400.0;

    SystemSpec sys;
    sys.name = "lorenz";
    sys.dim = 3;
    sys.n_conserved = 1;
    sys.time_dependent = true;
    sys.source = [](double, std::span<const double> x, std::span<double> f) {
        f[0] = sigma * (x[1] - x[0]);
        f[1] = x[0] * (rho - x[2]) - x[1];
        f[2] = x[0] * x[1];
    };
    sys.conserved = [](double t, std::span<const double> x, std::span<double> psi) {
        const double g = x[0] * x[0] * x[0] * x[0] - (4.0 / 3.0) * x[0] * x[0] * x[2] -
                         (4.0 / 9.0) * x[1] * x[1] - (8.0 / 9.0) * x[0] * x[1] +
                         (1600.0 / 3.0) * x[0] * x[0];
        psi[0] = g * std::exp(4.0 * t / 3.0);
    };
    sys.grad_conserved = [](double t, std::span<const double> x, DenseMatrix& g) {
        const double e = std::exp(4.0 * t / 3.0);
        g.assign_zero(1, 3);
        g(0, 0) = (4.0 * x[0] * x[0] * x[0] - (8.0 / 3.0) * x[0] * x[2] -
                   (8.0 / 9.0) * x[1] + (3200.0 / 3.0) * x[0]) * e;
        g(0, 1) = (-(8.0 / 9.0) * x[1] - (8.0 / 9.0) * x[0]) * e;
        g(0, 2) = -(4.0 / 3.0) * x[0] * x[0] * e;
    };
    return sys;
}

}  // namespace conservo

#include <cmath>

#include "conservo/errors.hpp"
#include "conservo/systems.hpp"

namespace conservo {

SystemSpec make_lv2(const Lv2Params& p) {
    if (!(p.a > 0.0 && p.b > 0.0 && p.c > 0.0 && p.d > 0.0))
        throw InvalidParams("make_lv2: parameters must be positive");

    SystemSpec sys;
    sys.name = "lv2";
    sys.dim = 2;
    sys.n_conserved = 1;
    sys.in_domain = [](std::span<const double> x) { return x[0] > 0.0 && x[1] > 0.0; };
    sys.source = [p](double, std::span<const double> x, std::span<double> f) {
        f[0] = x[0] * (p.a - p.b * x[1]);
        f[1] = x[1] * (p.d * x[0] - p.c);
    };
    sys.conserved = [p](double, std::span<const double> x, std::span<double> psi) {
        psi[0] = p.a * std::log(x[1]) - p.b * x[1] + p.c * std::log(x[0]) - p.d * x[0];
    };
    sys.grad_conserved = [p](double, std::span<const double> x, DenseMatrix& g) {
        g.assign_zero(1, 2);
        g(0, 0) = p.c / x[0] - p.d;
        g(0, 1) = p.a / x[1] - p.b;
    };
    return sys;
}

SystemSpec make_lv3(const Lv3Params& p) {
    const auto& a = p.interaction;
    const auto& d = p.d_diag;
    const auto& eta = p.eta;

    // Structural conditions for the two invariants: D A + A^T D = 0 and
    // eta^T A = 0.
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double v = d[i] * a[3 * i + j] + a[3 * j + i] * d[j];
            if (std::abs(v) > 1e-12)
                throw InvalidParams("make_lv3: D A + A^T D != 0");
        }
        double col = 0.0;
        for (int j = 0; j < 3; ++j) col += eta[j] * a[3 * j + i];
        if (std::abs(col) > 1e-12) throw InvalidParams("make_lv3: eta^T A != 0");
    }

    SystemSpec sys;
    sys.name = "lv3";
    sys.dim = 3;
    sys.n_conserved = 2;
    sys.in_domain = [](std::span<const double> x) {
        return x[0] > 0.0 && x[1] > 0.0 && x[2] > 0.0;
    };
    const std::array<double, 9> A = p.interaction;
    const std::array<double, 3> xi = p.fixed_point;
    sys.source = [A, xi](double, std::span<const double> x, std::span<double> f) {
        for (int i = 0; i < 3; ++i) {
            double acc = 0.0;
            for (int j = 0; j < 3; ++j) acc += A[3 * i + j] * (x[j] - xi[j]);
            f[i] = x[i] * acc;
        }
    };
    const std::array<double, 3> dd = p.d_diag;
    const std::array<double, 3> et = p.eta;
    sys.conserved = [dd, et, xi](double, std::span<const double> x, std::span<double> psi) {
        psi[0] = 0.0;
        double prod = 1.0;
        for (int i = 0; i < 3; ++i) {
            psi[0] += dd[i] * (x[i] - xi[i] * std::log(x[i]));
            prod *= std::pow(x[i], et[i]);
        }
        psi[1] = prod;
    };
    sys.grad_conserved = [dd, et, xi](double, std::span<const double> x, DenseMatrix& g) {
        g.assign_zero(2, 3);
        double prod = 1.0;
        for (int i = 0; i < 3; ++i) prod *= std::pow(x[i], et[i]);
        for (int i = 0; i < 3; ++i) {
            g(0, i) = dd[i] * (1.0 - xi[i] / x[i]);
            g(1, i) = et[i] * prod / x[i];
        }
    };
    return sys;
}

}  // namespace conservo

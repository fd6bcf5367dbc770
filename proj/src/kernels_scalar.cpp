#include "conservo/kernels.hpp"

namespace conservo::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scaled(std::span<double> out, std::span<const double> y, double tau,
                std::span<const double> f) noexcept {
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + tau * f[i];
}

void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> out) noexcept {
    for (std::size_t i = 0; i < rows; ++i)
        out[i] = dot(a.subspan(i * cols, cols), x);
}

void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> g, std::span<double> out) noexcept {
    for (std::size_t j = 0; j < cols; ++j) out[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        axpy(g[i], a.subspan(i * cols, cols), out);
}

void rot(std::span<double> p, std::span<double> q, double c, double s) noexcept {
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double pi = p[i];
        const double qi = q[i];
        p[i] = c * pi - s * qi;
        q[i] = s * pi + c * qi;
    }
}

}  // namespace conservo::kernels::scalar

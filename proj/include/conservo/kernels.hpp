#pragma once

// Dense arithmetic kernels used by the linear-algebra and stepping layers.
// Scalar reference implementations always exist; on x86-64 an AVX2+FMA
// variant of each kernel is selected at runtime when the CPU supports it.
// The two implementations are equivalence-tested against each other.

#include <cstddef>
#include <span>

namespace conservo::kernels {

enum class Isa {
    Scalar,
    Avx2,
};

/// True when the running CPU supports the AVX2+FMA kernel set.
bool avx2_supported() noexcept;

/// Currently dispatched kernel set.
Isa active_isa() noexcept;

/// Override dispatch (testing hook). Requests for an unsupported ISA fall
/// back to scalar.
void force_isa(Isa isa) noexcept;

// --- dispatched entry points -------------------------------------------

/// Inner product a.b (sizes must match).
double dot(std::span<const double> a, std::span<const double> b) noexcept;

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;

/// out = y + tau * f (out may alias y)
void add_scaled(std::span<double> out, std::span<const double> y, double tau,
                std::span<const double> f) noexcept;

/// out = A x with A row-major rows x cols
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> out) noexcept;

/// out = A^T g with A row-major rows x cols
void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> g, std::span<double> out) noexcept;

/// Plane rotation of two equal-length vectors:
/// p' = c*p - s*q,  q' = s*p + c*q
void rot(std::span<double> p, std::span<double> q, double c, double s) noexcept;

// --- named implementations (for equivalence tests) ---------------------

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b) noexcept;
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
void add_scaled(std::span<double> out, std::span<const double> y, double tau,
                std::span<const double> f) noexcept;
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> out) noexcept;
void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> g, std::span<double> out) noexcept;
void rot(std::span<double> p, std::span<double> q, double c, double s) noexcept;
}  // namespace scalar

namespace avx2 {
// Defined only when built for x86-64; call after checking avx2_supported().
double dot(std::span<const double> a, std::span<const double> b) noexcept;
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
void add_scaled(std::span<double> out, std::span<const double> y, double tau,
                std::span<const double> f) noexcept;
void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> out) noexcept;
void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> g, std::span<double> out) noexcept;
void rot(std::span<double> p, std::span<double> q, double c, double s) noexcept;
}  // namespace avx2

}  // namespace conservo::kernels

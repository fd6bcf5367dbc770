#include "conservo/kernels.hpp"

namespace conservo::kernels {

namespace {

struct KernelTable {
    double (*dot)(std::span<const double>, std::span<const double>) noexcept;
    void (*axpy)(double, std::span<const double>, std::span<double>) noexcept;
    void (*add_scaled)(std::span<double>, std::span<const double>, double,
                       std::span<const double>) noexcept;
    void (*gemv)(std::span<const double>, std::size_t, std::size_t,
                 std::span<const double>, std::span<double>) noexcept;
    void (*gemv_t)(std::span<const double>, std::size_t, std::size_t,
                   std::span<const double>, std::span<double>) noexcept;
    void (*rot)(std::span<double>, std::span<double>, double, double) noexcept;
};

constexpr KernelTable kScalarTable = {
    scalar::dot, scalar::axpy, scalar::add_scaled,
    scalar::gemv, scalar::gemv_t, scalar::rot,
};

#if defined(CONSERVO_HAVE_AVX2)
constexpr KernelTable kAvx2Table = {
    avx2::dot, avx2::axpy, avx2::add_scaled,
    avx2::gemv, avx2::gemv_t, avx2::rot,
};
#endif

bool detect_avx2() noexcept {
#if defined(CONSERVO_HAVE_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

struct Dispatch {
    const KernelTable* table;
    Isa isa;
    Dispatch() noexcept {
#if defined(CONSERVO_HAVE_AVX2)
        if (detect_avx2()) {
            table = &kAvx2Table;
            isa = Isa::Avx2;
            return;
        }
#endif
        table = &kScalarTable;
        isa = Isa::Scalar;
    }
};

Dispatch& dispatch() noexcept {
    static Dispatch d;
    return d;
}

}  // namespace

bool avx2_supported() noexcept { return detect_avx2(); }

Isa active_isa() noexcept { return dispatch().isa; }

void force_isa(Isa isa) noexcept {
    Dispatch& d = dispatch();
#if defined(CONSERVO_HAVE_AVX2)
    if (isa == Isa::Avx2 && detect_avx2()) {
        d.table = &kAvx2Table;
        d.isa = Isa::Avx2;
        return;
    }
#else
    (void)isa;
#endif
    d.table = &kScalarTable;
    d.isa = Isa::Scalar;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    return dispatch().table->dot(a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    dispatch().table->axpy(alpha, x, y);
}

void add_scaled(std::span<double> out, std::span<const double> y, double tau,
                std::span<const double> f) noexcept {
    dispatch().table->add_scaled(out, y, tau, f);
}

void gemv(std::span<const double> a, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> out) noexcept {
    dispatch().table->gemv(a, rows, cols, x, out);
}

void gemv_t(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> g, std::span<double> out) noexcept {
    dispatch().table->gemv_t(a, rows, cols, g, out);
}

void rot(std::span<double> p, std::span<double> q, double c, double s) noexcept {
    dispatch().table->rot(p, q, c, s);
}

}  // namespace conservo::kernels

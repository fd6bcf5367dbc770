// AVX2+FMA variants of the dense kernels. This translation unit is compiled
// with -mavx2 -mfma and must only be entered after a runtime CPU check.

#include "conservo/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace conservo::kernels::avx2 {

namespace {

inline double hsum(__m256d v) noexcept {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    const std::size_t n = a.size();
    const double* pa = a.data();
    const double* pb = b.data();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += pa[i] * pb[i];
    return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    const std::size_t n = x.size();
    const double* px = x.data();
    double* py = y.data();
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(py + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i), vy);
        _mm256_storeu_pd(py + i, vy);
    }
    for (; i < n; ++i) py[i] += alpha * px[i];
}

void add_scaled(std::span<double> out, std::span<const double> y, double tau,
                std::span<const double> f) noexcept {
    const std::size_t n = out.size();
    const double* py = y.data();
    const double* pf = f.data();
    double* po = out.data();
    const __m256d vt = _mm256_set1_pd(tau);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_fmadd_pd(vt, _mm256_loadu_pd(pf + i), _mm256_loadu_pd(py + i));
        _mm256_storeu_pd(po + i, v);
    }
    for (; i < n; ++i) po[i] = py[i] + tau * pf[i];
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
    double* pp = p.data();
    double* pq = q.data();
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vp = _mm256_loadu_pd(pp + i);
        const __m256d vq = _mm256_loadu_pd(pq + i);
        _mm256_storeu_pd(pp + i, _mm256_fmsub_pd(vc, vp, _mm256_mul_pd(vs, vq)));
        _mm256_storeu_pd(pq + i, _mm256_fmadd_pd(vs, vp, _mm256_mul_pd(vc, vq)));
    }
    for (; i < n; ++i) {
        const double pi = pp[i];
        const double qi = pq[i];
        pp[i] = c * pi - s * qi;
        pq[i] = s * pi + c * qi;
    }
}

}  // namespace conservo::kernels::avx2

#endif  // x86-64

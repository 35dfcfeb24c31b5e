#include "ufls/kernels.hpp"

#include <cmath>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define UFLS_HAVE_AVX2_BUILD 1
#else
#define UFLS_HAVE_AVX2_BUILD 0
#endif

namespace ufls::kern {

namespace {

#if UFLS_HAVE_AVX2_BUILD

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double sum_avx2(std::span<const double> x) {
    const std::size_t n = x.size();
    const double* p = x.data();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(p + i + 4));
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += p[i];
    return acc;
}

double dot_avx2(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const double* px = x.data();
    const double* py = y.data();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i + 4), _mm256_loadu_pd(py + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += px[i] * py[i];
    return acc;
}

double dot3_avx2(std::span<const double> w, std::span<const double> x,
                 std::span<const double> y) {
    const std::size_t n = w.size();
    const double* pw = w.data();
    const double* px = x.data();
    const double* py = y.data();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d wx0 = _mm256_mul_pd(_mm256_loadu_pd(pw + i), _mm256_loadu_pd(px + i));
        __m256d wx1 = _mm256_mul_pd(_mm256_loadu_pd(pw + i + 4), _mm256_loadu_pd(px + i + 4));
        acc0 = _mm256_fmadd_pd(wx0, _mm256_loadu_pd(py + i), acc0);
        acc1 = _mm256_fmadd_pd(wx1, _mm256_loadu_pd(py + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(pw + i), _mm256_loadu_pd(px + i));
        acc0 = _mm256_fmadd_pd(wx, _mm256_loadu_pd(py + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += pw[i] * px[i] * py[i];
    return acc;
}

double abs_error_sum_avx2(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const double* px = x.data();
    const double* py = y.data();
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d acc0 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i));
        acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(signmask, d));
    }
    double acc = hsum(acc0);
    for (; i < n; ++i) acc += std::fabs(px[i] - py[i]);
    return acc;
}

void axpy_avx2(double a, std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    const double* px = x.data();
    double* py = y.data();
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i));
        _mm256_storeu_pd(py + i, r);
    }
    for (; i < n; ++i) py[i] += a * px[i];
}

std::pair<double, double> minmax_avx2(std::span<const double> x) {
    const std::size_t n = x.size();
    const double* p = x.data();
    if (n < 4) {
        double lo = p[0], hi = p[0];
        for (std::size_t i = 1; i < n; ++i) {
            if (p[i] < lo) lo = p[i];
            if (p[i] > hi) hi = p[i];
        }
        return {lo, hi};
    }
    __m256d vlo = _mm256_loadu_pd(p);
    __m256d vhi = vlo;
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(p + i);
        vlo = _mm256_min_pd(vlo, v);
        vhi = _mm256_max_pd(vhi, v);
    }
    if (i < n) {
        // Re-read the last (overlapping) full lane instead of a scalar tail.
        __m256d v = _mm256_loadu_pd(p + n - 4);
        vlo = _mm256_min_pd(vlo, v);
        vhi = _mm256_max_pd(vhi, v);
    }
    alignas(32) double bl[4], bh[4];
    _mm256_store_pd(bl, vlo);
    _mm256_store_pd(bh, vhi);
    double lo = bl[0], hi = bh[0];
    for (int k = 1; k < 4; ++k) {
        if (bl[k] < lo) lo = bl[k];
        if (bh[k] > hi) hi = bh[k];
    }
    return {lo, hi};
}

const KernelTable kAvx2Table = {
    sum_avx2, dot_avx2, dot3_avx2, abs_error_sum_avx2, axpy_avx2, minmax_avx2,
};

#else // !UFLS_HAVE_AVX2_BUILD

// Non-x86 build: the dispatcher never selects this table, but the symbol
// must exist. Plain scalar bodies keep the TU self-contained.

double sum_fallback(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc;
}
double dot_fallback(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}
double dot3_fallback(std::span<const double> w, std::span<const double> x,
                     std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i] * y[i];
    return acc;
}
double abs_error_sum_fallback(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::fabs(x[i] - y[i]);
    return acc;
}
void axpy_fallback(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}
std::pair<double, double> minmax_fallback(std::span<const double> x) {
    double lo = x[0], hi = x[0];
    for (double v : x.subspan(1)) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    return {lo, hi};
}

const KernelTable kAvx2Table = {
    sum_fallback, dot_fallback, dot3_fallback, abs_error_sum_fallback,
    axpy_fallback, minmax_fallback,
};

#endif

} // namespace

const KernelTable& detail_avx2_table() { return kAvx2Table; }

} // namespace ufls::kern

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>

// Dense reduction kernels used by the training and statistics code paths.
// Every kernel has a scalar reference implementation and an AVX2 variant;
// the active variant is picked once at startup from cpuid and can be
// overridden with the UFLS_KERNELS environment variable ("scalar"/"avx2")
// or set_backend(). SIMD results may differ from scalar in the last few
// ulps (reassociated sums, FMA); the equivalence tests pin the tolerance.

namespace ufls::kern {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_available(Backend b);
// Throws ufls::Error(Config) when the backend is not available on this CPU.
void set_backend(Backend b);
std::string backend_name(Backend b);

// sum(x) = sum_i x[i]
double sum(std::span<const double> x);
// dot(x, y) = sum_i x[i]*y[i]
double dot(std::span<const double> x, std::span<const double> y);
// dot3(w, x, y) = sum_i w[i]*x[i]*y[i]  (weighted Gram entries)
double dot3(std::span<const double> w, std::span<const double> x,
            std::span<const double> y);
// abs_error_sum(x, y) = sum_i |x[i]-y[i]|
double abs_error_sum(std::span<const double> x, std::span<const double> y);
// y[i] += a*x[i]
void axpy(double a, std::span<const double> x, std::span<double> y);
// (min_i x[i], max_i x[i]); x must be nonempty
std::pair<double, double> minmax(std::span<const double> x);

// Implementation tables (one entry per kernel); exposed so the AVX2
// translation unit can register itself and tests can reach both variants.
struct KernelTable {
    double (*sum)(std::span<const double>);
    double (*dot)(std::span<const double>, std::span<const double>);
    double (*dot3)(std::span<const double>, std::span<const double>,
                   std::span<const double>);
    double (*abs_error_sum)(std::span<const double>, std::span<const double>);
    void (*axpy)(double, std::span<const double>, std::span<double>);
    std::pair<double, double> (*minmax)(std::span<const double>);
};

const KernelTable& table(Backend b);

} // namespace ufls::kern

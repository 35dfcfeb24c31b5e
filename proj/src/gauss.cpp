#include "ufls/gauss.hpp"

#include <cmath>

namespace ufls {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178; // log(sqrt(2*pi))
constexpr double kInvSqrt2 = 0.70710678118654752440;

// 1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8, the tail series of -x*cdf(x)/pdf(x).
double tail_series(double x) {
    const double ix2 = 1.0 / (x * x);
    return 1.0 + ix2 * (-1.0 + ix2 * (3.0 + ix2 * (-15.0 + ix2 * 105.0)));
}
} // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_norm_cdf(double x) {
    if (x >= -20.0) return std::log(norm_cdf(x));
    // Asymptotic expansion; erfc underflows further down the tail.
    return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) + std::log(tail_series(x));
}

double inv_mills(double x) {
    if (x >= -20.0) return norm_pdf(x) / norm_cdf(x);
    return -x / tail_series(x);
}

} // namespace ufls

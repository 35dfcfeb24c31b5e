#include "ufls/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

#include "ufls/errors.hpp"

namespace ufls::kern {

// Defined in kernels_avx2.cpp (that TU alone is compiled with -mavx2 -mfma).
const KernelTable& detail_avx2_table();

namespace {

double sum_scalar(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc;
}

double dot_scalar(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

double dot3_scalar(std::span<const double> w, std::span<const double> x,
                   std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i] * y[i];
    return acc;
}

double abs_error_sum_scalar(std::span<const double> x, std::span<const double> y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::fabs(x[i] - y[i]);
    return acc;
}

void axpy_scalar(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

std::pair<double, double> minmax_scalar(std::span<const double> x) {
    double lo = x[0], hi = x[0];
    for (double v : x.subspan(1)) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    return {lo, hi};
}

const KernelTable kScalarTable = {
    sum_scalar, dot_scalar, dot3_scalar, abs_error_sum_scalar, axpy_scalar,
    minmax_scalar,
};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* resolve(Backend b) {
    if (b == Backend::Avx2) return &detail_avx2_table();
    return &kScalarTable;
}

Backend pick_initial_backend() {
    if (const char* env = std::getenv("UFLS_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::Avx2;
        // Unknown or unavailable value: fall through to autodetect.
    }
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

Backend g_backend = pick_initial_backend();
const KernelTable* g_active = resolve(g_backend);

} // namespace

Backend active_backend() { return g_backend; }

bool backend_available(Backend b) {
    return b == Backend::Scalar || (b == Backend::Avx2 && cpu_has_avx2());
}

void set_backend(Backend b) {
    if (!backend_available(b))
        throw Error(ErrorClass::Config, "BackendUnavailable",
                    "kernel backend '" + backend_name(b) + "' is not supported on this CPU");
    g_backend = b;
    g_active = resolve(b);
}

std::string backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

const KernelTable& table(Backend b) {
    if (!backend_available(b))
        throw Error(ErrorClass::Config, "BackendUnavailable",
                    "kernel backend '" + backend_name(b) + "' is not supported on this CPU");
    return *resolve(b);
}

double sum(std::span<const double> x) { return g_active->sum(x); }
double dot(std::span<const double> x, std::span<const double> y) {
    return g_active->dot(x, y);
}
double dot3(std::span<const double> w, std::span<const double> x,
            std::span<const double> y) {
    return g_active->dot3(w, x, y);
}
double abs_error_sum(std::span<const double> x, std::span<const double> y) {
    return g_active->abs_error_sum(x, y);
}
void axpy(double a, std::span<const double> x, std::span<double> y) {
    g_active->axpy(a, x, y);
}
std::pair<double, double> minmax(std::span<const double> x) {
    return g_active->minmax(x);
}

} // namespace ufls::kern

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ufls/features.hpp"

namespace ufls {

struct LogisticFit {
    // beta[0] is the intercept, beta[1+j] multiplies feature j; coefficients
    // are on the original (unstandardized) feature scale.
    std::vector<double> beta;
    bool converged = false;
    // The classes were perfectly separable; beta comes from the
    // L2-regularized (lambda = 1e-6) fallback fit.
    bool separated = false;
    double loglik = 0.0;
    int iterations = 0;
};

// Maximum-likelihood logistic regression via Newton iterations on
// internally standardized features. Stops when the gradient infinity norm
// drops below 1e-8 or after 100 iterations. Throws SingleClass when z is
// constant.
LogisticFit fit_logistic(const FeatureColumns& x,
                         std::span<const std::uint8_t> z);

// Binary log-likelihood and its gradient at arbitrary coefficients, exposed
// for the finite-difference test oracles.
double logistic_loglik(std::span<const double> beta, const FeatureColumns& x,
                       std::span<const std::uint8_t> z);
std::vector<double> logistic_grad(std::span<const double> beta,
                                  const FeatureColumns& x,
                                  std::span<const std::uint8_t> z);

} // namespace ufls

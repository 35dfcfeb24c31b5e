#pragma once

#include <span>
#include <vector>

#include "ufls/dataset.hpp"
#include "ufls/features.hpp"

namespace ufls {

// Censored-at-zero linear Gaussian model. Prediction uses the deterministic
// truncation rule max(0, alpha-form); sigma is the fitted noise scale.
struct TobitModel {
    std::vector<double> alpha; // alpha[0] intercept
    double sigma = 1.0;        // MW
    double loglik = 0.0;
    bool converged = false;
    // No censored rows were present; the fit degenerated to OLS with
    // sigma^2 = SSR/n.
    bool none_censored = false;
};

// Censored Gaussian maximum likelihood: rows with y > 0 contribute the
// normal density of the residual, rows with y == 0 the normal CDF of the
// negative standardized mean. The objective is optimized by Newton ascent in
// the concave reparameterization (gamma = alpha/sigma, h = 1/sigma),
// initialized from OLS on the uncensored rows, until the gradient infinity
// norm drops below 1e-8. Throws AllCensored when no positive labels exist;
// a dataset without censored rows returns the OLS solution flagged
// none_censored.
TobitModel fit_tobit(const Dataset& train);

// max(0, alpha-form); a non-positive linear form maps to exactly 0.0.
double predict_tobit(const TobitModel& model, std::span<const double> features);

// Log-likelihood and analytic gradient in the (gamma, h) parameterization
// (theta = [gamma_0..gamma_p, h]), exposed for the finite-difference oracles.
double tobit_loglik(std::span<const double> theta, const FeatureColumns& x,
                    std::span<const double> y);
std::vector<double> tobit_grad(std::span<const double> theta,
                               const FeatureColumns& x,
                               std::span<const double> y);

} // namespace ufls

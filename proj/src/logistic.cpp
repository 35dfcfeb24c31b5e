#include "ufls/logistic.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ufls/errors.hpp"
#include "ufls/kernels.hpp"

namespace ufls {

namespace {

double softplus(double eta) {
    return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double loglik_from_eta(std::span<const double> eta,
                       std::span<const std::uint8_t> z) {
    double ll = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i)
        ll += (z[i] ? eta[i] : 0.0) - softplus(eta[i]);
    return ll;
}

struct NewtonResult {
    std::vector<double> beta; // standardized scale
    bool converged = false;
    bool separation_suspected = false;
    int iterations = 0;
};

// Newton ascent of the (optionally ridge-penalized) log-likelihood on
// standardized features. `sx` has unit-variance columns; beta includes the
// intercept at index 0.
NewtonResult newton_logistic(const FeatureColumns& sx,
                             std::span<const std::uint8_t> z, double lambda,
                             int max_iter) {
    const std::size_t n = sx.n;
    const std::size_t p = sx.p();
    NewtonResult res;
    res.beta.assign(p + 1, 0.0);

    std::vector<double> pvec(n), w(n), resid(n);
    Eigen::MatrixXd hess(p + 1, p + 1);
    Eigen::VectorXd grad(p + 1), delta(p + 1);

    auto objective = [&](std::span<const double> beta) {
        const std::vector<double> eta = affine_eval(sx, beta);
        double pen = 0.0;
        for (double b : beta) pen += b * b;
        return loglik_from_eta(eta, z) - 0.5 * lambda * pen;
    };

    double obj = objective(res.beta);
    for (int iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter + 1;
        const std::vector<double> eta = affine_eval(sx, res.beta);
        bool all_correct = true;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = eta[i];
            const double pr = 1.0 / (1.0 + std::exp(-e));
            pvec[i] = pr;
            w[i] = pr * (1.0 - pr);
            resid[i] = static_cast<double>(z[i]) - pr;
            if ((e >= 0.0) != (z[i] != 0)) all_correct = false;
        }

        grad(0) = kern::sum(resid) - lambda * res.beta[0];
        for (std::size_t j = 0; j < p; ++j)
            grad(1 + j) = kern::dot(resid, sx.col(j)) - lambda * res.beta[1 + j];

        // A growing coefficient vector that classifies everything correctly
        // means the classes are separable and the unpenalized optimum is at
        // infinity; checked before the gradient test because the gradient
        // also vanishes along that ray.
        double beta_norm = 0.0;
        for (double b : res.beta) beta_norm = std::max(beta_norm, std::fabs(b));
        if (lambda == 0.0 && all_correct && beta_norm > 15.0) {
            res.separation_suspected = true;
            return res;
        }

        if (grad.lpNorm<Eigen::Infinity>() < 1e-8) {
            res.converged = true;
            return res;
        }

        hess(0, 0) = kern::sum(w) + lambda;
        for (std::size_t j = 0; j < p; ++j) {
            const double v = kern::dot(w, sx.col(j));
            hess(0, 1 + j) = v;
            hess(1 + j, 0) = v;
        }
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = j; k < p; ++k) {
                const double v = kern::dot3(w, sx.col(j), sx.col(k)) +
                                 (j == k ? lambda : 0.0);
                hess(1 + j, 1 + k) = v;
                hess(1 + k, 1 + j) = v;
            }

        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        if (ldlt.info() != Eigen::Success) {
            hess.diagonal().array() += 1e-10 * (1.0 + hess.diagonal().maxCoeff());
            ldlt.compute(hess);
        }
        delta = ldlt.solve(grad);

        // Backtracking line search on the penalized objective.
        double scale = 1.0;
        std::vector<double> trial(p + 1);
        bool improved = false;
        for (int half = 0; half < 40; ++half) {
            for (std::size_t j = 0; j <= p; ++j)
                trial[j] = res.beta[j] + scale * delta(j);
            const double trial_obj = objective(trial);
            if (trial_obj > obj) {
                res.beta = trial;
                obj = trial_obj;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) {
            // No ascent direction left at this precision.
            if (lambda == 0.0 && all_correct) res.separation_suspected = true;
            return res;
        }
    }
    // Iteration cap reached; flag separable-looking data.
    const std::vector<double> eta = affine_eval(sx, res.beta);
    bool all_correct = true;
    for (std::size_t i = 0; i < n; ++i)
        if ((eta[i] >= 0.0) != (z[i] != 0)) all_correct = false;
    if (lambda == 0.0 && all_correct) res.separation_suspected = true;
    return res;
}

} // namespace

LogisticFit fit_logistic(const FeatureColumns& x,
                         std::span<const std::uint8_t> z) {
    const std::size_t n = x.n;
    const std::size_t p = x.p();
    if (n == 0 || z.size() != n)
        throw Error(ErrorClass::Training, "LengthMismatch",
                    "labels do not match the feature matrix");
    bool any0 = false, any1 = false;
    for (std::uint8_t v : z) (v ? any1 : any0) = true;
    if (!any0 || !any1)
        throw Error(ErrorClass::Training, "SingleClass",
                    "logistic regression needs both classes present");

    // Standardize columns; constant columns keep scale 1 and get coefficient
    // 0 by construction.
    std::vector<double> mean(p), scale(p);
    FeatureColumns sx;
    sx.n = n;
    sx.cols.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        mean[j] = kern::sum(x.col(j)) / static_cast<double>(n);
        std::vector<double>& c = sx.cols[j];
        c.resize(n);
        for (std::size_t i = 0; i < n; ++i) c[i] = x.cols[j][i] - mean[j];
        const double var = kern::dot(c, c) / static_cast<double>(n);
        scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
        for (double& v : c) v /= scale[j];
    }

    NewtonResult nr = newton_logistic(sx, z, 0.0, 100);
    LogisticFit fit;
    if (nr.separation_suspected) {
        nr = newton_logistic(sx, z, 1e-6, 200);
        fit.separated = true;
    }
    fit.converged = nr.converged;
    fit.iterations = nr.iterations;

    // Destandardize: eta = b0 + sum_j bj*(x_j - mu_j)/s_j.
    fit.beta.assign(p + 1, 0.0);
    fit.beta[0] = nr.beta[0];
    for (std::size_t j = 0; j < p; ++j) {
        fit.beta[1 + j] = nr.beta[1 + j] / scale[j];
        fit.beta[0] -= nr.beta[1 + j] * mean[j] / scale[j];
    }
    fit.loglik = logistic_loglik(fit.beta, x, z);
    return fit;
}

double logistic_loglik(std::span<const double> beta, const FeatureColumns& x,
                       std::span<const std::uint8_t> z) {
    const std::vector<double> eta = affine_eval(x, beta);
    return loglik_from_eta(eta, z);
}

std::vector<double> logistic_grad(std::span<const double> beta,
                                  const FeatureColumns& x,
                                  std::span<const std::uint8_t> z) {
    const std::vector<double> eta = affine_eval(x, beta);
    std::vector<double> resid(x.n);
    for (std::size_t i = 0; i < x.n; ++i)
        resid[i] = static_cast<double>(z[i]) - 1.0 / (1.0 + std::exp(-eta[i]));
    std::vector<double> g(x.p() + 1);
    g[0] = kern::sum(resid);
    for (std::size_t j = 0; j < x.p(); ++j) g[1 + j] = kern::dot(resid, x.col(j));
    return g;
}

} // namespace ufls

#include "ufls/tobit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ufls/errors.hpp"
#include "ufls/gauss.hpp"
#include "ufls/kernels.hpp"
#include "ufls/tree.hpp"

namespace ufls {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
} // namespace

double tobit_loglik(std::span<const double> theta, const FeatureColumns& x,
                    std::span<const double> y) {
    const std::size_t p = x.p();
    const double h = theta[p + 1];
    if (!(h > 0.0)) return -std::numeric_limits<double>::infinity();
    const std::vector<double> form = affine_eval(x, theta.first(p + 1));
    double ll = 0.0;
    const double log_h = std::log(h);
    for (std::size_t i = 0; i < x.n; ++i) {
        if (y[i] > 0.0) {
            const double e = h * y[i] - form[i];
            ll += log_h - 0.5 * e * e - kLogSqrt2Pi;
        } else {
            ll += log_norm_cdf(-form[i]);
        }
    }
    return ll;
}

std::vector<double> tobit_grad(std::span<const double> theta,
                               const FeatureColumns& x,
                               std::span<const double> y) {
    const std::size_t p = x.p();
    const std::size_t n = x.n;
    const double h = theta[p + 1];
    const std::vector<double> form = affine_eval(x, theta.first(p + 1));

    // Per-row gamma-gradient weight: e_i for uncensored rows,
    // -invmills(-form_i) for censored ones.
    std::vector<double> g(n);
    double dh = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (y[i] > 0.0) {
            const double e = h * y[i] - form[i];
            g[i] = e;
            dh += 1.0 / h - e * y[i];
        } else {
            g[i] = -inv_mills(-form[i]);
        }
    }
    std::vector<double> grad(p + 2);
    grad[0] = kern::sum(g);
    for (std::size_t j = 0; j < p; ++j) grad[1 + j] = kern::dot(g, x.col(j));
    grad[p + 1] = dh;
    return grad;
}

namespace {

struct TobitProblem {
    const FeatureColumns& x;
    std::span<const double> y;

    // Newton ascent in theta = (gamma, h); the objective is concave, so
    // plain backtracking suffices.
    void newton(std::vector<double>& theta, bool& converged) const {
        const std::size_t p = x.p();
        const std::size_t n = x.n;
        const std::size_t dim = p + 2;
        Eigen::MatrixXd hess(dim, dim);
        Eigen::VectorXd rhs(dim), delta(dim);
        std::vector<double> w(n), v(n);

        double obj = tobit_loglik(theta, x, y);
        converged = false;
        int full_steps = 0;
        for (int iter = 0; iter < 200; ++iter) {
            const std::vector<double> grad = tobit_grad(theta, x, y);
            double gmax = 0.0;
            for (double gv : grad) gmax = std::max(gmax, std::fabs(gv));
            if (gmax < 1e-8) {
                converged = true;
                return;
            }

            const double h = theta[p + 1];
            const std::vector<double> form = affine_eval(x, std::span<const double>(theta).first(p + 1));
            double hh = 0.0;
            std::size_t n_unc = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (y[i] > 0.0) {
                    w[i] = 1.0;
                    v[i] = y[i];
                    hh += -y[i] * y[i];
                    ++n_unc;
                } else {
                    const double s = -form[i];
                    const double lam = inv_mills(s);
                    w[i] = lam * (s + lam); // -d(lambda)/ds, >= 0
                    v[i] = 0.0;
                }
            }
            hh -= static_cast<double>(n_unc) / (h * h);

            // hess = d2l/dtheta2 (negative semidefinite).
            hess(0, 0) = -kern::sum(w);
            for (std::size_t j = 0; j < p; ++j) {
                const double val = -kern::dot(w, x.col(j));
                hess(0, 1 + j) = val;
                hess(1 + j, 0) = val;
            }
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t k = j; k < p; ++k) {
                    const double val = -kern::dot3(w, x.col(j), x.col(k));
                    hess(1 + j, 1 + k) = val;
                    hess(1 + k, 1 + j) = val;
                }
            hess(0, p + 1) = hess(p + 1, 0) = kern::sum(v);
            for (std::size_t j = 0; j < p; ++j) {
                const double val = kern::dot(v, x.col(j));
                hess(1 + j, p + 1) = val;
                hess(p + 1, 1 + j) = val;
            }
            hess(p + 1, p + 1) = hh;

            Eigen::VectorXd g(dim);
            for (std::size_t j = 0; j < dim; ++j) g(j) = grad[j];
            Eigen::LDLT<Eigen::MatrixXd> ldlt(-hess);
            if (ldlt.info() != Eigen::Success) {
                Eigen::MatrixXd reg = -hess;
                reg.diagonal().array() += 1e-10 * (1.0 + reg.diagonal().maxCoeff());
                ldlt.compute(reg);
            }
            delta = ldlt.solve(g);

            double scale = 1.0;
            bool improved = false;
            std::vector<double> trial(dim);
            for (int half = 0; half < 50; ++half) {
                for (std::size_t j = 0; j < dim; ++j)
                    trial[j] = theta[j] + scale * delta(j);
                if (trial[p + 1] > 1e-12) {
                    const double t_obj = tobit_loglik(trial, x, y);
                    if (t_obj > obj) {
                        theta = trial;
                        obj = t_obj;
                        improved = true;
                        break;
                    }
                }
                scale *= 0.5;
            }
            if (!improved) {
                // Near the optimum the per-step gain sinks below the
                // floating-point resolution of the objective and the line
                // search cannot confirm ascent. The objective is concave, so
                // a full Newton step from a small-gradient point contracts;
                // take it and let the gradient test terminate.
                if (gmax < 1e-3 && full_steps < 10) {
                    ++full_steps;
                    for (std::size_t j = 0; j < dim; ++j) trial[j] = theta[j] + delta(j);
                    if (trial[p + 1] > 1e-12) {
                        theta = trial;
                        obj = tobit_loglik(theta, x, y);
                        continue;
                    }
                }
                return; // stalled at numerical precision
            }
        }
    }
};

// Plain OLS over all rows; returns (alpha, sigma = sqrt(SSR/n)).
std::pair<std::vector<double>, double> ols_with_sigma(const FeatureColumns& x,
                                                      std::span<const double> y) {
    std::vector<double> yv(y.begin(), y.end());
    const LeafFit fit = fit_leaf_ols(x, yv);
    const std::vector<double> pred = affine_eval(x, fit.alpha);
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
        const double r = pred[i] - y[i];
        ssr += r * r;
    }
    const double sigma = std::sqrt(std::max(ssr / static_cast<double>(x.n), 1e-12));
    return {fit.alpha, sigma};
}

} // namespace

TobitModel fit_tobit(const Dataset& train) {
    if (train.empty())
        throw Error(ErrorClass::Training, "EmptyDataset",
                    "cannot fit the censored model on an empty dataset");
    const FeatureColumns x = FeatureColumns::from_dataset(train);
    const std::vector<double> y = train.labels();
    const std::size_t p = x.p();

    std::vector<std::uint32_t> unc_rows;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] > 0.0) unc_rows.push_back(static_cast<std::uint32_t>(i));

    if (unc_rows.empty())
        throw Error(ErrorClass::Training, "AllCensored",
                    "every label is censored at zero; the scale is unidentifiable");

    TobitModel model;
    if (unc_rows.size() == y.size()) {
        // No censoring: the likelihood is plain Gaussian regression.
        auto [alpha, sigma] = ols_with_sigma(x, y);
        model.alpha = std::move(alpha);
        model.sigma = sigma;
        model.none_censored = true;
        model.converged = true;
        std::vector<double> theta(p + 2);
        for (std::size_t j = 0; j <= p; ++j) theta[j] = model.alpha[j] / model.sigma;
        theta[p + 1] = 1.0 / model.sigma;
        model.loglik = tobit_loglik(theta, x, y);
        return model;
    }

    // Standardize the features for the Newton solve; the Hessian is badly
    // conditioned on raw MW/MWs scales.
    std::vector<double> mean(p), scale(p);
    FeatureColumns sx;
    sx.n = x.n;
    sx.cols.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        mean[j] = kern::sum(x.col(j)) / static_cast<double>(x.n);
        std::vector<double>& c = sx.cols[j];
        c.resize(x.n);
        for (std::size_t i = 0; i < x.n; ++i) c[i] = x.cols[j][i] - mean[j];
        const double var = kern::dot(c, c) / static_cast<double>(x.n);
        scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
        for (double& v : c) v /= scale[j];
    }

    // Initialize from OLS on the uncensored rows.
    std::vector<std::uint32_t> unc_local = unc_rows;
    const FeatureColumns sx_unc = sx.gather(unc_local);
    std::vector<double> y_unc;
    y_unc.reserve(unc_rows.size());
    for (std::uint32_t i : unc_rows) y_unc.push_back(y[i]);
    auto [alpha0, sigma0] = ols_with_sigma(sx_unc, y_unc);
    sigma0 = std::max(sigma0, 1e-6);

    std::vector<double> theta(p + 2);
    for (std::size_t j = 0; j <= p; ++j) theta[j] = alpha0[j] / sigma0;
    theta[p + 1] = 1.0 / sigma0;

    TobitProblem prob{sx, y};
    bool converged = false;
    prob.newton(theta, converged);

    model.converged = converged;
    model.sigma = 1.0 / theta[p + 1];
    // Destandardize: gamma_j = gamma_std_j / scale_j, fold the means into
    // the intercept.
    model.alpha.assign(p + 1, 0.0);
    model.alpha[0] = theta[0] * model.sigma;
    for (std::size_t j = 0; j < p; ++j) {
        model.alpha[1 + j] = theta[1 + j] * model.sigma / scale[j];
        model.alpha[0] -= theta[1 + j] * model.sigma * mean[j] / scale[j];
    }
    {
        std::vector<double> theta_orig(p + 2);
        for (std::size_t j = 0; j <= p; ++j)
            theta_orig[j] = model.alpha[j] / model.sigma;
        theta_orig[p + 1] = 1.0 / model.sigma;
        model.loglik = tobit_loglik(theta_orig, x, y);
    }
    return model;
}

double predict_tobit(const TobitModel& model, std::span<const double> features) {
    const double form = affine_eval_row(model.alpha, features);
    return form > 0.0 ? form : 0.0;
}

} // namespace ufls

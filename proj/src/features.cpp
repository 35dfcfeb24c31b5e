#include "ufls/features.hpp"

#include "ufls/kernels.hpp"

namespace ufls {

FeatureColumns FeatureColumns::from_dataset(const Dataset& ds) {
    FeatureColumns x;
    x.n = ds.size();
    for (std::size_t j = 0; j < kNumFeatures; ++j) x.cols.push_back(ds.column(j));
    return x;
}

FeatureColumns FeatureColumns::gather(std::span<const std::uint32_t> rows) const {
    FeatureColumns out;
    out.n = rows.size();
    out.cols.resize(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.cols[j].reserve(rows.size());
        for (std::uint32_t i : rows) out.cols[j].push_back(cols[j][i]);
    }
    return out;
}

std::vector<double> FeatureColumns::row(std::size_t i) const {
    std::vector<double> out(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) out[j] = cols[j][i];
    return out;
}

std::vector<double> affine_eval(const FeatureColumns& x,
                                std::span<const double> coeffs) {
    std::vector<double> eta(x.n, coeffs[0]);
    for (std::size_t j = 0; j < x.p(); ++j)
        kern::axpy(coeffs[1 + j], x.col(j), eta);
    return eta;
}

double affine_eval_row(std::span<const double> coeffs,
                       std::span<const double> features) {
    double v = coeffs[0];
    for (std::size_t j = 0; j < features.size(); ++j)
        v += coeffs[1 + j] * features[j];
    return v;
}

} // namespace ufls

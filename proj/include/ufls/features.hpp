#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ufls/dataset.hpp"

namespace ufls {

// Column-major feature storage (no intercept column) shared by the fitting
// code. Columns are contiguous so the reduction kernels can stream them.
struct FeatureColumns {
    std::size_t n = 0;
    std::vector<std::vector<double>> cols;

    std::size_t p() const { return cols.size(); }
    std::span<const double> col(std::size_t j) const { return cols[j]; }

    static FeatureColumns from_dataset(const Dataset& ds);

    // Row subset in the given order.
    FeatureColumns gather(std::span<const std::uint32_t> rows) const;

    // Feature vector of row i.
    std::vector<double> row(std::size_t i) const;
};

// eta[i] = coeffs[0] + sum_j coeffs[1+j] * X[i][j]
std::vector<double> affine_eval(const FeatureColumns& x,
                                std::span<const double> coeffs);
double affine_eval_row(std::span<const double> coeffs,
                       std::span<const double> features);

} // namespace ufls

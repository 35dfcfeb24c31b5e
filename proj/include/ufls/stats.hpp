#pragma once

#include <span>
#include <string>
#include <vector>

#include "ufls/dataset.hpp"

namespace ufls {

// Sample Pearson correlation coefficient. Throws ZeroVariance when either
// column is constant.
double pearson(std::span<const double> a, std::span<const double> b);

// Mean absolute error. Throws LengthMismatch / EmptyDataset.
double mean_abs_error(std::span<const double> predictions,
                      std::span<const double> labels);

// Percentage confusion matrix over a shared class alphabet: cell (i, j) is
// 100 * count(true == class_i && predicted == class_j) / n, so the diagonal
// sums to the overall accuracy in percent.
struct ConfusionMatrix {
    std::vector<int> classes;              // sorted union of observed ids
    std::vector<std::vector<double>> pct;  // classes x classes
    double accuracy_pct = 0.0;             // trace

    std::string to_string() const;         // 2-decimal rendering
};

ConfusionMatrix confusion_matrix(std::span<const int> true_ids,
                                 std::span<const int> predicted_ids);

// 5x5 symmetric correlation matrix over (h, k, p, r, y), exportable as CSV.
struct CorrelationMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> r;
};

CorrelationMatrix correlation_matrix(const Dataset& ds);
void write_correlation_csv(const CorrelationMatrix& m, const std::string& path);

} // namespace ufls

#include "ufls/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ufls/errors.hpp"
#include "ufls/kernels.hpp"

namespace ufls {

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorClass::Data, "LengthMismatch",
                    "pearson requires equally sized columns");
    if (a.size() < 2)
        throw Error(ErrorClass::Data, "ZeroVariance",
                    "pearson needs at least two observations");
    const double n = static_cast<double>(a.size());
    const double mean_a = kern::sum(a) / n;
    const double mean_b = kern::sum(b) / n;

    std::vector<double> da(a.size()), db(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        da[i] = a[i] - mean_a;
        db[i] = b[i] - mean_b;
    }
    const double ss_a = kern::dot(da, da);
    const double ss_b = kern::dot(db, db);
    if (ss_a <= 0.0 || ss_b <= 0.0)
        throw Error(ErrorClass::Data, "ZeroVariance",
                    "pearson is undefined for a constant column");
    return kern::dot(da, db) / std::sqrt(ss_a * ss_b);
}

double mean_abs_error(std::span<const double> predictions,
                      std::span<const double> labels) {
    if (predictions.size() != labels.size())
        throw Error(ErrorClass::Data, "LengthMismatch",
                    "prediction and label vectors differ in length");
    if (predictions.empty())
        throw Error(ErrorClass::Data, "EmptyDataset",
                    "mean absolute error of an empty vector is undefined");
    return kern::abs_error_sum(predictions, labels) /
           static_cast<double>(predictions.size());
}

ConfusionMatrix confusion_matrix(std::span<const int> true_ids,
                                 std::span<const int> predicted_ids) {
    if (true_ids.size() != predicted_ids.size())
        throw Error(ErrorClass::Data, "LengthMismatch",
                    "true and predicted id vectors differ in length");
    if (true_ids.empty())
        throw Error(ErrorClass::Data, "EmptyDataset", "no observations");

    ConfusionMatrix m;
    for (int c : true_ids) m.classes.push_back(c);
    for (int c : predicted_ids) m.classes.push_back(c);
    std::sort(m.classes.begin(), m.classes.end());
    m.classes.erase(std::unique(m.classes.begin(), m.classes.end()),
                    m.classes.end());

    std::map<int, std::size_t> index;
    for (std::size_t i = 0; i < m.classes.size(); ++i) index[m.classes[i]] = i;

    std::vector<std::vector<std::size_t>> counts(
        m.classes.size(), std::vector<std::size_t>(m.classes.size(), 0));
    for (std::size_t i = 0; i < true_ids.size(); ++i)
        ++counts[index[true_ids[i]]][index[predicted_ids[i]]];

    const double n = static_cast<double>(true_ids.size());
    m.pct.assign(m.classes.size(), std::vector<double>(m.classes.size(), 0.0));
    for (std::size_t i = 0; i < m.classes.size(); ++i)
        for (std::size_t j = 0; j < m.classes.size(); ++j)
            m.pct[i][j] = 100.0 * static_cast<double>(counts[i][j]) / n;
    for (std::size_t i = 0; i < m.classes.size(); ++i)
        m.accuracy_pct += m.pct[i][i];
    return m;
}

std::string ConfusionMatrix::to_string() const {
    std::ostringstream os;
    os << "true\\pred";
    for (int c : classes) os << "\tL" << c;
    os << "\n";
    char buf[32];
    for (std::size_t i = 0; i < classes.size(); ++i) {
        os << "L" << classes[i];
        for (std::size_t j = 0; j < classes.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.2f", pct[i][j]);
            os << '\t' << buf << '%';
        }
        os << "\n";
    }
    std::snprintf(buf, sizeof buf, "%.2f", accuracy_pct);
    os << "overall accuracy " << buf << "%\n";
    return os.str();
}

CorrelationMatrix correlation_matrix(const Dataset& ds) {
    CorrelationMatrix m;
    m.names = {"h", "k", "p", "r", "y"};
    std::vector<std::vector<double>> cols;
    for (std::size_t j = 0; j < m.names.size(); ++j) cols.push_back(ds.column(j));
    m.r.assign(m.names.size(), std::vector<double>(m.names.size(), 1.0));
    for (std::size_t i = 0; i < m.names.size(); ++i)
        for (std::size_t j = i + 1; j < m.names.size(); ++j)
            m.r[i][j] = m.r[j][i] = pearson(cols[i], cols[j]);
    return m;
}

void write_correlation_csv(const CorrelationMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "' for writing");
    for (const std::string& n : m.names) out << ',' << n;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < m.names.size(); ++i) {
        out << m.names[i];
        for (std::size_t j = 0; j < m.names.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m.r[i][j]);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out)
        throw Error(ErrorClass::Io, "Io", "write to '" + path + "' failed");
}

} // namespace ufls

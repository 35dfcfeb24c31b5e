#include "ufls/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "ufls/errors.hpp"

namespace ufls {

const std::array<std::string, kNumFeatures> kFeatureNames = {"h", "k", "p", "r"};

double OutageSample::feature(std::size_t idx) const {
    switch (idx) {
        case 0: return h;
        case 1: return k;
        case 2: return p;
        case 3: return r;
        case 4: return y;
    }
    throw Error(ErrorClass::Internal, "BadColumn", "feature index out of range");
}

Dataset::Dataset(std::vector<OutageSample> rows) : rows_(std::move(rows)) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        bounds_.lo[j] = std::numeric_limits<double>::infinity();
        bounds_.hi[j] = -std::numeric_limits<double>::infinity();
    }
    for (const OutageSample& s : rows_) {
        for (std::size_t j = 0; j < kNumFeatures; ++j) {
            const double v = s.feature(j);
            bounds_.lo[j] = std::min(bounds_.lo[j], v);
            bounds_.hi[j] = std::max(bounds_.hi[j], v);
        }
    }
}

const FeatureBounds& Dataset::feature_bounds() const {
    if (rows_.empty())
        throw Error(ErrorClass::Data, "EmptyDataset",
                    "feature bounds of an empty dataset are undefined");
    return bounds_;
}

std::vector<double> Dataset::column(std::size_t idx) const {
    std::vector<double> col;
    col.reserve(rows_.size());
    for (const OutageSample& s : rows_) col.push_back(s.feature(idx));
    return col;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                  std::uint64_t rng_seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error(ErrorClass::Data, "BadFraction",
                    "test fraction must be in (0, 1)");
    const std::size_t n = ds.size();
    const auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * test_fraction + 1e-9));
    if (n_test == 0 || n_test >= n)
        throw Error(ErrorClass::Data, "DatasetTooSmall",
                    "split would leave an empty train or test side");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(rng_seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        // Modulo draw; the tiny bias is irrelevant for partitioning and the
        // result does not depend on library distribution internals.
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }

    std::vector<OutageSample> test_rows, train_rows;
    test_rows.reserve(n_test);
    train_rows.reserve(n - n_test);
    for (std::size_t i = 0; i < n; ++i) {
        const OutageSample& s = ds.rows()[order[i]];
        if (i < n_test)
            test_rows.push_back(s);
        else
            train_rows.push_back(s);
    }
    return {Dataset(std::move(train_rows)), Dataset(std::move(test_rows))};
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_csv(const Dataset& ds, std::ostream& out) {
    out << "h,k,p,r,y,combo_id,lost_unit\n";
    for (const OutageSample& s : ds.rows()) {
        out << fmt_double(s.h) << ',' << fmt_double(s.k) << ','
            << fmt_double(s.p) << ',' << fmt_double(s.r) << ','
            << fmt_double(s.y) << ',' << s.combo_id << ',' << s.lost_unit
            << '\n';
    }
}

void write_csv_file(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "' for writing");
    write_csv(ds, out);
    if (!out)
        throw Error(ErrorClass::Io, "Io", "write to '" + path + "' failed");
}

Dataset read_csv(std::istream& in, const std::string& origin) {
    auto fail = [&](std::size_t line, const std::string& what) {
        throw Error(ErrorClass::Data, "BadCsv",
                    origin + ":" + std::to_string(line) + ": " + what);
    };
    std::string line;
    if (!std::getline(in, line)) fail(1, "missing header");
    if (line == "h,k,p,r,y,combo_id,lost_unit\r")
        line.pop_back();
    if (line != "h,k,p,r,y,combo_id,lost_unit")
        fail(1, "unexpected header '" + line + "'");

    std::vector<OutageSample> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<std::string, 7> fields;
        std::size_t start = 0, fi = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (fi >= fields.size()) fail(lineno, "too many fields");
                fields[fi++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (fi != fields.size()) fail(lineno, "expected 7 fields");
        OutageSample s;
        auto num = [&](const std::string& f) {
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (end != f.c_str() + f.size() || f.empty())
                fail(lineno, "bad number '" + f + "'");
            return v;
        };
        s.h = num(fields[0]);
        s.k = num(fields[1]);
        s.p = num(fields[2]);
        s.r = num(fields[3]);
        s.y = num(fields[4]);
        try {
            s.combo_id = std::stoll(fields[5]);
        } catch (const std::exception&) {
            fail(lineno, "bad combo id '" + fields[5] + "'");
        }
        s.lost_unit = fields[6];
        rows.push_back(std::move(s));
    }
    return Dataset(std::move(rows));
}

Dataset read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "'");
    return read_csv(in, path);
}

} // namespace ufls

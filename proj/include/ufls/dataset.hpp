#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ufls {

// Feature column order used throughout: h, k, p, r.
inline constexpr std::size_t kNumFeatures = 4;
extern const std::array<std::string, kNumFeatures> kFeatureNames;

// One labeled training row: the four post-outage features and the UFLS label.
struct OutageSample {
    double h = 0.0; // MW s, post-outage inertia
    double k = 0.0; // MW / pu frequency, weighted governor gain
    double p = 0.0; // MW, lost power
    double r = 0.0; // MW, available reserve
    double y = 0.0; // MW, UFLS label
    std::int64_t combo_id = -1;
    std::string lost_unit;

    double feature(std::size_t idx) const;
};

struct FeatureBounds {
    std::array<double, kNumFeatures> lo{};
    std::array<double, kNumFeatures> hi{};
};

// Immutable-after-construction dataset with cached per-feature bounds.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<OutageSample> rows);

    const std::vector<OutageSample>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }
    const FeatureBounds& feature_bounds() const;

    // Column extraction; col 0..3 are the features, 4 is the label.
    std::vector<double> column(std::size_t idx) const;
    std::vector<double> labels() const { return column(kNumFeatures); }

private:
    std::vector<OutageSample> rows_;
    FeatureBounds bounds_{};
};

// Reproducible random partition. The training side receives
// n - floor(n * test_fraction) rows (the ceiling of the training share), so
// neither side can round to empty for 0 < test_fraction < 1 and n >= 2.
// Shuffling is an explicit Fisher-Yates pass over a seeded mt19937_64, so a
// fixed seed gives the same partition on every run and platform.
// Throws DatasetTooSmall if either side would be empty.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                  std::uint64_t rng_seed);

// Comma-separated persistence, header "h,k,p,r,y,combo_id,lost_unit".
// Doubles are written with 17 significant digits and round-trip exactly.
void write_csv(const Dataset& ds, std::ostream& out);
void write_csv_file(const Dataset& ds, const std::string& path);
Dataset read_csv(std::istream& in, const std::string& origin = "<stream>");
Dataset read_csv_file(const std::string& path);

} // namespace ufls

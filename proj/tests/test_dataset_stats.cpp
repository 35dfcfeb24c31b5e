#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "ufls/dataset.hpp"
#include "ufls/errors.hpp"
#include "ufls/stats.hpp"

using namespace ufls;

namespace {

Dataset synth_dataset(std::size_t n, std::uint64_t seed = 42) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<OutageSample> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].h = 50.0 + 100.0 * u(rng);
        rows[i].k = 100.0 + 400.0 * u(rng);
        rows[i].p = 1.0 + 10.0 * u(rng);
        rows[i].r = 15.0 * u(rng);
        rows[i].y = u(rng) < 0.4 ? 0.0 : 5.0 * u(rng);
        rows[i].combo_id = static_cast<std::int64_t>(i / 3);
        rows[i].lost_unit = "u" + std::to_string(i % 4);
    }
    return Dataset(std::move(rows));
}

} // namespace

TEST_CASE("split partitions 10 rows 8/2 and unions back to the input") {
    const Dataset ds = synth_dataset(10);
    const auto [train, test] = split(ds, 0.2, 123);
    CHECK(train.size() == 8);
    CHECK(test.size() == 2);

    std::multiset<double> all, recombined;
    for (const auto& s : ds.rows()) all.insert(s.y + s.h);
    for (const auto& s : train.rows()) recombined.insert(s.y + s.h);
    for (const auto& s : test.rows()) recombined.insert(s.y + s.h);
    CHECK(all == recombined);
}

TEST_CASE("split is reproducible for a fixed seed") {
    const Dataset ds = synth_dataset(200);
    const auto [tr1, te1] = split(ds, 0.25, 777);
    const auto [tr2, te2] = split(ds, 0.25, 777);
    REQUIRE(tr1.size() == tr2.size());
    for (std::size_t i = 0; i < tr1.size(); ++i)
        CHECK(tr1.rows()[i].h == tr2.rows()[i].h);
    const auto [tr3, te3] = split(ds, 0.25, 778);
    bool same = tr3.size() == tr1.size();
    if (same)
        for (std::size_t i = 0; i < tr1.size(); ++i)
            same = same && tr1.rows()[i].h == tr3.rows()[i].h;
    CHECK_FALSE(same); // a different seed reshuffles
}

TEST_CASE("split boundary: the training side gets the ceiling") {
    const Dataset ds = synth_dataset(10);
    const auto [train, test] = split(ds, 0.999, 1);
    CHECK(train.size() == 1);
    CHECK(test.size() == 9);
    CHECK_THROWS_WITH_AS(split(synth_dataset(1), 0.5, 1),
                         doctest::Contains("DatasetTooSmall"), Error);
    CHECK_THROWS_WITH_AS(split(synth_dataset(4), 0.01, 1),
                         doctest::Contains("DatasetTooSmall"), Error);
    CHECK_THROWS_AS(split(ds, 0.0, 1), Error);
    CHECK_THROWS_AS(split(ds, 1.0, 1), Error);
}

TEST_CASE("pearson basics") {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const std::vector<double> neg = {-1.0, -2.0, -3.0};
    CHECK(pearson(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(a, neg) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("pearson against a closed-form hand computation") {
    // a = (1,2,3), b = (2,4,7): centered cross sum 5, sums of squares 2 and
    // 38/3, so r = 5 / sqrt(2 * 38/3).
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const std::vector<double> b = {2.0, 4.0, 7.0};
    const double expected = 5.0 / std::sqrt(2.0 * 38.0 / 3.0);
    CHECK(std::fabs(pearson(a, b) - expected) < 1e-12);
}

TEST_CASE("pearson invariances") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> a(400), b(400), a_scaled(400);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = g(rng);
        b[i] = 0.3 * a[i] + g(rng);
        a_scaled[i] = 2.5 * a[i] + 7.0; // positive-slope affine map
    }
    CHECK(pearson(a, b) == doctest::Approx(pearson(b, a)).epsilon(1e-14));
    CHECK(pearson(a_scaled, b) == doctest::Approx(pearson(a, b)).epsilon(1e-12));
}

TEST_CASE("pearson rejects constant columns") {
    const std::vector<double> c = {2.0, 2.0, 2.0};
    const std::vector<double> a = {1.0, 2.0, 3.0};
    CHECK_THROWS_WITH_AS(pearson(c, a), doctest::Contains("ZeroVariance"), Error);
}

TEST_CASE("mean absolute error") {
    const std::vector<double> y = {1.0, 2.0, 3.0, 4.0};
    CHECK(mean_abs_error(y, y) == 0.0);
    std::vector<double> off = y;
    for (double& v : off) v += 0.5;
    CHECK(mean_abs_error(off, y) == doctest::Approx(0.5).epsilon(1e-15));

    SUBCASE("independent recomputation on random vectors") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        std::vector<double> a(333), b(333);
        double manual = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
            manual += std::fabs(a[i] - b[i]);
        }
        manual /= static_cast<double>(a.size());
        CHECK(mean_abs_error(a, b) == doctest::Approx(manual).epsilon(1e-14));
    }
    SUBCASE("scaling property") {
        std::vector<double> a = {1.0, -2.0, 0.5}, b = {0.0, 1.0, 2.0};
        std::vector<double> la = a, lb = b;
        for (double& v : la) v *= -3.0;
        for (double& v : lb) v *= -3.0;
        CHECK(mean_abs_error(la, lb) ==
              doctest::Approx(3.0 * mean_abs_error(a, b)).epsilon(1e-14));
    }
    SUBCASE("length mismatch") {
        CHECK_THROWS_WITH_AS(mean_abs_error(y, std::vector<double>{1.0}),
                             doctest::Contains("LengthMismatch"), Error);
    }
}

TEST_CASE("confusion matrix: perfect prediction puts 100% on the diagonal") {
    const std::vector<int> ids = {0, 1, 2, 1, 0, 2, 2};
    const ConfusionMatrix m = confusion_matrix(ids, ids);
    CHECK(m.accuracy_pct == doctest::Approx(100.0));
    for (std::size_t i = 0; i < m.classes.size(); ++i)
        for (std::size_t j = 0; j < m.classes.size(); ++j)
            if (i != j) CHECK(m.pct[i][j] == 0.0);
}

TEST_CASE("confusion matrix: everything predicted as one class") {
    const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
    const std::vector<int> pred = {1, 1, 1, 1, 1, 1};
    const ConfusionMatrix m = confusion_matrix(truth, pred);
    // All mass sits in the predicted-1 column.
    const std::size_t col1 = 1;
    double col_sum = 0.0, total = 0.0;
    for (std::size_t i = 0; i < m.classes.size(); ++i)
        for (std::size_t j = 0; j < m.classes.size(); ++j) {
            total += m.pct[i][j];
            if (j == col1) col_sum += m.pct[i][j];
        }
    CHECK(col_sum == doctest::Approx(100.0));
    CHECK(total == doctest::Approx(100.0));
    CHECK(m.accuracy_pct == doctest::Approx(100.0 * 2.0 / 6.0));
}

TEST_CASE("confusion matrix against an independent tally") {
    std::mt19937_64 rng(3);
    std::vector<int> truth(500), pred(500);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i] = static_cast<int>(rng() % 3);
        pred[i] = static_cast<int>(rng() % 3);
    }
    const ConfusionMatrix m = confusion_matrix(truth, pred);
    std::size_t counts[3][3] = {};
    for (std::size_t i = 0; i < truth.size(); ++i) counts[truth[i]][pred[i]]++;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(m.pct[i][j] ==
                  doctest::Approx(100.0 * counts[i][j] / 500.0).epsilon(1e-14));
    CHECK_THROWS_WITH_AS(confusion_matrix(truth, std::vector<int>{1}),
                         doctest::Contains("LengthMismatch"), Error);
}

TEST_CASE("dataset CSV round-trips exactly") {
    const Dataset ds = synth_dataset(50);
    std::ostringstream out;
    write_csv(ds, out);
    std::istringstream in(out.str());
    const Dataset back = read_csv(in);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& a = ds.rows()[i];
        const auto& b = back.rows()[i];
        CHECK(a.h == b.h);
        CHECK(a.k == b.k);
        CHECK(a.p == b.p);
        CHECK(a.r == b.r);
        CHECK(a.y == b.y);
        CHECK(a.combo_id == b.combo_id);
        CHECK(a.lost_unit == b.lost_unit);
    }
    // Feature bounds are recomputed consistently.
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        CHECK(ds.feature_bounds().lo[j] == back.feature_bounds().lo[j]);
        CHECK(ds.feature_bounds().hi[j] == back.feature_bounds().hi[j]);
    }
}

TEST_CASE("csv reader rejects malformed input") {
    std::istringstream bad_header("a,b\n");
    CHECK_THROWS_WITH_AS(read_csv(bad_header), doctest::Contains("BadCsv"), Error);
    std::istringstream bad_field("h,k,p,r,y,combo_id,lost_unit\n1,2,3,nope,5,0,u\n");
    CHECK_THROWS_AS(read_csv(bad_field), Error);
    std::istringstream short_row("h,k,p,r,y,combo_id,lost_unit\n1,2,3\n");
    CHECK_THROWS_AS(read_csv(short_row), Error);
}

TEST_CASE("correlation matrix is symmetric with a unit diagonal") {
    const Dataset ds = synth_dataset(300);
    const CorrelationMatrix m = correlation_matrix(ds);
    REQUIRE(m.names.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(m.r[i][i] == 1.0);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(m.r[i][j] == m.r[j][i]);
            CHECK(m.r[i][j] >= -1.0 - 1e-12);
            CHECK(m.r[i][j] <= 1.0 + 1e-12);
        }
    }
}

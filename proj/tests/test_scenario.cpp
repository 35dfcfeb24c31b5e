#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "oracles.hpp"
#include "ufls/config.hpp"
#include "ufls/errors.hpp"
#include "ufls/scenario.hpp"
#include "ufls/sfr.hpp"

using namespace ufls;

namespace {

GeneratingUnit make_unit(const std::string& id, double p_min, double p_max,
                         double cost_a = 0.05, double cost_b = 8.0,
                         double cost_c = 10.0) {
    GeneratingUnit u;
    u.id = id;
    u.p_min = p_min;
    u.p_max = p_max;
    u.rated = p_max / 0.85;
    u.h = 4.0;
    u.k_gov = 18.0;
    u.t_gov = 0.4;
    u.cost_a = cost_a;
    u.cost_b = cost_b;
    u.cost_c = cost_c;
    return u;
}

PipelineConfig island() { return load_config(std::string(UFLS_DATA_DIR) + "/island.cfg"); }

} // namespace

TEST_CASE("single unit enumerates its grid points inside the window") {
    const auto combos =
        enumerate_combinations({make_unit("u", 2.0, 3.0)}, 0.5, 2.0, 3.0);
    REQUIRE(combos.size() == 3);
    std::set<double> seen;
    for (const auto& c : combos) {
        REQUIRE(c.dispatch.size() == 1);
        seen.insert(c.dispatch[0]);
        CHECK(c.total == c.dispatch[0]);
    }
    CHECK(seen == std::set<double>{2.0, 2.5, 3.0});
}

TEST_CASE("two identical units in a [4,6] window give the 3x3 grid") {
    const auto combos = enumerate_combinations(
        {make_unit("u1", 2.0, 3.0), make_unit("u2", 2.0, 3.0)}, 0.5, 4.0, 6.0);
    CHECK(combos.size() == 9); // both online, 3 options each
    for (const auto& c : combos) {
        CHECK(c.dispatch[0] >= 2.0);
        CHECK(c.dispatch[1] >= 2.0);
    }
}

TEST_CASE("an impossible window raises EmptyResult") {
    CHECK_THROWS_WITH_AS(
        enumerate_combinations({make_unit("u", 2.0, 3.0)}, 0.5, 100.0, 200.0),
        doctest::Contains("EmptyResult"), Error);
}

TEST_CASE("island enumeration matches an independent recursive enumerator") {
    const auto cfg = island();
    const auto combos = enumerate_combinations(cfg.units, cfg.scenario.step,
                                               cfg.scenario.gen_min,
                                               cfg.scenario.gen_max);
    const auto brute = oracle::brute_enum(cfg.units, cfg.scenario.step,
                                          cfg.scenario.gen_min,
                                          cfg.scenario.gen_max);
    CHECK(combos.size() == brute.size());

    // Same dispatch-vector set, no duplicates on either side.
    std::set<std::vector<double>> lib_set, brute_set;
    for (const auto& c : combos) lib_set.insert(c.dispatch);
    for (const auto& d : brute) brute_set.insert(d);
    CHECK(lib_set.size() == combos.size());
    CHECK(lib_set == brute_set);
}

TEST_CASE("enumeration respects unit limits, the grid, and the window") {
    const auto cfg = island();
    const auto combos = enumerate_combinations(cfg.units, 0.5, 16.0, 36.0);
    for (const auto& c : combos) {
        double total = 0.0;
        for (std::size_t i = 0; i < cfg.units.size(); ++i) {
            const double d = c.dispatch[i];
            total += d;
            if (d == 0.0) continue;
            CHECK(d >= cfg.units[i].p_min - 1e-12);
            CHECK(d <= cfg.units[i].p_max + 1e-12);
            CHECK(std::fabs(d / 0.5 - std::round(d / 0.5)) < 1e-12);
        }
        CHECK(total == doctest::Approx(c.total).epsilon(1e-12));
        CHECK(c.total >= 16.0 - 1e-9);
        CHECK(c.total <= 36.0 + 1e-9);
        CHECK(c.cost == doctest::Approx(combination_cost(cfg.units, c.dispatch)));
    }
}

TEST_CASE("rank_and_prune keeps the cheapest per level") {
    GenerationCombination cheap{{2.0, 0.0}, 2.0, 10.0};
    GenerationCombination dear{{0.0, 2.0}, 2.0, 12.0};
    SUBCASE("cost decides") {
        auto kept = rank_and_prune({dear, cheap}, 1);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].cost == 10.0);
    }
    SUBCASE("equal costs keep the lexicographically smaller dispatch") {
        dear.cost = 10.0;
        auto kept = rank_and_prune({dear, cheap}, 1);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].dispatch == std::vector<double>{0.0, 2.0});
    }
    SUBCASE("levels are independent") {
        GenerationCombination other{{3.0, 0.0}, 3.0, 99.0};
        auto kept = rank_and_prune({dear, cheap, other}, 1);
        CHECK(kept.size() == 2);
    }
}

TEST_CASE("island pruning agrees with an independent re-sort") {
    const auto cfg = island();
    auto combos = enumerate_combinations(cfg.units, 0.5, 20.0, 24.0);
    const int keep = 15;
    const auto kept = rank_and_prune(combos, keep);

    // Oracle: group by exact total, stable-sort by (cost, dispatch), cut.
    std::map<double, std::vector<GenerationCombination>> groups;
    for (const auto& c : combos) groups[c.total].push_back(c);
    std::vector<GenerationCombination> expect;
    for (auto& [total, g] : groups) {
        std::sort(g.begin(), g.end(), [](const auto& a, const auto& b) {
            return a.cost != b.cost ? a.cost < b.cost : a.dispatch < b.dispatch;
        });
        for (std::size_t i = 0; i < std::min<std::size_t>(g.size(), keep); ++i)
            expect.push_back(g[i]);
    }
    REQUIRE(kept.size() == expect.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        CHECK(kept[i].dispatch == expect[i].dispatch);
        CHECK(kept[i].cost == expect[i].cost);
    }
}

TEST_CASE("build_dataset labels one outage per online unit") {
    const auto cfg = island();
    // Two hand-picked combinations: one with 3 online units, one with 2.
    GenerationCombination c3{{4.0, 4.0, 7.5, 0.0, 0.0}, 15.5, 0.0};
    GenerationCombination c2{{0.0, 0.0, 7.5, 7.5, 0.0}, 15.0, 0.0};
    const Dataset ds = build_dataset({c3, c2}, cfg.units, cfg.scheme, cfg.sim,
                                     cfg.load_damping);
    CHECK(ds.size() == 3 + 2);
    for (const OutageSample& s : ds.rows()) {
        CHECK(s.p > 0.0); // a 0-MW-lost outage never appears
        CHECK(s.h > 0.0);
        CHECK(s.r >= 0.0);
        CHECK(s.y >= 0.0);
        CHECK(s.y <= 15.5);
    }
}

TEST_CASE("single-online-unit combinations are enumerated but not labeled") {
    const auto cfg = island();
    GenerationCombination solo{{0.0, 0.0, 0.0, 0.0, 7.0}, 7.0, 0.0};
    GenerationCombination pair{{5.0, 5.0, 0.0, 0.0, 0.0}, 10.0, 0.0};
    const Dataset ds = build_dataset({solo, pair}, cfg.units, cfg.scheme,
                                     cfg.sim, cfg.load_damping);
    CHECK(ds.size() == 2); // only the two-unit combination contributes
    for (const OutageSample& s : ds.rows()) CHECK(s.combo_id == 1);
}

TEST_CASE("labels are reproducible from the sample metadata") {
    const auto cfg = island();
    auto combos = rank_and_prune(
        enumerate_combinations(cfg.units, 0.5, 18.0, 20.0), 4);
    const Dataset ds = build_dataset(combos, cfg.units, cfg.scheme, cfg.sim,
                                     cfg.load_damping, 2);
    REQUIRE(!ds.empty());
    for (const OutageSample& s : ds.rows()) {
        const GenerationCombination& combo = combos[s.combo_id];
        OperatingPoint op;
        op.demand = combo.total;
        op.load_damping = cfg.load_damping;
        for (std::size_t i = 0; i < cfg.units.size(); ++i)
            if (combo.dispatch[i] > 0.0)
                op.dispatch.push_back({cfg.units[i].id, combo.dispatch[i]});
        const SimResult fresh =
            simulate_outage(op, cfg.units, s.lost_unit, cfg.scheme, cfg.sim);
        CHECK(s.y == fresh.ufls_total); // bit-identical re-simulation

        // Features recomputed directly from the dispatch table.
        double h = 0.0, k = 0.0, r = 0.0;
        for (std::size_t u = 0; u < cfg.units.size(); ++u) {
            if (combo.dispatch[u] <= 0.0 || cfg.units[u].id == s.lost_unit)
                continue;
            h += cfg.units[u].h * cfg.units[u].rated;
            k += cfg.units[u].k_gov * cfg.units[u].rated;
            r += cfg.units[u].p_max - combo.dispatch[u];
        }
        CHECK(s.h == h);
        CHECK(s.k == k);
        CHECK(s.r == doctest::Approx(r).epsilon(1e-14));
        CHECK(s.p == combo.dispatch[static_cast<std::size_t>(
                         std::find_if(cfg.units.begin(), cfg.units.end(),
                                      [&](const GeneratingUnit& gu) {
                                          return gu.id == s.lost_unit;
                                      }) -
                         cfg.units.begin())]);
    }
}

TEST_CASE("labeling output order is canonical regardless of worker count") {
    const auto cfg = island();
    auto combos = rank_and_prune(
        enumerate_combinations(cfg.units, 0.5, 17.0, 18.0), 3);
    const Dataset a = build_dataset(combos, cfg.units, cfg.scheme, cfg.sim,
                                    cfg.load_damping, 1);
    const Dataset b = build_dataset(combos, cfg.units, cfg.scheme, cfg.sim,
                                    cfg.load_damping, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.rows()[i].combo_id == b.rows()[i].combo_id);
        CHECK(a.rows()[i].lost_unit == b.rows()[i].lost_unit);
        CHECK(a.rows()[i].y == b.rows()[i].y);
    }
    // Canonical: combo-major, unit id ascending within a combo.
    for (std::size_t i = 1; i < a.size(); ++i) {
        const auto& prev = a.rows()[i - 1];
        const auto& cur = a.rows()[i];
        const bool ordered = prev.combo_id < cur.combo_id ||
                             (prev.combo_id == cur.combo_id &&
                              prev.lost_unit < cur.lost_unit);
        CHECK(ordered);
    }
}

TEST_CASE("resume reuses previous labels instead of re-simulating") {
    const auto cfg = island();
    auto combos = rank_and_prune(
        enumerate_combinations(cfg.units, 0.5, 17.0, 17.5), 2);
    const Dataset full = build_dataset(combos, cfg.units, cfg.scheme, cfg.sim,
                                       cfg.load_damping);
    REQUIRE(full.size() >= 4);
    // Pretend the first half was labeled before the interruption.
    std::vector<OutageSample> half(full.rows().begin(),
                                   full.rows().begin() + full.size() / 2);
    const Dataset resumed = build_dataset_resume(
        combos, cfg.units, cfg.scheme, cfg.sim, cfg.load_damping,
        Dataset(half));
    REQUIRE(resumed.size() == full.size());
    for (std::size_t i = 0; i < full.size(); ++i)
        CHECK(resumed.rows()[i].y == full.rows()[i].y);
}

TEST_CASE("simulator failures carry the scenario identification") {
    // An unsurvivable outage: the lone remaining unit has no governor and
    // the scheme has no stages, so the frequency collapses.
    GeneratingUnit weak;
    weak.id = "weak";
    weak.p_min = 0.5;
    weak.p_max = 2.0;
    weak.rated = 2.0;
    weak.h = 1.0;
    weak.k_gov = 0.0;
    weak.t_gov = 0.5;
    GeneratingUnit big = weak;
    big.id = "big";
    big.p_max = 20.0;
    big.rated = 20.0;
    UflsScheme bare;
    bare.f_nominal = 50.0;
    SimConfig sc;
    GenerationCombination combo{{10.0, 1.0}, 11.0, 0.0};
    try {
        build_dataset({combo}, {weak, big}, bare, sc, /*damping=*/0.0);
        FAIL("expected NumericalDivergence");
    } catch (const Error& e) {
        CHECK(e.code() == "NumericalDivergence");
        CHECK(std::string(e.what()).find("combo 0") != std::string::npos);
        CHECK(std::string(e.what()).find("big") != std::string::npos);
    }
}

TEST_CASE("combos CSV round-trips") {
    const auto cfg = island();
    auto combos = rank_and_prune(
        enumerate_combinations(cfg.units, 0.5, 16.0, 17.0), 5);
    const std::string path = "/tmp/ufls_test_combos.csv";
    write_combos_csv(combos, cfg.units, path);
    const auto back = read_combos_csv(path, cfg.units);
    REQUIRE(back.size() == combos.size());
    for (std::size_t i = 0; i < combos.size(); ++i) {
        CHECK(back[i].dispatch == combos[i].dispatch);
        CHECK(back[i].total == combos[i].total);
        CHECK(back[i].cost == combos[i].cost);
    }
}

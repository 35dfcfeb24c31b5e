#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ufls/dataset.hpp"
#include "ufls/units.hpp"

namespace ufls {

// One candidate operating point: every unit either offline (0 MW) or
// dispatched on the step grid within its limits.
struct GenerationCombination {
    std::vector<double> dispatch; // aligned with the sorted unit list
    double total = 0.0;           // MW
    double cost = 0.0;            // EUR/h, quadratic cost of the online units
};

struct ScenarioRules {
    double step = 0.5;           // MW dispatch grid
    double gen_min = 0.0;        // MW, inclusive window on the total
    double gen_max = 0.0;
    int keep_per_level = 20;     // retained combinations per total-MW level
};

// Exhaustively enumerates online-subset x grid-dispatch combinations of the
// units (sorted by id) whose total falls in [gen_min, gen_max]. A unit is
// offline iff dispatched at exactly 0 MW; online dispatch respects
// [p_min, p_max] on multiples of `step`. Throws EmptyResult when the window
// excludes everything.
std::vector<GenerationCombination> enumerate_combinations(
    std::vector<GeneratingUnit> units, double step, double gen_min,
    double gen_max);

// Groups combinations by total-MW level, sorts each level by quadratic cost
// (ties broken by lexicographically smaller dispatch vector) and keeps the
// cheapest keep_per_level entries. The returned list is ordered by level,
// then cost, then dispatch; a combination's index in it is its combo_id.
std::vector<GenerationCombination> rank_and_prune(
    std::vector<GenerationCombination> combos, int keep_per_level);

double combination_cost(const std::vector<GeneratingUnit>& units,
                        const std::vector<double>& dispatch);

using LabelProgress = std::function<void(std::size_t done, std::size_t total)>;

// Labels every (combination, lost online unit) pair via simulate_outage.
// Outages that would leave zero units online are skipped. Demand of each
// operating point is the combination total; `damping` is the load damping.
// Work fans out over `workers` threads; the returned row order is canonical
// (combination id, then unit id) regardless of the execution schedule.
Dataset build_dataset(const std::vector<GenerationCombination>& combos,
                      std::vector<GeneratingUnit> units,
                      const UflsScheme& scheme, const SimConfig& cfg,
                      double damping, unsigned workers = 1,
                      const LabelProgress& progress = nullptr);

// Same as build_dataset but reuses rows from `previous` whose
// (combo_id, lost_unit) pair matches, so an interrupted labeling run can
// resume without re-simulating.
Dataset build_dataset_resume(const std::vector<GenerationCombination>& combos,
                             std::vector<GeneratingUnit> units,
                             const UflsScheme& scheme, const SimConfig& cfg,
                             double damping, const Dataset& previous,
                             unsigned workers = 1,
                             const LabelProgress& progress = nullptr);

// Comma-separated persistence for combination lists (one dispatch column
// per unit id, plus total and cost).
void write_combos_csv(const std::vector<GenerationCombination>& combos,
                      const std::vector<GeneratingUnit>& units,
                      const std::string& path);
std::vector<GenerationCombination> read_combos_csv(
    const std::string& path, const std::vector<GeneratingUnit>& units);

} // namespace ufls

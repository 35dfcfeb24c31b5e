#include "ufls/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "ufls/errors.hpp"
#include "ufls/sfr.hpp"

namespace ufls {

namespace {

void sort_units(std::vector<GeneratingUnit>& units) {
    std::sort(units.begin(), units.end(),
              [](const GeneratingUnit& a, const GeneratingUnit& b) {
                  return a.id < b.id;
              });
}

long long level_of(const GenerationCombination& c, double step) {
    return std::llround(c.total / step);
}

} // namespace

std::vector<GenerationCombination> enumerate_combinations(
    std::vector<GeneratingUnit> units, double step, double gen_min,
    double gen_max) {
    if (!(step > 0.0))
        throw Error(ErrorClass::Data, "BadGrid", "grid step must be > 0");
    if (!(gen_min <= gen_max))
        throw Error(ErrorClass::Data, "BadGrid", "gen_min must be <= gen_max");
    for (const GeneratingUnit& u : units) u.validate();
    sort_units(units);

    const double tol = 1e-9;
    // Per-unit dispatch options as integer multiples of the grid step;
    // option 0 means offline.
    std::vector<std::vector<long long>> options(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
        options[i].push_back(0);
        const long long k_lo = std::max<long long>(
            1, static_cast<long long>(std::ceil(units[i].p_min / step - tol)));
        const long long k_hi =
            static_cast<long long>(std::floor(units[i].p_max / step + tol));
        for (long long k = k_lo; k <= k_hi; ++k) options[i].push_back(k);
    }

    std::vector<GenerationCombination> out;
    std::vector<std::size_t> idx(units.size(), 0);
    for (;;) {
        long long total_k = 0;
        for (std::size_t i = 0; i < units.size(); ++i)
            total_k += options[i][idx[i]];
        const double total = static_cast<double>(total_k) * step;
        if (total >= gen_min - tol && total <= gen_max + tol) {
            GenerationCombination c;
            c.dispatch.resize(units.size());
            for (std::size_t i = 0; i < units.size(); ++i)
                c.dispatch[i] = static_cast<double>(options[i][idx[i]]) * step;
            c.total = total;
            c.cost = combination_cost(units, c.dispatch);
            out.push_back(std::move(c));
        }
        // Odometer increment.
        std::size_t pos = 0;
        while (pos < idx.size() && ++idx[pos] == options[pos].size()) {
            idx[pos] = 0;
            ++pos;
        }
        if (pos == idx.size()) break;
    }
    if (out.empty())
        throw Error(ErrorClass::Data, "EmptyResult",
                    "no feasible combination falls in the generation window");
    return out;
}

double combination_cost(const std::vector<GeneratingUnit>& units,
                        const std::vector<double>& dispatch) {
    if (units.size() != dispatch.size())
        throw Error(ErrorClass::Internal, "LengthMismatch",
                    "dispatch vector does not match unit list");
    double cost = 0.0;
    for (std::size_t i = 0; i < units.size(); ++i) {
        const double p = dispatch[i];
        if (p <= 0.0) continue; // offline units incur no cost
        cost += units[i].cost_a * p * p + units[i].cost_b * p + units[i].cost_c;
    }
    return cost;
}

std::vector<GenerationCombination> rank_and_prune(
    std::vector<GenerationCombination> combos, int keep_per_level) {
    if (keep_per_level < 1)
        throw Error(ErrorClass::Data, "BadGrid", "keep_per_level must be >= 1");
    if (combos.empty()) return combos;

    // Totals are multiples of the enumeration step, which is not passed in;
    // recover a grouping quantum as the smallest positive gap between
    // distinct totals. Rounding total/gap is then an exact level key.
    std::vector<double> totals;
    totals.reserve(combos.size());
    for (const GenerationCombination& c : combos) totals.push_back(c.total);
    std::sort(totals.begin(), totals.end());
    totals.erase(std::unique(totals.begin(), totals.end()), totals.end());
    double gap = 0.0;
    for (std::size_t i = 1; i < totals.size(); ++i) {
        const double d = totals[i] - totals[i - 1];
        if (d > 1e-9 && (gap == 0.0 || d < gap)) gap = d;
    }
    if (gap == 0.0) gap = 1.0;

    std::map<long long, std::vector<GenerationCombination>> levels;
    for (GenerationCombination& c : combos)
        levels[level_of(c, gap)].push_back(std::move(c));

    std::vector<GenerationCombination> out;
    for (auto& [lvl, group] : levels) {
        (void)lvl;
        std::sort(group.begin(), group.end(),
                  [](const GenerationCombination& a, const GenerationCombination& b) {
                      if (a.cost != b.cost) return a.cost < b.cost;
                      return a.dispatch < b.dispatch;
                  });
        const std::size_t keep =
            std::min<std::size_t>(group.size(), static_cast<std::size_t>(keep_per_level));
        for (std::size_t i = 0; i < keep; ++i) out.push_back(std::move(group[i]));
    }
    return out;
}

namespace {

struct LabelTask {
    std::size_t combo_idx;
    std::size_t unit_idx;
};

Dataset label_tasks(const std::vector<GenerationCombination>& combos,
                    const std::vector<GeneratingUnit>& units,
                    const UflsScheme& scheme, const SimConfig& cfg,
                    double damping, const Dataset* previous, unsigned workers,
                    const LabelProgress& progress) {
    if (combos.empty())
        throw Error(ErrorClass::Data, "EmptyResult", "no combinations to label");

    // Operating points, one per combination (dispatch sorted by unit id).
    std::vector<OperatingPoint> ops(combos.size());
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
        OperatingPoint& op = ops[ci];
        op.demand = combos[ci].total;
        op.load_damping = damping;
        for (std::size_t ui = 0; ui < units.size(); ++ui)
            if (combos[ci].dispatch[ui] > 0.0)
                op.dispatch.push_back({units[ui].id, combos[ci].dispatch[ui]});
        op.validate(units);
    }

    std::vector<LabelTask> tasks;
    for (std::size_t ci = 0; ci < combos.size(); ++ci) {
        std::size_t online = ops[ci].dispatch.size();
        if (online < 2) continue; // the sole unit's outage is unlabelable
        for (std::size_t ui = 0; ui < units.size(); ++ui)
            if (combos[ci].dispatch[ui] > 0.0) tasks.push_back({ci, ui});
    }

    std::map<std::pair<std::int64_t, std::string>, double> known;
    if (previous)
        for (const OutageSample& s : previous->rows())
            known[{s.combo_id, s.lost_unit}] = s.y;

    std::vector<OutageSample> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::mutex progress_mutex;

    auto run_task = [&](std::size_t ti) {
        const LabelTask& task = tasks[ti];
        const GenerationCombination& combo = combos[task.combo_idx];
        const std::string& lost = units[task.unit_idx].id;
        try {
            OutageSample s;
            s.combo_id = static_cast<std::int64_t>(task.combo_idx);
            s.lost_unit = lost;
            s.h = post_outage_inertia(ops[task.combo_idx], units, lost);
            s.k = weighted_gain(ops[task.combo_idx], units, lost);
            s.p = combo.dispatch[task.unit_idx];
            s.r = available_reserve(ops[task.combo_idx], units, lost);
            auto it = known.find({s.combo_id, lost});
            if (it != known.end()) {
                s.y = it->second;
            } else {
                s.y = simulate_outage(ops[task.combo_idx], units, lost, scheme, cfg)
                          .ufls_total;
            }
            rows[ti] = std::move(s);
        } catch (const Error& e) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error)
                first_error = std::make_exception_ptr(
                    Error(e.error_class(), e.code(),
                          std::string(e.what()) + " [combo " +
                              std::to_string(task.combo_idx) + ", outage of '" +
                              lost + "']"));
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
        }
        const std::size_t d = done.fetch_add(1) + 1;
        if (progress && (d % 512 == 0 || d == tasks.size())) {
            std::lock_guard<std::mutex> lock(progress_mutex);
            progress(d, tasks.size());
        }
    };

    auto worker_loop = [&] {
        for (;;) {
            const std::size_t ti = next.fetch_add(1);
            if (ti >= tasks.size()) break;
            run_task(ti);
        }
    };

    const unsigned n_threads = std::max(1u, workers);
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n_threads; ++w) pool.emplace_back(worker_loop);
    worker_loop();
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    return Dataset(std::move(rows));
}

} // namespace

Dataset build_dataset(const std::vector<GenerationCombination>& combos,
                      std::vector<GeneratingUnit> units,
                      const UflsScheme& scheme, const SimConfig& cfg,
                      double damping, unsigned workers,
                      const LabelProgress& progress) {
    sort_units(units);
    return label_tasks(combos, units, scheme, cfg, damping, nullptr, workers,
                       progress);
}

Dataset build_dataset_resume(const std::vector<GenerationCombination>& combos,
                             std::vector<GeneratingUnit> units,
                             const UflsScheme& scheme, const SimConfig& cfg,
                             double damping, const Dataset& previous,
                             unsigned workers, const LabelProgress& progress) {
    sort_units(units);
    return label_tasks(combos, units, scheme, cfg, damping, &previous, workers,
                       progress);
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void write_combos_csv(const std::vector<GenerationCombination>& combos,
                      const std::vector<GeneratingUnit>& units,
                      const std::string& path) {
    std::vector<GeneratingUnit> sorted = units;
    sort_units(sorted);
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < sorted.size(); ++i)
        out << sorted[i].id << ',';
    out << "total,cost\n";
    for (const GenerationCombination& c : combos) {
        if (c.dispatch.size() != sorted.size())
            throw Error(ErrorClass::Internal, "LengthMismatch",
                        "combination width does not match unit list");
        for (double d : c.dispatch) out << fmt_double(d) << ',';
        out << fmt_double(c.total) << ',' << fmt_double(c.cost) << '\n';
    }
    if (!out)
        throw Error(ErrorClass::Io, "Io", "write to '" + path + "' failed");
}

std::vector<GenerationCombination> read_combos_csv(
    const std::string& path, const std::vector<GeneratingUnit>& units) {
    std::vector<GeneratingUnit> sorted = units;
    sort_units(sorted);
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorClass::Io, "Io", "cannot open '" + path + "'");
    auto fail = [&](std::size_t line, const std::string& what) {
        throw Error(ErrorClass::Data, "BadCsv",
                    path + ":" + std::to_string(line) + ": " + what);
    };
    std::string line;
    if (!std::getline(in, line)) fail(1, "missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string expect;
    for (const GeneratingUnit& u : sorted) expect += u.id + ",";
    expect += "total,cost";
    if (line != expect)
        fail(1, "header mismatch; expected '" + expect + "'");

    std::vector<GenerationCombination> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> vals;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                const std::string f = line.substr(start, i - start);
                char* end = nullptr;
                const double v = std::strtod(f.c_str(), &end);
                if (f.empty() || end != f.c_str() + f.size())
                    fail(lineno, "bad number '" + f + "'");
                vals.push_back(v);
                start = i + 1;
            }
        }
        if (vals.size() != sorted.size() + 2) fail(lineno, "wrong field count");
        GenerationCombination c;
        c.dispatch.assign(vals.begin(), vals.begin() + sorted.size());
        c.total = vals[sorted.size()];
        c.cost = vals[sorted.size() + 1];
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace ufls

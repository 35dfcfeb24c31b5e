#pragma once

#include <string>
#include <vector>

namespace ufls {

// Static parameters of one thermal unit. Inertia constant and governor gain
// are given on the machine base `rated`; the quadratic cost is
// cost_a*P^2 + cost_b*P + cost_c [EUR/h] at output P [MW].
struct GeneratingUnit {
    std::string id;
    double p_min = 0.0;   // MW
    double p_max = 0.0;   // MW
    double rated = 0.0;   // MW, machine base
    double h = 0.0;       // s, inertia constant on machine base
    double k_gov = 0.0;   // pu power / pu frequency on machine base
    double t_gov = 0.0;   // s, turbine-governor time constant
    double cost_a = 0.0;  // EUR/MW^2 h
    double cost_b = 0.0;  // EUR/MWh
    double cost_c = 0.0;  // EUR/h

    // Throws Error(Data) when 0 < p_min <= p_max <= rated, h > 0,
    // k_gov >= 0 or t_gov > 0 is violated. p_min == 0 is allowed so that a
    // unit can idle at zero output while synchronized.
    void validate() const;
};

struct UflsStage {
    double f_threshold = 0.0;   // Hz
    double shed_fraction = 0.0; // fraction of currently connected load
    double relay_delay = 0.0;   // s the frequency must stay below threshold
};

// Staged conventional UFLS scheme. Stage thresholds must be strictly
// decreasing and below nominal frequency; each stage fires at most once.
struct UflsScheme {
    double f_nominal = 50.0; // Hz
    std::vector<UflsStage> stages;
    double breaker_delay = 0.0; // s between relay pickup and load drop

    void validate() const;
};

struct DispatchEntry {
    std::string unit_id;
    double mw = 0.0;
};

// A balanced pre-outage operating point. `dispatch` lists online units only,
// sorted by unit id; the dispatch total must equal `demand`.
struct OperatingPoint {
    std::vector<DispatchEntry> dispatch;
    double demand = 0.0;       // MW
    double load_damping = 1.0; // pu load power / pu frequency, on demand base

    // Checks balance and per-unit limits against `units`. Throws Error(Data).
    void validate(const std::vector<GeneratingUnit>& units) const;

    const DispatchEntry* find(const std::string& unit_id) const;
};

struct SimConfig {
    double dt = 0.01;      // s, fixed RK4 step
    double horizon = 60.0; // s, must exceed the slowest governor transient
    bool record_trajectory = false;

    void validate() const;
};

const GeneratingUnit& unit_by_id(const std::vector<GeneratingUnit>& units,
                                 const std::string& id);

} // namespace ufls

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ufls/units.hpp"

namespace ufls {

struct FiredStage {
    int stage = 0;     // index into UflsScheme::stages
    double time = 0.0; // s, instant the breaker opens and load is dropped
};

struct SimResult {
    double ufls_total = 0.0; // MW shed, valued at the load level when dropped
    double f_nadir = 0.0;    // Hz
    double f_qss = 0.0;      // Hz at the simulation horizon
    std::vector<FiredStage> fired_stages;
    std::vector<std::pair<double, double>> trajectory; // (t, f), when recorded
};

// Simulates system frequency after the outage of `lost` with a single-bus
// swing equation:
//
//   2 * M * d(df)/dt = P_mech - P_load,   M = sum_g h_g * rated_g  [MW s]
//
// where df is the per-unit frequency deviation, each remaining unit
// contributes a first-order turbine governor
//
//   t_gov * d(dp_g)/dt = -k_gov * df - dp_g
//
// with the state clamped to the unit headroom [0, p_max - dispatch] (in pu
// on the machine base), and the load is L_conn * (1 + D * df) for the
// currently connected load L_conn. UFLS stage i picks up when f stays at or
// below its threshold for relay_delay seconds; breaker_delay later the
// connected load is reduced by shed_fraction * L_conn, which is the MW value
// accumulated into ufls_total. Integration is fixed-step RK4; relay and
// breaker events are processed on step boundaries.
//
// Errors: NoUnitsRemaining when `lost` is the only online unit,
// NumericalDivergence when |f - f_nominal| exceeds 10 Hz.
SimResult simulate_outage(const OperatingPoint& op,
                          const std::vector<GeneratingUnit>& units,
                          const std::string& lost,
                          const UflsScheme& scheme,
                          const SimConfig& cfg);

// Feature extractors over the remaining (post-outage) units. All three throw
// NoUnitsRemaining when the outage would leave the system empty.

// sum of (p_max - dispatch) [MW]
double available_reserve(const OperatingPoint& op,
                         const std::vector<GeneratingUnit>& units,
                         const std::string& lost);
// sum of h * rated [MW s]
double post_outage_inertia(const OperatingPoint& op,
                           const std::vector<GeneratingUnit>& units,
                           const std::string& lost);
// sum of k_gov * rated [MW / pu frequency]
double weighted_gain(const OperatingPoint& op,
                     const std::vector<GeneratingUnit>& units,
                     const std::string& lost);

} // namespace ufls

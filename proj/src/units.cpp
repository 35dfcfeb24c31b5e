#include "ufls/units.hpp"

#include <algorithm>
#include <cmath>

#include "ufls/errors.hpp"

namespace ufls {

void GeneratingUnit::validate() const {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorClass::Data, "InvalidUnit", "unit '" + id + "': " + what);
    };
    if (id.empty()) fail("empty id");
    if (!(p_min >= 0.0)) fail("p_min must be >= 0");
    if (!(p_min <= p_max)) fail("p_min must be <= p_max");
    if (!(p_max <= rated)) fail("p_max must be <= rated");
    if (!(rated > 0.0)) fail("rated must be > 0");
    if (!(h > 0.0)) fail("inertia constant must be > 0");
    if (!(k_gov >= 0.0)) fail("governor gain must be >= 0");
    if (!(t_gov > 0.0)) fail("governor time constant must be > 0");
}

void UflsScheme::validate() const {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorClass::Data, "InvalidScheme", what);
    };
    if (!(f_nominal > 0.0)) fail("nominal frequency must be > 0");
    if (breaker_delay < 0.0) fail("breaker delay must be >= 0");
    double prev = f_nominal;
    for (std::size_t i = 0; i < stages.size(); ++i) {
        const UflsStage& s = stages[i];
        if (!(s.f_threshold < prev))
            fail("stage thresholds must be strictly decreasing and below nominal");
        if (!(s.shed_fraction > 0.0 && s.shed_fraction <= 1.0))
            fail("shed fraction must be in (0, 1]");
        if (s.relay_delay < 0.0) fail("relay delay must be >= 0");
        prev = s.f_threshold;
    }
}

void OperatingPoint::validate(const std::vector<GeneratingUnit>& units) const {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorClass::Data, "InvalidOperatingPoint", what);
    };
    double total = 0.0;
    std::string prev_id;
    for (const DispatchEntry& d : dispatch) {
        const GeneratingUnit& u = unit_by_id(units, d.unit_id);
        if (!prev_id.empty() && !(prev_id < d.unit_id))
            fail("dispatch entries must be sorted by unit id without duplicates");
        prev_id = d.unit_id;
        if (d.mw < u.p_min - 1e-9 || d.mw > u.p_max + 1e-9)
            fail("dispatch of '" + d.unit_id + "' outside [p_min, p_max]");
        total += d.mw;
    }
    if (std::fabs(total - demand) > 1e-6 * std::max(1.0, std::fabs(demand)))
        fail("dispatch total does not match demand");
    if (load_damping < 0.0) fail("load damping must be >= 0");
}

const DispatchEntry* OperatingPoint::find(const std::string& unit_id) const {
    for (const DispatchEntry& d : dispatch)
        if (d.unit_id == unit_id) return &d;
    return nullptr;
}

void SimConfig::validate() const {
    if (!(dt > 0.0))
        throw Error(ErrorClass::Data, "InvalidSimConfig", "dt must be > 0");
    if (!(horizon >= 30.0))
        throw Error(ErrorClass::Data, "InvalidSimConfig",
                    "horizon must be >= 30 s to cover governor transients");
}

const GeneratingUnit& unit_by_id(const std::vector<GeneratingUnit>& units,
                                 const std::string& id) {
    for (const GeneratingUnit& u : units)
        if (u.id == id) return u;
    throw Error(ErrorClass::Data, "UnknownUnit", "no unit with id '" + id + "'");
}

} // namespace ufls

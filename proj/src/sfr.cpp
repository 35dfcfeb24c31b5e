#include "ufls/sfr.hpp"

#include <cmath>
#include <cstddef>

#include "ufls/errors.hpp"

namespace ufls {

namespace {

struct RemainingUnit {
    double dispatch = 0.0;    // MW
    double rated = 0.0;       // MW
    double gain = 0.0;        // pu/pu on machine base
    double tconst = 0.0;      // s
    double headroom_pu = 0.0; // (p_max - dispatch) / rated
    double reserve_mw = 0.0;  // p_max - dispatch
    double inertia_mws = 0.0; // h * rated
};

std::vector<RemainingUnit> collect_remaining(const OperatingPoint& op,
                                             const std::vector<GeneratingUnit>& units,
                                             const std::string& lost) {
    if (!op.find(lost))
        throw Error(ErrorClass::Data, "LostUnitNotDispatched",
                    "unit '" + lost + "' is not dispatched in the operating point");
    std::vector<RemainingUnit> rem;
    rem.reserve(op.dispatch.size());
    for (const DispatchEntry& d : op.dispatch) {
        if (d.unit_id == lost) continue;
        const GeneratingUnit& u = unit_by_id(units, d.unit_id);
        rem.push_back({d.mw, u.rated, u.k_gov, u.t_gov,
                       (u.p_max - d.mw) / u.rated, u.p_max - d.mw,
                       u.h * u.rated});
    }
    if (rem.empty())
        throw Error(ErrorClass::Simulation, "NoUnitsRemaining",
                    "outage of '" + lost + "' leaves no unit online");
    return rem;
}

struct StageTracker {
    bool fired = false;
    bool pending = false;      // relay picked up, waiting for the breaker
    double below_since = -1.0; // first grid time with f <= threshold, -1 if none
    double action_time = 0.0;
};

} // namespace

SimResult simulate_outage(const OperatingPoint& op,
                          const std::vector<GeneratingUnit>& units,
                          const std::string& lost,
                          const UflsScheme& scheme,
                          const SimConfig& cfg) {
    cfg.validate();
    scheme.validate();
    const std::vector<RemainingUnit> rem = collect_remaining(op, units, lost);

    double inertia = 0.0;   // M = sum h*rated, MW s
    double mech_base = 0.0; // dispatched MW of the remaining units
    for (const RemainingUnit& r : rem) {
        mech_base += r.dispatch;
        inertia += r.inertia_mws;
    }

    const double f_nom = scheme.f_nominal;
    const double damping = op.load_damping;
    const std::size_t m = rem.size();
    const std::size_t dim = 1 + m; // [df_pu, dp_1..dp_m]

    // state[0] = per-unit frequency deviation, state[1+g] = governor output
    // deviation of remaining unit g in pu on its machine base.
    std::vector<double> state(dim, 0.0), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

    double load_conn = op.demand; // connected load at nominal frequency, MW

    auto deriv = [&](const std::vector<double>& s, std::vector<double>& out) {
        const double df = s[0];
        double mech = mech_base;
        for (std::size_t g = 0; g < m; ++g) {
            double dp = s[1 + g];
            if (dp < 0.0) dp = 0.0;
            if (dp > rem[g].headroom_pu) dp = rem[g].headroom_pu;
            mech += dp * rem[g].rated;
        }
        const double p_acc = mech - load_conn * (1.0 + damping * df);
        out[0] = p_acc / (2.0 * inertia);
        for (std::size_t g = 0; g < m; ++g)
            out[1 + g] = (-rem[g].gain * df - s[1 + g]) / rem[g].tconst;
    };

    const std::size_t n_steps =
        static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt - 1e-9));
    const double dt = cfg.dt;
    const double time_eps = 1e-12;

    std::vector<StageTracker> trackers(scheme.stages.size());

    SimResult res;
    res.f_nadir = f_nom;
    if (cfg.record_trajectory) {
        res.trajectory.reserve(n_steps + 1);
        res.trajectory.emplace_back(0.0, f_nom);
    }

    for (std::size_t step = 0; step < n_steps; ++step) {
        const double t_new = static_cast<double>(step + 1) * dt;

        deriv(state, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
        deriv(tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
        deriv(tmp, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = state[i] + dt * k3[i];
        deriv(tmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            state[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);

        // Governor headroom clamp (anti-windup on the stored state).
        for (std::size_t g = 0; g < m; ++g) {
            double& dp = state[1 + g];
            if (dp < 0.0) dp = 0.0;
            if (dp > rem[g].headroom_pu) dp = rem[g].headroom_pu;
        }

        const double f = f_nom * (1.0 + state[0]);
        if (std::fabs(f - f_nom) > 10.0)
            throw Error(ErrorClass::Simulation, "NumericalDivergence",
                        "frequency deviation exceeded 10 Hz; check parameters");
        if (f < res.f_nadir) res.f_nadir = f;

        // Relay pickup logic: a stage arms once f has stayed at or below its
        // threshold for relay_delay, measured on the step grid.
        for (std::size_t si = 0; si < trackers.size(); ++si) {
            StageTracker& tr = trackers[si];
            if (tr.fired || tr.pending) continue;
            const UflsStage& st = scheme.stages[si];
            if (f <= st.f_threshold) {
                if (tr.below_since < 0.0) tr.below_since = t_new;
                if (t_new - tr.below_since >= st.relay_delay - time_eps) {
                    tr.pending = true;
                    tr.action_time = t_new + scheme.breaker_delay;
                }
            } else {
                tr.below_since = -1.0;
            }
        }

        // Breaker actions due now: drop shed_fraction of the currently
        // connected load and value the shed MW at that level.
        for (std::size_t si = 0; si < trackers.size(); ++si) {
            StageTracker& tr = trackers[si];
            if (!tr.pending || t_new < tr.action_time - time_eps) continue;
            const double shed = scheme.stages[si].shed_fraction * load_conn;
            load_conn -= shed;
            res.ufls_total += shed;
            tr.pending = false;
            tr.fired = true;
            res.fired_stages.push_back({static_cast<int>(si), tr.action_time});
        }

        if (cfg.record_trajectory) res.trajectory.emplace_back(t_new, f);
    }

    res.f_qss = f_nom * (1.0 + state[0]);
    return res;
}

double available_reserve(const OperatingPoint& op,
                         const std::vector<GeneratingUnit>& units,
                         const std::string& lost) {
    double r = 0.0;
    for (const RemainingUnit& u : collect_remaining(op, units, lost))
        r += u.reserve_mw;
    return r;
}

double post_outage_inertia(const OperatingPoint& op,
                           const std::vector<GeneratingUnit>& units,
                           const std::string& lost) {
    double h = 0.0;
    for (const RemainingUnit& u : collect_remaining(op, units, lost))
        h += u.inertia_mws;
    return h;
}

double weighted_gain(const OperatingPoint& op,
                     const std::vector<GeneratingUnit>& units,
                     const std::string& lost) {
    double k = 0.0;
    for (const RemainingUnit& u : collect_remaining(op, units, lost))
        k += u.gain * u.rated;
    return k;
}

} // namespace ufls

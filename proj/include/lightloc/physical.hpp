#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "lightloc/provisioning.hpp"
#include "lightloc/rng.hpp"
#include "lightloc/topology.hpp"

namespace lightloc {

enum class FailureType {
    TransponderBreak,
    LaunchPowerDegradation,
    AmplifierBreak,
    GainDegradation,
    WssBreak,
    ExcessiveFiltering,
    ExtraAttenuation,
    FiberBreak,
    LossDegradation,
};

inline const char* failure_name(FailureType t) {
    switch (t) {
        case FailureType::TransponderBreak: return "transponder_break";
        case FailureType::LaunchPowerDegradation: return "launch_power_degradation";
        case FailureType::AmplifierBreak: return "amplifier_break";
        case FailureType::GainDegradation: return "gain_degradation";
        case FailureType::WssBreak: return "wss_break";
        case FailureType::ExcessiveFiltering: return "excessive_filtering";
        case FailureType::ExtraAttenuation: return "extra_attenuation";
        case FailureType::FiberBreak: return "fiber_break";
        case FailureType::LossDegradation: return "loss_degradation";
    }
    return "?";
}

inline FailureType failure_from_name(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(FailureType::LossDegradation); ++i) {
        auto t = static_cast<FailureType>(i);
        if (s == failure_name(t)) return t;
    }
    throw ParseError("unknown failure type: " + s);
}

inline bool failure_applies(FailureType t, ComponentKind k) {
    switch (t) {
        case FailureType::TransponderBreak:
        case FailureType::LaunchPowerDegradation:
            return k == ComponentKind::Transponder;
        case FailureType::AmplifierBreak:
        case FailureType::GainDegradation:
            return is_amplifier(k);
        case FailureType::WssBreak:
        case FailureType::ExcessiveFiltering:
        case FailureType::ExtraAttenuation:
            return is_wss(k);
        case FailureType::FiberBreak:
        case FailureType::LossDegradation:
            return k == ComponentKind::FiberSpan;
    }
    return false;
}

inline bool is_hard_failure(FailureType t) {
    return t == FailureType::TransponderBreak || t == FailureType::AmplifierBreak ||
           t == FailureType::WssBreak || t == FailureType::ExcessiveFiltering ||
           t == FailureType::FiberBreak;
}

struct Failure {
    int component = -1;
    FailureType type = FailureType::TransponderBreak;
    double magnitude_db = 0.0;  // dB effect size; for breaks the fixed penalty
                                // (amplifiers: the full nominal gain)
    int wavelength = -1;        // ExcessiveFiltering only; -1 blocks every channel
};

struct FailureScenario {
    std::vector<Failure> failures;

    const Failure* find(int component) const {
        for (const auto& f : failures) {
            if (f.component == component) return &f;
        }
        return nullptr;
    }
};

// Measurement and failure-effect constants. Hard failures pass a heavily
// attenuated signal downstream instead of erasing it: the per-slot power
// differences stay informative, and the noise floor only clamps readings.
struct PowerModel {
    double jitter_sigma_db = 0.1;
    double noise_floor_dbm = -80.0;
    double receiver_sensitivity_dbm = -70.0;
    double break_penalty_db = 25.0;      // transponder / WSS / fiber hard failure
    double filtering_penalty_db = 30.0;  // WSS blocking one wavelength
    // soft-failure magnitude draw ranges
    double atten_lo = 2.0, atten_hi = 8.0;    // ExtraAttenuation, LossDegradation
    double gain_deg_lo = 3.0, gain_deg_hi = 10.0;
    double launch_deg_lo = 2.0, launch_deg_hi = 6.0;
};

// Effective value of the component's headline parameter under the scenario:
// launch power dBm for transponders, gain dB for amplifiers, loss dB for WSSs
// and fiber spans. `wavelength` decides whether per-channel filtering applies.
inline double effective_param(const Component& c, const FailureScenario& scenario,
                              const PowerModel& pm, int wavelength = -1) {
    const Failure* f = scenario.find(c.id);
    if (!f) return c.nominal;
    if (!failure_applies(f->type, c.kind)) {
        throw KindMismatch(std::string("failure ") + failure_name(f->type) + " cannot affect a " +
                           kind_name(c.kind));
    }
    switch (f->type) {
        case FailureType::TransponderBreak: return c.nominal - pm.break_penalty_db;
        case FailureType::LaunchPowerDegradation: return c.nominal - f->magnitude_db;
        case FailureType::AmplifierBreak: return 0.0;
        case FailureType::GainDegradation: return c.nominal - f->magnitude_db;
        case FailureType::WssBreak: return c.nominal + pm.break_penalty_db;
        case FailureType::ExcessiveFiltering:
            return f->wavelength < 0 || f->wavelength == wavelength
                       ? c.nominal + pm.filtering_penalty_db
                       : c.nominal;
        case FailureType::ExtraAttenuation: return c.nominal + f->magnitude_db;
        case FailureType::FiberBreak: return c.nominal + pm.break_penalty_db;
        case FailureType::LossDegradation: return c.nominal + f->magnitude_db;
    }
    return c.nominal;
}

// Whether the failure changes this lightpath's readings; only per-channel
// filtering is wavelength-selective.
inline bool failure_affects_lightpath(const Failure& f, const Lightpath& lp) {
    return f.type != FailureType::ExcessiveFiltering || f.wavelength < 0 ||
           f.wavelength == lp.wavelength;
}

// Signed dB change the component applies to a passing signal.
inline double contribution_db(const Component& c, const FailureScenario& scenario,
                              const PowerModel& pm, int wavelength) {
    double p = effective_param(c, scenario, pm, wavelength);
    if (is_amplifier(c.kind)) return p;
    if (is_wss(c.kind) || c.kind == ComponentKind::FiberSpan) return -p;
    return 0.0;  // transponders set the launch power, they do not attenuate
}

struct Trace {
    std::vector<double> slot_dbm;  // one reading per slot, jitter applied
    double receiver_dbm = 0.0;     // un-jittered power entering the receiver
    bool flag = false;             // reception indicator
};

// Walks the lightpath's dB ledger. The reading at slot i is the power after
// component i, clamped at the noise floor, plus measurement jitter.
inline Trace propagate(const Lightpath& lp, const ComponentGraph& g, const FailureScenario& scenario,
                       const PowerModel& pm, std::uint64_t seed) {
    Rng rng(seed);
    Trace tr;
    tr.slot_dbm.reserve(lp.slots.size());
    double power = effective_param(g.components[lp.components.front()], scenario, pm, lp.wavelength);
    for (std::size_t i = 1; i < lp.components.size(); ++i) {
        double reading = std::max(power, pm.noise_floor_dbm);
        tr.slot_dbm.push_back(reading + (pm.jitter_sigma_db > 0
                                             ? rng.normal(0.0, pm.jitter_sigma_db)
                                             : 0.0));
        power += contribution_db(g.components[lp.components[i]], scenario, pm, lp.wavelength);
    }
    tr.receiver_dbm = std::max(power - contribution_db(g.components[lp.components.back()], scenario,
                                                       pm, lp.wavelength),
                               pm.noise_floor_dbm);
    const Failure* rx = scenario.find(lp.components.back());
    bool rx_dead = rx && rx->type == FailureType::TransponderBreak;
    tr.flag = tr.receiver_dbm >= pm.receiver_sensitivity_dbm && !rx_dead;
    return tr;
}

enum class KindFilter { Any, Transponder, Amplifier, Wss, Fiber };

inline const char* kind_filter_name(KindFilter f) {
    switch (f) {
        case KindFilter::Any: return "any";
        case KindFilter::Transponder: return "transponder";
        case KindFilter::Amplifier: return "amplifier";
        case KindFilter::Wss: return "wss";
        case KindFilter::Fiber: return "fiber";
    }
    return "?";
}

inline KindFilter kind_filter_from_name(const std::string& s) {
    for (KindFilter f : {KindFilter::Any, KindFilter::Transponder, KindFilter::Amplifier,
                         KindFilter::Wss, KindFilter::Fiber}) {
        if (s == kind_filter_name(f)) return f;
    }
    throw ConfigError("unknown failure-type filter: " + s);
}

inline bool kind_matches(KindFilter f, ComponentKind k) {
    switch (f) {
        case KindFilter::Any: return true;
        case KindFilter::Transponder: return k == ComponentKind::Transponder;
        case KindFilter::Amplifier: return is_amplifier(k);
        case KindFilter::Wss: return is_wss(k);
        case KindFilter::Fiber: return k == ComponentKind::FiberSpan;
    }
    return false;
}

// Components traversed by at least one lightpath, ascending by id.
inline std::vector<int> traversed_components(const std::vector<Lightpath>& lps) {
    std::vector<bool> seen;
    for (const auto& lp : lps) {
        for (int c : lp.components) {
            if (c >= static_cast<int>(seen.size())) seen.resize(c + 1, false);
            if (c >= 0) seen[c] = true;
        }
    }
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(seen.size()); ++i) {
        if (seen[i]) out.push_back(i);
    }
    return out;
}

// Draws the number of failures, the failed components (uniform, without
// replacement, restricted to traversed components), per-component failure
// types, and effect magnitudes.
inline FailureScenario sample_failure_scenario(const ComponentGraph& g,
                                               const std::vector<Lightpath>& lps,
                                               const std::vector<int>& n_f_set, KindFilter filter,
                                               const PowerModel& pm, Rng& rng) {
    if (n_f_set.empty()) throw ConfigError("n_f_set must not be empty");
    std::vector<int> pool;
    for (int c : traversed_components(lps)) {
        if (kind_matches(filter, g.components[c].kind)) pool.push_back(c);
    }
    int n = n_f_set[rng.below(n_f_set.size())];
    if (n > static_cast<int>(pool.size())) {
        throw NotEnoughComponents("requested " + std::to_string(n) + " failures but only " +
                                  std::to_string(pool.size()) + " traversed components match");
    }
    FailureScenario sc;
    for (int idx : rng.sample_indices(static_cast<int>(pool.size()), n)) {
        const Component& c = g.components[pool[idx]];
        std::vector<FailureType> applicable;
        for (int t = 0; t <= static_cast<int>(FailureType::LossDegradation); ++t) {
            auto ft = static_cast<FailureType>(t);
            if (failure_applies(ft, c.kind)) applicable.push_back(ft);
        }
        Failure f;
        f.component = c.id;
        f.type = applicable[rng.below(applicable.size())];
        switch (f.type) {
            case FailureType::TransponderBreak: f.magnitude_db = pm.break_penalty_db; break;
            case FailureType::LaunchPowerDegradation:
                f.magnitude_db = rng.uniform(pm.launch_deg_lo, pm.launch_deg_hi);
                break;
            case FailureType::AmplifierBreak: f.magnitude_db = c.nominal; break;
            case FailureType::GainDegradation:
                f.magnitude_db = rng.uniform(pm.gain_deg_lo, pm.gain_deg_hi);
                break;
            case FailureType::WssBreak: f.magnitude_db = pm.break_penalty_db; break;
            case FailureType::ExcessiveFiltering: {
                f.magnitude_db = pm.filtering_penalty_db;
                std::vector<int> wavelengths;
                for (const auto& lp : lps) {
                    if (std::find(lp.components.begin(), lp.components.end(), c.id) !=
                        lp.components.end()) {
                        wavelengths.push_back(lp.wavelength);
                    }
                }
                f.wavelength = wavelengths[rng.below(wavelengths.size())];
                break;
            }
            case FailureType::ExtraAttenuation:
                f.magnitude_db = rng.uniform(pm.atten_lo, pm.atten_hi);
                break;
            case FailureType::FiberBreak: f.magnitude_db = pm.break_penalty_db; break;
            case FailureType::LossDegradation:
                f.magnitude_db = rng.uniform(pm.atten_lo, pm.atten_hi);
                break;
        }
        sc.failures.push_back(f);
    }
    return sc;
}

}  // namespace lightloc

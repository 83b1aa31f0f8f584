#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "lightloc/io.hpp"
#include "lightloc/monitoring.hpp"
#include "lightloc/physical.hpp"
#include "lightloc/provisioning.hpp"
#include "lightloc/topology.hpp"

namespace lightloc {

// delta/tau judge the component between slot i-1 and slot i, so position 0
// carries only epsilon (no preceding reading exists for the first component).
struct PositionThresholds {
    double delta = std::numeric_limits<double>::quiet_NaN();
    double tau = std::numeric_limits<double>::quiet_NaN();
    double epsilon = std::numeric_limits<double>::quiet_NaN();
};

struct ThresholdTable {
    std::map<int, std::vector<PositionThresholds>> rows;  // lightpath id -> per slot
    double sensitivity_dbm = -70.0;
    double noise_floor_dbm = -80.0;
    double clamp_margin_db = 0.5;  // readings this close to the floor are clamped
    int window = 50;
};

struct SuspectPartition {
    std::vector<int> all, normal, faulty, suspect;  // ascending component ids
};

inline double average(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Conviction margins derived from nominal component parameters. They sit well
// above the measurement jitter and below the smallest failure magnitude, so
// jitter-free instances are judged exactly and jittered ones robustly.
constexpr double kAmpMargin = 1.5;
constexpr double kLossMargin = 1.0;
constexpr double kEpsilonMargin = 1.0;

// Moving-window split of labeled change magnitudes into conviction thresholds.
// normal_changes and faulty_changes are |x_i - x_{i-1}| instances whose middle
// component was healthy resp. failed.
inline PositionThresholds fit_pair_thresholds(bool amplifier,
                                              const std::vector<double>& normal_changes,
                                              const std::vector<double>& faulty_changes,
                                              int lightpath = -1, int position = -1) {
    if (normal_changes.empty() || faulty_changes.empty()) {
        throw InsufficientHistory(lightpath, position);
    }
    PositionThresholds t;
    if (amplifier) {
        // Healthy amplifiers show the full gain step, failed ones a smaller
        // one. A window that separates the classes pins both thresholds just
        // outside the healthy cluster so every monitored reading is judged
        // decisively; the margin never exceeds half the observed gap, and its
        // cap keeps failure magnitudes the window has not seen yet (all at
        // least twice the cap) on the conviction side. Overlapping windows
        // keep a suspect band between the unambiguous tails of the classes.
        double min_normal = *std::min_element(normal_changes.begin(), normal_changes.end());
        double max_faulty = *std::max_element(faulty_changes.begin(), faulty_changes.end());
        if (max_faulty < min_normal) {
            t.tau = t.delta = min_normal - std::min((min_normal - max_faulty) / 2.0, kAmpMargin);
            return t;
        }
        std::vector<double> tau_set, delta_set;
        for (double x : normal_changes) {
            if (x > max_faulty) tau_set.push_back(x);
        }
        for (double x : faulty_changes) {
            if (x < min_normal) delta_set.push_back(x);
        }
        t.tau = tau_set.empty() ? average(normal_changes) : average(tau_set);
        t.delta = delta_set.empty() ? average(faulty_changes) : average(delta_set);
    } else {
        // Extra loss raises the change, so the faulty class sits above.
        double max_normal = *std::max_element(normal_changes.begin(), normal_changes.end());
        double min_faulty = *std::min_element(faulty_changes.begin(), faulty_changes.end());
        if (max_normal < min_faulty) {
            t.tau = t.delta = max_normal + std::min((min_faulty - max_normal) / 2.0, kLossMargin);
            return t;
        }
        std::vector<double> tau_set, delta_set;
        for (double x : faulty_changes) {
            if (x > max_normal) tau_set.push_back(x);
        }
        for (double x : normal_changes) {
            if (x < min_faulty) delta_set.push_back(x);
        }
        t.tau = tau_set.empty() ? average(faulty_changes) : average(tau_set);
        t.delta = delta_set.empty() ? average(normal_changes) : average(delta_set);
    }
    t.delta = std::min(t.delta, t.tau);
    return t;
}

// clean/dirty are raw readings at one position: clean when no component at or
// before the position had failed, dirty otherwise.
inline double fit_epsilon(const std::vector<double>& clean, const std::vector<double>& dirty,
                          int lightpath = -1, int position = -1) {
    if (clean.empty() || dirty.empty()) throw InsufficientHistory(lightpath, position);
    double max_dirty = *std::max_element(dirty.begin(), dirty.end());
    double min_clean = *std::min_element(clean.begin(), clean.end());
    if (max_dirty < min_clean) {
        return min_clean - std::min((min_clean - max_dirty) / 2.0, kEpsilonMargin);
    }
    std::vector<double> filtered;
    for (double x : clean) {
        if (x > max_dirty) filtered.push_back(x);
    }
    return filtered.empty() ? average(clean) : average(filtered);
}

inline ThresholdTable nominal_thresholds(const ComponentGraph& g,
                                         const std::vector<Lightpath>& lps, const PowerModel& pm) {
    ThresholdTable table;
    table.sensitivity_dbm = pm.receiver_sensitivity_dbm;
    table.noise_floor_dbm = pm.noise_floor_dbm;
    PowerModel quiet = pm;
    quiet.jitter_sigma_db = 0.0;
    for (const auto& lp : lps) {
        Trace clean = propagate(lp, g, FailureScenario{}, quiet, 0);
        std::vector<PositionThresholds> row(lp.slots.size());
        for (std::size_t i = 0; i < lp.slots.size(); ++i) {
            row[i].epsilon = clean.slot_dbm[i] - kEpsilonMargin;
            if (i == 0) continue;
            const Component& c = g.components[lp.components[i]];
            if (is_amplifier(c.kind)) {
                row[i].delta = row[i].tau = c.nominal - kAmpMargin;
            } else if (is_wss(c.kind) || c.kind == ComponentKind::FiberSpan) {
                row[i].delta = row[i].tau = c.nominal + kLossMargin;
            }
        }
        table.rows[lp.id] = std::move(row);
    }
    return table;
}

// Calibrates thresholds from the trailing `window` labeled samples of a
// training dataset; positions without both classes in the window fall back to
// the nominal-derived values.
inline ThresholdTable fit_thresholds(const ComponentGraph& g, const Dataset& train,
                                     int window = 50) {
    ThresholdTable table = nominal_thresholds(g, train.lightpaths, train.power_model);
    table.window = window;
    int first = std::max(0, static_cast<int>(train.samples.size()) - window);
    for (std::size_t li = 0; li < train.lightpaths.size(); ++li) {
        const Lightpath& lp = train.lightpaths[li];
        auto& row = table.rows[lp.id];
        std::vector<std::vector<double>> pair_normal(lp.slots.size()), pair_faulty(lp.slots.size());
        std::vector<std::vector<double>> eps_clean(lp.slots.size()), eps_dirty(lp.slots.size());
        for (std::size_t s = first; s < train.samples.size(); ++s) {
            const auto& reading = train.samples[s].post.readings[li];
            const auto& scenario = train.samples[s].scenario;
            // Label by observable effect: a wavelength-selective failure on
            // another channel leaves this lightpath's readings nominal.
            auto affects = [&](int component) {
                for (const auto& fl : scenario.failures) {
                    if (fl.component == component && failure_affects_lightpath(fl, lp)) {
                        return true;
                    }
                }
                return false;
            };
            bool upstream_failed = affects(lp.components[0]);
            for (std::size_t i = 0; i < lp.slots.size(); ++i) {
                if (i > 0 && affects(lp.components[i])) upstream_failed = true;
                if (reading[i] == kAlpha) continue;
                (upstream_failed ? eps_dirty : eps_clean)[i].push_back(reading[i]);
                if (i == 0 || reading[i - 1] == kAlpha) continue;
                double floor_guard = table.noise_floor_dbm + table.clamp_margin_db;
                if (reading[i] <= floor_guard || reading[i - 1] <= floor_guard) continue;
                double change = std::abs(reading[i] - reading[i - 1]);
                (affects(lp.components[i]) ? pair_faulty : pair_normal)[i].push_back(change);
            }
        }
        for (std::size_t i = 0; i < lp.slots.size(); ++i) {
            try {
                row[i].epsilon = fit_epsilon(eps_clean[i], eps_dirty[i], lp.id, static_cast<int>(i));
            } catch (const InsufficientHistory&) {
            }
            if (i == 0) continue;
            const Component& c = g.components[lp.components[i]];
            if (!is_amplifier(c.kind) && !is_wss(c.kind) && c.kind != ComponentKind::FiberSpan) {
                continue;
            }
            try {
                PositionThresholds t =
                    fit_pair_thresholds(is_amplifier(c.kind), pair_normal[i], pair_faulty[i],
                                        lp.id, static_cast<int>(i));
                row[i].delta = t.delta;
                row[i].tau = t.tau;
            } catch (const InsufficientHistory&) {
            }
        }
    }
    return table;
}

// Rules-based reasoning: adjacent-reading power changes convict or clear the
// component between two monitors, readings at or above epsilon clear the whole
// prefix, the first reading alone judges the transmitting transponder, and the
// reception flag paired with the final reading judges the receiver. Verdicts
// merge across lightpaths with faulty taking precedence.
inline SuspectPartition reason(const ComponentGraph& g, const std::vector<Lightpath>& lps,
                               const MonitorSnapshot& snap, const ThresholdTable& table) {
    std::set<int> cleared, convicted, all;
    for (std::size_t li = 0; li < lps.size(); ++li) {
        const Lightpath& lp = lps[li];
        for (int c : lp.components) all.insert(c);
        auto it = table.rows.find(lp.id);
        if (it == table.rows.end()) {
            throw ConfigError("thresholds missing for lightpath " + std::to_string(lp.id));
        }
        const auto& row = it->second;
        if (row.size() != lp.slots.size()) {
            throw ConfigError("thresholds for lightpath " + std::to_string(lp.id) +
                              " cover " + std::to_string(row.size()) + " positions, expected " +
                              std::to_string(lp.slots.size()));
        }
        const auto& x = snap.readings[li];
        int n_slots = static_cast<int>(lp.slots.size());
        double clamp_limit = table.noise_floor_dbm + table.clamp_margin_db;
        auto clamped = [&](double v) { return v <= clamp_limit; };
        for (int i = 1; i < n_slots; ++i) {
            if (x[i - 1] == kAlpha || x[i] == kAlpha) continue;
            if (clamped(x[i - 1]) || clamped(x[i])) continue;
            if (std::isnan(row[i].delta)) continue;
            double change = std::abs(x[i] - x[i - 1]);
            const Component& c = g.components[lp.components[i]];
            if (is_amplifier(c.kind)) {
                if (change >= row[i].tau) cleared.insert(c.id);
                else if (change < row[i].delta) convicted.insert(c.id);
            } else {
                if (change >= row[i].tau) convicted.insert(c.id);
                else if (change < row[i].delta) cleared.insert(c.id);
            }
        }
        int last_pass = -1;
        for (int i = 0; i < n_slots; ++i) {
            if (x[i] != kAlpha && x[i] >= row[i].epsilon) last_pass = i;
        }
        for (int i = 0; i <= last_pass; ++i) cleared.insert(lp.components[i]);
        if (x[0] != kAlpha && !clamped(x[0]) && x[0] < row[0].epsilon) {
            convicted.insert(lp.components.front());
        }
        if (n_slots > 0 && x[n_slots - 1] != kAlpha) {
            if (x.back() == 1.0) {
                cleared.insert(lp.components.back());
            } else if (x[n_slots - 1] >= table.sensitivity_dbm) {
                convicted.insert(lp.components.back());
            }
        }
    }
    SuspectPartition p;
    p.all.assign(all.begin(), all.end());
    for (int c : p.all) {
        if (convicted.count(c)) p.faulty.push_back(c);
        else if (cleared.count(c)) p.normal.push_back(c);
        else p.suspect.push_back(c);
    }
    return p;
}

inline Json thresholds_to_json(const ThresholdTable& t) {
    Json j;
    j["format"] = "lightloc-thresholds";
    j["version"] = 1;
    j["window"] = t.window;
    j["sensitivity_dbm"] = format_db(t.sensitivity_dbm);
    j["noise_floor_dbm"] = format_db(t.noise_floor_dbm);
    j["clamp_margin_db"] = format_db(t.clamp_margin_db);
    Json rows = Json::array();
    for (const auto& [id, row] : t.rows) {
        Json rj;
        rj["lightpath"] = id;
        Json positions = Json::array();
        for (const auto& p : row) {
            Json pj;
            pj["delta"] = std::isnan(p.delta) ? Json(nullptr) : Json(format_db(p.delta));
            pj["tau"] = std::isnan(p.tau) ? Json(nullptr) : Json(format_db(p.tau));
            pj["epsilon"] = std::isnan(p.epsilon) ? Json(nullptr) : Json(format_db(p.epsilon));
            positions.push_back(pj);
        }
        rj["positions"] = positions;
        rows.push_back(rj);
    }
    j["lightpaths"] = rows;
    return j;
}

inline ThresholdTable thresholds_from_json(const Json& j) {
    if (!j.contains("format") || j["format"] != "lightloc-thresholds") {
        throw ParseError("not a thresholds file");
    }
    ThresholdTable t;
    t.window = require_field(j, "window").get<int>();
    t.sensitivity_dbm = parse_db(require_field(j, "sensitivity_dbm").get<std::string>());
    t.noise_floor_dbm = parse_db(require_field(j, "noise_floor_dbm").get<std::string>());
    t.clamp_margin_db = parse_db(require_field(j, "clamp_margin_db").get<std::string>());
    for (const auto& rj : require_field(j, "lightpaths")) {
        std::vector<PositionThresholds> row;
        for (const auto& pj : require_field(rj, "positions")) {
            PositionThresholds p;
            if (!pj["delta"].is_null()) p.delta = parse_db(pj["delta"].get<std::string>());
            if (!pj["tau"].is_null()) p.tau = parse_db(pj["tau"].get<std::string>());
            if (!pj["epsilon"].is_null()) p.epsilon = parse_db(pj["epsilon"].get<std::string>());
            row.push_back(p);
        }
        t.rows[require_field(rj, "lightpath").get<int>()] = std::move(row);
    }
    return t;
}

inline void write_thresholds(const ThresholdTable& t, const std::string& path) {
    atomic_write_file(path, thresholds_to_json(t).dump(1) + "\n");
}

inline ThresholdTable load_thresholds(const std::string& path) {
    return thresholds_from_json(parse_json_file(path));
}

}  // namespace lightloc

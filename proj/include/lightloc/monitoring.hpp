#pragma once

#include <atomic>
#include <cmath>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lightloc/io.hpp"
#include "lightloc/physical.hpp"
#include "lightloc/provisioning.hpp"
#include "lightloc/rng.hpp"
#include "lightloc/topology.hpp"

namespace lightloc {

// Sentinel for undeployed monitor positions, strictly below any physical dBm.
constexpr double kAlpha = -999.0;

// Deployed positions are 1-based ranks in the canonical slot order; position p
// monitors opm_slots[p - 1].
struct Deployment {
    std::vector<int> deployed;
    std::vector<bool> psi;  // psi[slot id] = monitored
    int interval = 0;

    bool monitors(int slot_id) const {
        return slot_id >= 0 && slot_id < static_cast<int>(psi.size()) && psi[slot_id];
    }
};

inline Deployment deploy_uniform(int total_slots, int count) {
    if (count < 0 || count > total_slots) {
        throw ConfigError("monitor count " + std::to_string(count) + " outside [0, " +
                          std::to_string(total_slots) + "]");
    }
    Deployment d;
    d.psi.assign(total_slots, false);
    if (count == 0) return d;
    d.interval = total_slots / count;
    for (int m = 1; m <= count; ++m) {
        d.deployed.push_back(m * d.interval);
        d.psi[m * d.interval - 1] = true;
    }
    return d;
}

inline Deployment deploy_uniform(const ComponentGraph& g, int count) {
    return deploy_uniform(static_cast<int>(g.opm_slots.size()), count);
}

inline Deployment deploy_uniform(const ComponentGraph& g, double fraction) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw ConfigError("monitor fraction must lie in [0, 1]");
    }
    int total = static_cast<int>(g.opm_slots.size());
    int count = static_cast<int>(std::floor(fraction * total + 0.5));
    return deploy_uniform(total, std::min(count, total));
}

// Per lightpath: one entry per slot in path order (sentinel where undeployed),
// then the reception flag as the terminal entry.
struct MonitorSnapshot {
    std::vector<std::vector<double>> readings;

    double flag(int lp_index) const { return readings[lp_index].back(); }
};

inline MonitorSnapshot snapshot(const ComponentGraph& g, const std::vector<Lightpath>& lps,
                                const Deployment& dep, const FailureScenario& scenario,
                                const PowerModel& pm, std::uint64_t seed) {
    MonitorSnapshot s;
    s.readings.reserve(lps.size());
    for (const auto& lp : lps) {
        Trace tr = propagate(lp, g, scenario, pm, derive_seed(seed, "lightpath", lp.id));
        std::vector<double> row(lp.slots.size() + 1, kAlpha);
        for (std::size_t j = 0; j < lp.slots.size(); ++j) {
            if (dep.monitors(lp.slots[j])) row[j] = tr.slot_dbm[j];
        }
        row.back() = tr.flag ? 1.0 : 0.0;
        s.readings.push_back(std::move(row));
    }
    return s;
}

struct Sample {
    MonitorSnapshot post;
    FailureScenario scenario;
};

struct DatasetConfig {
    Topology topology;
    int lightpath_count = 10;
    int sample_count = 100;
    std::vector<int> n_f_set = {1};
    KindFilter filter = KindFilter::Any;
    double opm_fraction = 1.0;
    int opm_count = -1;  // overrides the fraction when non-negative
    int wavelengths = 32;
    PowerModel power_model;
    std::uint64_t seed = 0;
    std::uint64_t draw_seed = 0;  // scenario and jitter stream; 0 reuses seed
    int jobs = 1;
};

// One pre-failure snapshot is shared by every sample; each sample adds a
// failure scenario and the post-failure snapshot.
struct Dataset {
    Topology topology;
    std::uint64_t digest = 0;
    std::vector<Lightpath> lightpaths;
    Deployment deployment;
    PowerModel power_model;
    std::vector<int> n_f_set;
    KindFilter filter = KindFilter::Any;
    int wavelengths = 32;
    std::uint64_t seed = 0;
    MonitorSnapshot pre;
    std::vector<Sample> samples;
};

inline std::vector<Lightpath> draw_lightpaths(const ComponentGraph& g, int count, int wavelengths,
                                              std::uint64_t seed) {
    int n = static_cast<int>(g.topo.nodes.size());
    if (n < 2) throw ConfigError("need at least two nodes to provision lightpaths");
    SpffRouter router(g, wavelengths);
    RoutingResult out;
    Rng rng(derive_seed(seed, "requests"));
    int attempts = 0, limit = 200 + 40 * count;
    int req_id = 0;
    while (static_cast<int>(out.lightpaths.size()) < count) {
        if (++attempts > limit) {
            throw ConfigError("could not provision " + std::to_string(count) +
                              " lightpaths; network capacity exhausted");
        }
        LightpathRequest req;
        req.id = req_id;
        req.src = rng.below(n);
        req.dst = rng.below(n);
        if (req.src == req.dst) continue;
        if (router.provision(req, out)) ++req_id;
    }
    out.lightpaths.resize(count);
    for (auto& lp : out.lightpaths) {
        if (lp.pair >= count) lp.pair = -1;
    }
    return out.lightpaths;
}

inline Dataset generate_dataset(const DatasetConfig& cfg) {
    Dataset ds;
    ds.topology = cfg.topology;
    auto g = build_component_graph(cfg.topology);
    ds.digest = graph_digest(g);
    ds.lightpaths = draw_lightpaths(g, cfg.lightpath_count, cfg.wavelengths, cfg.seed);
    ds.deployment = cfg.opm_count >= 0 ? deploy_uniform(g, cfg.opm_count)
                                       : deploy_uniform(g, cfg.opm_fraction);
    ds.power_model = cfg.power_model;
    ds.n_f_set = cfg.n_f_set;
    ds.filter = cfg.filter;
    ds.wavelengths = cfg.wavelengths;
    ds.seed = cfg.seed;
    std::uint64_t draws = cfg.draw_seed ? cfg.draw_seed : cfg.seed;
    ds.pre = snapshot(g, ds.lightpaths, ds.deployment, FailureScenario{}, cfg.power_model,
                      derive_seed(draws, "pre"));
    ds.samples.resize(cfg.sample_count);
    auto make_sample = [&](int i) {
        Rng rng(derive_seed(draws, "scenario", i));
        Sample s;
        s.scenario = sample_failure_scenario(g, ds.lightpaths, cfg.n_f_set, cfg.filter,
                                             cfg.power_model, rng);
        s.post = snapshot(g, ds.lightpaths, ds.deployment, s.scenario, cfg.power_model,
                          derive_seed(draws, "post", i));
        ds.samples[i] = std::move(s);
    };
    int jobs = std::max(1, cfg.jobs);
    if (jobs == 1 || cfg.sample_count < 2) {
        for (int i = 0; i < cfg.sample_count; ++i) make_sample(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        int workers = std::min(jobs, cfg.sample_count);
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int i = next.fetch_add(1); i < cfg.sample_count; i = next.fetch_add(1)) {
                    make_sample(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    return ds;
}

inline std::string join_readings(const std::vector<double>& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ' ';
        out += format_db(row[i]);
    }
    return out;
}

inline std::vector<double> split_readings(const std::string& text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) out.push_back(parse_db(tok));
    return out;
}

inline Json snapshot_to_json(const MonitorSnapshot& s) {
    Json rows = Json::array();
    for (const auto& row : s.readings) rows.push_back(join_readings(row));
    return rows;
}

inline MonitorSnapshot snapshot_from_json(const Json& j) {
    MonitorSnapshot s;
    for (const auto& row : j) s.readings.push_back(split_readings(row.get<std::string>()));
    return s;
}

inline Json lightpath_to_json(const Lightpath& lp) {
    Json j;
    j["id"] = lp.id;
    j["wavelength"] = lp.wavelength;
    j["src"] = lp.src;
    j["dst"] = lp.dst;
    j["pair"] = lp.pair;
    j["nodes"] = lp.node_path;
    j["links"] = lp.link_path;
    j["fibers"] = lp.fibers;
    j["components"] = lp.components;
    j["slots"] = lp.slots;
    return j;
}

inline Lightpath lightpath_from_json(const Json& j) {
    Lightpath lp;
    lp.id = require_field(j, "id").get<int>();
    lp.wavelength = require_field(j, "wavelength").get<int>();
    lp.src = require_field(j, "src").get<int>();
    lp.dst = require_field(j, "dst").get<int>();
    lp.pair = require_field(j, "pair").get<int>();
    lp.node_path = require_field(j, "nodes").get<std::vector<int>>();
    lp.link_path = require_field(j, "links").get<std::vector<int>>();
    lp.fibers = require_field(j, "fibers").get<std::vector<int>>();
    lp.components = require_field(j, "components").get<std::vector<int>>();
    lp.slots = require_field(j, "slots").get<std::vector<int>>();
    return lp;
}

inline Json power_model_to_json(const PowerModel& pm) {
    Json j;
    j["jitter_sigma_db"] = format_db(pm.jitter_sigma_db);
    j["noise_floor_dbm"] = format_db(pm.noise_floor_dbm);
    j["receiver_sensitivity_dbm"] = format_db(pm.receiver_sensitivity_dbm);
    j["break_penalty_db"] = format_db(pm.break_penalty_db);
    j["filtering_penalty_db"] = format_db(pm.filtering_penalty_db);
    return j;
}

inline PowerModel power_model_from_json(const Json& j) {
    PowerModel pm;
    pm.jitter_sigma_db = parse_db(require_field(j, "jitter_sigma_db").get<std::string>());
    pm.noise_floor_dbm = parse_db(require_field(j, "noise_floor_dbm").get<std::string>());
    pm.receiver_sensitivity_dbm =
        parse_db(require_field(j, "receiver_sensitivity_dbm").get<std::string>());
    pm.break_penalty_db = parse_db(require_field(j, "break_penalty_db").get<std::string>());
    pm.filtering_penalty_db = parse_db(require_field(j, "filtering_penalty_db").get<std::string>());
    return pm;
}

inline Json dataset_to_json(const Dataset& ds) {
    Json j;
    j["format"] = "lightloc-dataset";
    j["version"] = 1;
    j["seed"] = ds.seed;
    j["topology"] = topology_to_json(ds.topology);
    j["graph_digest"] = ds.digest;
    j["power_model"] = power_model_to_json(ds.power_model);
    j["n_f_set"] = ds.n_f_set;
    j["failure_filter"] = kind_filter_name(ds.filter);
    j["wavelengths"] = ds.wavelengths;
    Json dep;
    dep["interval"] = ds.deployment.interval;
    dep["total"] = static_cast<int>(ds.deployment.psi.size());
    dep["positions"] = ds.deployment.deployed;
    j["deployment"] = dep;
    Json lps = Json::array();
    for (const auto& lp : ds.lightpaths) lps.push_back(lightpath_to_json(lp));
    j["lightpaths"] = lps;
    j["pre"] = snapshot_to_json(ds.pre);
    Json samples = Json::array();
    for (const auto& s : ds.samples) {
        Json sj;
        sj["post"] = snapshot_to_json(s.post);
        Json fails = Json::array();
        for (const auto& f : s.scenario.failures) {
            Json fj;
            fj["component"] = f.component;
            fj["type"] = failure_name(f.type);
            fj["magnitude_db"] = format_db(f.magnitude_db);
            fj["wavelength"] = f.wavelength;
            fails.push_back(fj);
        }
        sj["failures"] = fails;
        samples.push_back(sj);
    }
    j["samples"] = samples;
    return j;
}

inline Dataset dataset_from_json(const Json& j) {
    if (!j.contains("format") || j["format"] != "lightloc-dataset") {
        throw ParseError("not a dataset file");
    }
    Dataset ds;
    ds.seed = require_field(j, "seed").get<std::uint64_t>();
    ds.topology = topology_from_json(require_field(j, "topology"));
    ds.digest = require_field(j, "graph_digest").get<std::uint64_t>();
    ds.power_model = power_model_from_json(require_field(j, "power_model"));
    ds.n_f_set = require_field(j, "n_f_set").get<std::vector<int>>();
    ds.filter = kind_filter_from_name(require_field(j, "failure_filter").get<std::string>());
    ds.wavelengths = require_field(j, "wavelengths").get<int>();
    const Json& dep = require_field(j, "deployment");
    ds.deployment.interval = require_field(dep, "interval").get<int>();
    ds.deployment.deployed = require_field(dep, "positions").get<std::vector<int>>();
    ds.deployment.psi.assign(require_field(dep, "total").get<int>(), false);
    for (int p : ds.deployment.deployed) {
        if (p < 1 || p > static_cast<int>(ds.deployment.psi.size())) {
            throw ParseError("deployed position out of range: " + std::to_string(p));
        }
        ds.deployment.psi[p - 1] = true;
    }
    for (const auto& lj : require_field(j, "lightpaths")) {
        ds.lightpaths.push_back(lightpath_from_json(lj));
    }
    ds.pre = snapshot_from_json(require_field(j, "pre"));
    for (const auto& sj : require_field(j, "samples")) {
        Sample s;
        s.post = snapshot_from_json(require_field(sj, "post"));
        for (const auto& fj : require_field(sj, "failures")) {
            Failure f;
            f.component = require_field(fj, "component").get<int>();
            f.type = failure_from_name(require_field(fj, "type").get<std::string>());
            f.magnitude_db = parse_db(require_field(fj, "magnitude_db").get<std::string>());
            f.wavelength = require_field(fj, "wavelength").get<int>();
            s.scenario.failures.push_back(f);
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

inline std::string dataset_to_string(const Dataset& ds) { return dataset_to_json(ds).dump(1) + "\n"; }

inline void write_dataset(const Dataset& ds, const std::string& path) {
    atomic_write_file(path, dataset_to_string(ds));
}

inline Dataset load_dataset(const std::string& path) {
    return dataset_from_json(parse_json_file(path));
}

// Rebuilds the component graph from the embedded topology and checks it
// matches the graph the dataset was generated on.
inline ComponentGraph dataset_graph(const Dataset& ds) {
    auto g = build_component_graph(ds.topology);
    if (graph_digest(g) != ds.digest) {
        throw ParseError("dataset graph digest mismatch; topology or build changed");
    }
    return g;
}

}  // namespace lightloc

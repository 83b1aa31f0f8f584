#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lightloc/errors.hpp"
#include "lightloc/io.hpp"
#include "lightloc/rng.hpp"

namespace lightloc {

// Network model: nodes host 1xk line-WSSs facing neighbors and nxm local-WSSs
// facing transponders; links carry H fibers per direction, each fiber a chain
// of spans separated by inline amplifiers. Every lightpath-traversable
// adjacency between two components is a candidate monitor slot.

struct WssParams {
    int k = 32;  // ports of the 1xk line-WSS available for intra-node wiring
    int m = 8;   // line-side ports per local-WSS
    int n = 24;  // transponder-side ports per local-WSS
};

struct NodeSpec {
    std::string name;
};

struct LinkSpec {
    int a = -1;
    int b = -1;
    double length_km = 0.0;
    int fibers = 1;  // per direction
};

struct Topology {
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    WssParams wss;
    double span_length_km = 80.0;
    std::uint64_t seed = 0;

    int spans(int link) const {
        return static_cast<int>(std::ceil(links[link].length_km / span_length_km));
    }

    // H_{i,j} summed over all neighbors of node i.
    int fiber_sum(int node) const {
        int s = 0;
        for (const auto& l : links) {
            if (l.a == node || l.b == node) s += l.fibers;
        }
        return s;
    }

    int lambda(int node) const {
        int s = fiber_sum(node);
        return (s + wss.m - 1) / wss.m;
    }

    int degree(int node) const { return fiber_sum(node) + lambda(node); }

    // (neighbor node, link index, fibers) sorted by neighbor id.
    std::vector<std::tuple<int, int, int>> neighbors(int node) const {
        std::vector<std::tuple<int, int, int>> out;
        for (int li = 0; li < static_cast<int>(links.size()); ++li) {
            const auto& l = links[li];
            if (l.a == node) out.emplace_back(l.b, li, l.fibers);
            if (l.b == node) out.emplace_back(l.a, li, l.fibers);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    int node_index(const std::string& name) const {
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
            if (nodes[i].name == name) return i;
        }
        return -1;
    }
};

struct ComponentCounts {
    long total = 0;
    long node_side = 0;
    long link_side = 0;
};

struct Validated {};  // tag: a Topology that passed validate()

inline const Topology& validate(const Topology& topo) {
    for (std::size_t li = 0; li < topo.links.size(); ++li) {
        const auto& l = topo.links[li];
        if (l.a < 0 || l.b < 0 || l.a >= static_cast<int>(topo.nodes.size()) ||
            l.b >= static_cast<int>(topo.nodes.size())) {
            throw ConfigError("link " + std::to_string(li) + " references unknown node");
        }
        if (l.a == l.b) throw ConfigError("self-link at node " + topo.nodes[l.a].name);
        if (l.fibers < 1) throw ConfigError("link " + std::to_string(li) + " has no fibers");
        if (l.length_km <= 0) throw ConfigError("link " + std::to_string(li) + " has non-positive length");
        for (std::size_t lj = li + 1; lj < topo.links.size(); ++lj) {
            const auto& o = topo.links[lj];
            if ((o.a == l.a && o.b == l.b) || (o.a == l.b && o.b == l.a)) {
                throw ConfigError("duplicate link between " + topo.nodes[l.a].name + " and " +
                                  topo.nodes[l.b].name);
            }
        }
    }
    if (topo.wss.m > topo.wss.n) throw ConfigError("local-WSS requires m <= n");
    if (topo.wss.k < 1 || topo.wss.m < 1) throw ConfigError("WSS port counts must be positive");
    if (topo.span_length_km <= 0) throw ConfigError("span length must be positive");

    for (int i = 0; i < static_cast<int>(topo.nodes.size()); ++i) {
        int total = topo.fiber_sum(i);
        // The line-WSS of each incoming fiber must reach every other degree's
        // fiber plus one local port.
        for (const auto& [j, li, h] : topo.neighbors(i)) {
            (void)li;
            (void)j;
            long required = static_cast<long>(total - h) + 1;
            if (required > topo.wss.k) {
                throw PortCapacityExceeded(topo.nodes[i].name, required, topo.wss.k);
            }
        }
        long lam = topo.lambda(i);
        if (static_cast<long>(topo.wss.m) * lam < total) {
            throw PortCapacityExceeded(topo.nodes[i].name, total, topo.wss.m * lam);
        }
    }
    return topo;
}

inline ComponentCounts count_components(const Topology& topo) {
    ComponentCounts c;
    for (int i = 0; i < static_cast<int>(topo.nodes.size()); ++i) {
        long lam = topo.lambda(i);
        long h = topo.fiber_sum(i);
        c.node_side += topo.wss.n * lam + 2 * lam + 4 * h;
    }
    for (int li = 0; li < static_cast<int>(topo.links.size()); ++li) {
        long s = topo.spans(li);
        c.link_side += 2L * topo.links[li].fibers * (2 * s - 1);  // both directions
    }
    c.total = c.node_side + c.link_side;
    return c;
}

inline ComponentCounts count_opm_slots(const Topology& topo) {
    ComponentCounts c;
    for (int i = 0; i < static_cast<int>(topo.nodes.size()); ++i) {
        long lam = topo.lambda(i);
        long interconnect = 0;
        long h = 0;
        auto nb = topo.neighbors(i);
        for (const auto& [j, li, hj] : nb) {
            (void)j;
            (void)li;
            h += hj;
            for (const auto& [l, lj, hl] : nb) {
                (void)l;
                if (lj != li) interconnect += static_cast<long>(hj) * hl;
            }
        }
        c.node_side += 2L * topo.wss.n * lam + 6 * h + interconnect;
    }
    for (int li = 0; li < static_cast<int>(topo.links.size()); ++li) {
        long s = topo.spans(li);
        c.link_side += 2L * topo.links[li].fibers * 2 * (s - 1);  // both directions
    }
    c.total = c.node_side + c.link_side;
    return c;
}

enum class ComponentKind { Transponder, LocalWss, LineWss, Preamp, Booster, Ila, FiberSpan };

inline const char* kind_name(ComponentKind k) {
    switch (k) {
        case ComponentKind::Transponder: return "transponder";
        case ComponentKind::LocalWss: return "local_wss";
        case ComponentKind::LineWss: return "line_wss";
        case ComponentKind::Preamp: return "preamp";
        case ComponentKind::Booster: return "booster";
        case ComponentKind::Ila: return "ila";
        case ComponentKind::FiberSpan: return "fiber_span";
    }
    return "?";
}

inline bool is_amplifier(ComponentKind k) {
    return k == ComponentKind::Preamp || k == ComponentKind::Booster || k == ComponentKind::Ila;
}

inline bool is_wss(ComponentKind k) {
    return k == ComponentKind::LocalWss || k == ComponentKind::LineWss;
}

struct Component {
    int id = -1;
    ComponentKind kind = ComponentKind::Transponder;
    int node = -1;      // owning node for intra-node components
    int link = -1;      // owning link for spans and ILAs
    int dir = -1;       // 0: link.a -> link.b, 1: reverse
    int fiber = -1;
    int span = -1;      // position along the fiber chain
    int local = -1;     // local-WSS pair index
    int port = -1;      // transponder port within its local-WSS
    int peer = -1;      // neighbor node for line-side components
    bool outbound = false;  // line-WSS toward neighbor / local-WSS add side
    // gain dB for amplifiers, insertion loss dB for WSS, loss dB for spans,
    // launch power dBm for transponders
    double nominal = 0.0;
};

// Fixed values and draw ranges for nominal parameters.
struct NominalRanges {
    double launch_dbm = -1.0;
    double local_wss_lo = 3.3, local_wss_hi = 6.8;
    double line_wss = 5.0;
    double preamp_lo = 18.0, preamp_hi = 32.0;
    double booster_lo = 10.0, booster_hi = 20.0;
    double ila_lo = 20.0, ila_hi = 32.0;
    double fiber_db_per_km = 0.2;
};

struct OpmSlot {
    int id = -1;    // position in canonical order, 0-based
    int from = -1;  // component the signal leaves
    int to = -1;    // component the signal enters
};

struct ComponentGraph {
    Topology topo;
    std::vector<Component> components;
    std::vector<OpmSlot> opm_slots;

    // Wiring lookups, all indexed by the ids above.
    std::vector<std::vector<int>> local_add;                      // [node][local]
    std::vector<std::vector<int>> local_drop;                     // [node][local]
    std::vector<std::vector<std::vector<int>>> transponders;      // [node][local][port]
    // per node, keyed by (neighbor, fiber)
    struct LineGroup {
        int line_in = -1, line_out = -1, preamp = -1, booster = -1;
        int local = -1;  // local-WSS pair this line pair is wired to
        int link = -1;
    };
    std::vector<std::map<std::pair<int, int>, LineGroup>> line_groups;  // [node]
    std::vector<std::vector<std::vector<std::vector<int>>>> chains;     // [link][dir][fiber] -> ids

    std::unordered_map<std::uint64_t, int> edge_slot;

    int slot_between(int from, int to) const {
        auto it = edge_slot.find((static_cast<std::uint64_t>(from) << 32) | static_cast<std::uint32_t>(to));
        return it == edge_slot.end() ? -1 : it->second;
    }

    const LineGroup& group(int node, int neighbor, int fiber) const {
        return line_groups[node].at({neighbor, fiber});
    }
};

inline ComponentGraph build_component_graph(const Topology& topology, NominalRanges ranges = {}) {
    validate(topology);
    ComponentGraph g;
    g.topo = topology;
    const Topology& topo = g.topo;
    Rng rng(derive_seed(topo.seed, "graph"));
    const int nn = static_cast<int>(topo.nodes.size());

    auto add_component = [&](Component c) {
        c.id = static_cast<int>(g.components.size());
        g.components.push_back(c);
        return c.id;
    };

    g.local_add.resize(nn);
    g.local_drop.resize(nn);
    g.transponders.resize(nn);
    g.line_groups.resize(nn);
    g.chains.assign(topo.links.size(), {});

    for (int i = 0; i < nn; ++i) {
        int lam = topo.lambda(i);
        for (int a = 0; a < lam; ++a) {
            Component add{.kind = ComponentKind::LocalWss, .node = i, .local = a, .outbound = true,
                          .nominal = rng.uniform(ranges.local_wss_lo, ranges.local_wss_hi)};
            Component drop{.kind = ComponentKind::LocalWss, .node = i, .local = a, .outbound = false,
                           .nominal = rng.uniform(ranges.local_wss_lo, ranges.local_wss_hi)};
            g.local_add[i].push_back(add_component(add));
            g.local_drop[i].push_back(add_component(drop));
        }
        g.transponders[i].resize(lam);
        for (int a = 0; a < lam; ++a) {
            for (int t = 0; t < topo.wss.n; ++t) {
                Component tp{.kind = ComponentKind::Transponder, .node = i, .local = a, .port = t,
                             .nominal = ranges.launch_dbm};
                g.transponders[i][a].push_back(add_component(tp));
            }
        }
        // Line pairs in (neighbor, fiber) order, round-robin onto local pairs.
        int pair_idx = 0;
        for (const auto& [j, li, h] : topo.neighbors(i)) {
            for (int f = 0; f < h; ++f) {
                ComponentGraph::LineGroup grp;
                grp.link = li;
                grp.local = lam > 0 ? pair_idx % lam : -1;
                grp.line_in = add_component({.kind = ComponentKind::LineWss, .node = i, .fiber = f,
                                             .peer = j, .outbound = false, .nominal = ranges.line_wss});
                grp.line_out = add_component({.kind = ComponentKind::LineWss, .node = i, .fiber = f,
                                              .peer = j, .outbound = true, .nominal = ranges.line_wss});
                grp.preamp = add_component({.kind = ComponentKind::Preamp, .node = i, .fiber = f,
                                            .peer = j,
                                            .nominal = rng.uniform(ranges.preamp_lo, ranges.preamp_hi)});
                grp.booster = add_component({.kind = ComponentKind::Booster, .node = i, .fiber = f,
                                             .peer = j, .outbound = true,
                                             .nominal = rng.uniform(ranges.booster_lo, ranges.booster_hi)});
                g.line_groups[i][{j, f}] = grp;
                ++pair_idx;
            }
        }
    }

    for (int li = 0; li < static_cast<int>(topo.links.size()); ++li) {
        const auto& l = topo.links[li];
        int s = topo.spans(li);
        g.chains[li].assign(2, std::vector<std::vector<int>>(l.fibers));
        for (int dir = 0; dir < 2; ++dir) {
            for (int f = 0; f < l.fibers; ++f) {
                auto& chain = g.chains[li][dir][f];
                double remaining = l.length_km;
                for (int sp = 0; sp < s; ++sp) {
                    double km = std::min(topo.span_length_km, remaining);
                    remaining -= km;
                    chain.push_back(add_component({.kind = ComponentKind::FiberSpan, .link = li,
                                                   .dir = dir, .fiber = f, .span = sp,
                                                   .nominal = ranges.fiber_db_per_km * km}));
                    if (sp + 1 < s) {
                        chain.push_back(add_component({.kind = ComponentKind::Ila, .link = li,
                                                       .dir = dir, .fiber = f, .span = sp,
                                                       .nominal = rng.uniform(ranges.ila_lo, ranges.ila_hi)}));
                    }
                }
            }
        }
    }

    // Candidate monitor slots in canonical order: node blocks first, then link
    // blocks, both in build order.
    auto add_slot = [&](int from, int to) {
        int id = static_cast<int>(g.opm_slots.size());
        g.opm_slots.push_back({id, from, to});
        g.edge_slot[(static_cast<std::uint64_t>(from) << 32) | static_cast<std::uint32_t>(to)] = id;
    };

    for (int i = 0; i < nn; ++i) {
        int lam = topo.lambda(i);
        for (int a = 0; a < lam; ++a) {
            for (int t = 0; t < topo.wss.n; ++t) add_slot(g.transponders[i][a][t], g.local_add[i][a]);
        }
        for (int a = 0; a < lam; ++a) {
            for (int t = 0; t < topo.wss.n; ++t) add_slot(g.local_drop[i][a], g.transponders[i][a][t]);
        }
        auto& groups = g.line_groups[i];
        for (auto& [key, grp] : groups) add_slot(g.local_add[i][grp.local], grp.line_out);
        for (auto& [key, grp] : groups) add_slot(grp.line_in, g.local_drop[i][grp.local]);
        for (auto& [key, grp] : groups) add_slot(grp.line_out, grp.booster);
        for (auto& [key, grp] : groups) add_slot(grp.preamp, grp.line_in);
        for (auto& [key, grp] : groups) {
            int dir = topo.links[grp.link].a == i ? 0 : 1;
            add_slot(grp.booster, g.chains[grp.link][dir][key.second].front());
        }
        for (auto& [key, grp] : groups) {
            int dir = topo.links[grp.link].a == i ? 1 : 0;  // incoming chain
            add_slot(g.chains[grp.link][dir][key.second].back(), grp.preamp);
        }
        for (auto& [kin, gin] : groups) {
            for (auto& [kout, gout] : groups) {
                if (kin.first != kout.first) add_slot(gin.line_in, gout.line_out);
            }
        }
    }
    for (int li = 0; li < static_cast<int>(topo.links.size()); ++li) {
        for (int dir = 0; dir < 2; ++dir) {
            for (const auto& chain : g.chains[li][dir]) {
                for (std::size_t c = 0; c + 1 < chain.size(); ++c) add_slot(chain[c], chain[c + 1]);
            }
        }
    }
    return g;
}

// 64-bit digest over structure and nominals; datasets embed it so downstream
// commands can verify they rebuilt the same graph.
inline std::uint64_t graph_digest(const ComponentGraph& g) {
    std::string acc;
    acc.reserve(g.components.size() * 24);
    for (const auto& c : g.components) {
        acc += kind_name(c.kind);
        acc += format_db(c.nominal, 6);
        acc += '|';
    }
    for (const auto& s : g.opm_slots) {
        acc += std::to_string(s.from);
        acc += ',';
        acc += std::to_string(s.to);
        acc += ';';
    }
    return fnv1a64(acc);
}

inline Json topology_to_json(const Topology& topo) {
    Json j;
    j["nodes"] = Json::array();
    for (const auto& n : topo.nodes) j["nodes"].push_back(n.name);
    j["links"] = Json::array();
    for (const auto& l : topo.links) {
        Json lj;
        lj["a"] = topo.nodes[l.a].name;
        lj["b"] = topo.nodes[l.b].name;
        lj["length_km"] = l.length_km;
        lj["fibers"] = l.fibers;
        j["links"].push_back(lj);
    }
    j["wss"] = Json{{"k", topo.wss.k}, {"m", topo.wss.m}, {"n", topo.wss.n}};
    j["span_km"] = topo.span_length_km;
    j["seed"] = topo.seed;
    return j;
}

inline Topology topology_from_json(const Json& j, const std::string& where = "topology") {
    Topology t;
    for (const auto& n : require_field(j, "nodes", where)) {
        t.nodes.push_back({n.get<std::string>()});
    }
    for (const auto& lj : require_field(j, "links", where)) {
        LinkSpec l;
        l.a = t.node_index(require_field(lj, "a", where).get<std::string>());
        l.b = t.node_index(require_field(lj, "b", where).get<std::string>());
        if (l.a < 0 || l.b < 0) throw ParseError(where + ": link references unknown node");
        l.length_km = require_field(lj, "length_km", where).get<double>();
        l.fibers = lj.value("fibers", 1);
        t.links.push_back(l);
    }
    if (j.contains("wss")) {
        const auto& w = j["wss"];
        t.wss.k = w.value("k", t.wss.k);
        t.wss.m = w.value("m", t.wss.m);
        t.wss.n = w.value("n", t.wss.n);
    }
    t.span_length_km = j.value("span_km", t.span_length_km);
    t.seed = j.value("seed", 0ull);
    return t;
}

inline Topology load_topology(const std::filesystem::path& path) {
    return topology_from_json(parse_json_file(path), path.string());
}

inline Json graph_to_json(const ComponentGraph& g) {
    Json j;
    j["topology"] = topology_to_json(g.topo);
    j["components"] = Json::array();
    for (const auto& c : g.components) {
        Json cj;
        cj["id"] = c.id;
        cj["kind"] = kind_name(c.kind);
        cj["nominal"] = format_db(c.nominal, 6);
        if (c.node >= 0) cj["node"] = g.topo.nodes[c.node].name;
        if (c.link >= 0) {
            cj["link"] = c.link;
            cj["dir"] = c.dir;
            cj["fiber"] = c.fiber;
            cj["span"] = c.span;
        }
        j["components"].push_back(cj);
    }
    j["slots"] = Json::array();
    for (const auto& s : g.opm_slots) j["slots"].push_back(Json::array({s.from, s.to}));
    return j;
}

}  // namespace lightloc

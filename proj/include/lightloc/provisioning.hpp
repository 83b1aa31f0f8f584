#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <vector>

#include "lightloc/topology.hpp"

namespace lightloc {

struct LightpathRequest {
    int id = -1;
    int src = -1;
    int dst = -1;
};

struct Lightpath {
    int id = -1;
    int wavelength = -1;
    int src = -1;
    int dst = -1;
    int pair = -1;                // id of the opposite-direction lightpath, -1 if none
    std::vector<int> node_path;   // node indices src..dst
    std::vector<int> link_path;   // link index per hop
    std::vector<int> fibers;      // fiber index per hop
    std::vector<int> components;  // z_1..z_p component ids
    std::vector<int> slots;       // slot ids between consecutive components (p-1)

    int positions() const { return static_cast<int>(components.size()); }
};

struct RoutingResult {
    std::vector<Lightpath> lightpaths;
    std::vector<int> blocked;  // request ids that could not be provisioned
};

// Mutable occupancy shared across calls so requests can be provisioned
// incrementally (the dataset generator redraws blocked requests).
class SpffRouter {
public:
    SpffRouter(const ComponentGraph& graph, int wavelengths, bool bidirectional = true)
        : g_(graph), wavelengths_(wavelengths), bidirectional_(bidirectional) {
        if (wavelengths < 1) throw ConfigError("wavelength count must be >= 1");
        occupancy_.assign(g_.topo.links.size(), {});
        for (std::size_t li = 0; li < g_.topo.links.size(); ++li) {
            occupancy_[li].assign(2, std::vector<std::vector<bool>>(
                                         g_.topo.links[li].fibers,
                                         std::vector<bool>(wavelengths, false)));
        }
        tx_used_.assign(g_.components.size(), false);
    }

    // Hop-count shortest path with lexicographically smallest node sequence.
    std::vector<int> shortest_path(int src, int dst) const {
        std::vector<int> dist(g_.topo.nodes.size(), -1);
        std::deque<int> q{dst};
        dist[dst] = 0;
        while (!q.empty()) {
            int v = q.front();
            q.pop_front();
            for (const auto& [w, li, h] : g_.topo.neighbors(v)) {
                (void)li;
                (void)h;
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        if (dist[src] < 0) return {};
        std::vector<int> path{src};
        int cur = src;
        while (cur != dst) {
            int best = -1;
            for (const auto& [w, li, h] : g_.topo.neighbors(cur)) {
                (void)li;
                (void)h;
                if (dist[w] == dist[cur] - 1 && (best < 0 || w < best)) best = w;
            }
            path.push_back(best);
            cur = best;
        }
        return path;
    }

    // Provisions one request; returns the forward lightpath (and its reverse
    // twin in bidirectional mode) or records the request as blocked.
    bool provision(const LightpathRequest& req, RoutingResult& out) {
        if (req.src == req.dst || req.src < 0 || req.dst < 0 ||
            req.src >= static_cast<int>(g_.topo.nodes.size()) ||
            req.dst >= static_cast<int>(g_.topo.nodes.size())) {
            throw ConfigError("invalid lightpath request endpoints");
        }
        auto path = shortest_path(req.src, req.dst);
        if (path.empty()) {
            out.blocked.push_back(req.id);
            return false;
        }
        const int hops = static_cast<int>(path.size()) - 1;
        std::vector<int> links(hops), fibers(hops);
        for (int h = 0; h < hops; ++h) links[h] = link_between(path[h], path[h + 1]);

        // First-fit wavelength: lowest wavelength for which every hop has a
        // free fiber (lowest fiber index per hop); both directions of a fiber
        // are claimed together so the reverse lightpath mirrors the forward.
        int wl = -1;
        for (int w = 0; w < wavelengths_ && wl < 0; ++w) {
            bool ok = true;
            for (int h = 0; h < hops && ok; ++h) {
                int f = free_fiber(links[h], w);
                if (f < 0) ok = false;
                else fibers[h] = f;
            }
            if (ok) wl = w;
        }
        if (wl < 0) {
            out.blocked.push_back(req.id);
            return false;
        }

        int tx_src = free_transponder(req.src, path[1], fibers.front());
        int tx_dst = free_transponder(req.dst, path[path.size() - 2], fibers.back());
        if (tx_src < 0 || tx_dst < 0) {
            out.blocked.push_back(req.id);
            return false;
        }

        for (int h = 0; h < hops; ++h) {
            int dir = g_.topo.links[links[h]].a == path[h] ? 0 : 1;
            occupancy_[links[h]][dir][fibers[h]][wl] = true;
            occupancy_[links[h]][1 - dir][fibers[h]][wl] = true;
        }
        tx_used_[tx_src] = true;
        tx_used_[tx_dst] = true;

        int fwd_id = static_cast<int>(out.lightpaths.size());
        out.lightpaths.push_back(expand(fwd_id, wl, path, links, fibers, tx_src, tx_dst));
        if (bidirectional_) {
            int rev_id = fwd_id + 1;
            std::vector<int> rpath(path.rbegin(), path.rend());
            std::vector<int> rlinks(links.rbegin(), links.rend());
            std::vector<int> rfibers(fibers.rbegin(), fibers.rend());
            out.lightpaths.push_back(expand(rev_id, wl, rpath, rlinks, rfibers, tx_dst, tx_src));
            out.lightpaths[fwd_id].pair = rev_id;
            out.lightpaths[rev_id].pair = fwd_id;
        }
        return true;
    }

private:
    int link_between(int a, int b) const {
        for (int li = 0; li < static_cast<int>(g_.topo.links.size()); ++li) {
            const auto& l = g_.topo.links[li];
            if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return li;
        }
        throw Error("no link between adjacent path nodes");
    }

    int free_fiber(int link, int w) const {
        for (int f = 0; f < g_.topo.links[link].fibers; ++f) {
            if (!occupancy_[link][0][f][w] && !occupancy_[link][1][f][w]) return f;
        }
        return -1;
    }

    // Lowest free transponder on the local-WSS pair wired to (neighbor, fiber).
    int free_transponder(int node, int neighbor, int fiber) const {
        int local = g_.group(node, neighbor, fiber).local;
        if (local < 0) return -1;
        for (int id : g_.transponders[node][local]) {
            if (!tx_used_[id]) return id;
        }
        return -1;
    }

    Lightpath expand(int id, int wl, const std::vector<int>& path, const std::vector<int>& links,
                     const std::vector<int>& fibers, int tx_src, int tx_dst) const {
        Lightpath lp;
        lp.id = id;
        lp.wavelength = wl;
        lp.src = path.front();
        lp.dst = path.back();
        lp.node_path = path;
        lp.link_path = links;
        lp.fibers = fibers;

        auto& c = lp.components;
        c.push_back(tx_src);
        const auto& first = g_.group(path[0], path[1], fibers[0]);
        c.push_back(g_.local_add[path[0]][first.local]);
        c.push_back(first.line_out);
        c.push_back(first.booster);
        for (std::size_t h = 0; h < links.size(); ++h) {
            int from = path[h], to = path[h + 1];
            int dir = g_.topo.links[links[h]].a == from ? 0 : 1;
            for (int comp : g_.chains[links[h]][dir][fibers[h]]) c.push_back(comp);
            const auto& in_grp = g_.group(to, from, fibers[h]);
            c.push_back(in_grp.preamp);
            c.push_back(in_grp.line_in);
            if (h + 1 < links.size()) {
                const auto& out_grp = g_.group(to, path[h + 2], fibers[h + 1]);
                c.push_back(out_grp.line_out);
                c.push_back(out_grp.booster);
            }
        }
        const auto& last = g_.group(path.back(), path[path.size() - 2], fibers.back());
        c.push_back(g_.local_drop[path.back()][last.local]);
        c.push_back(tx_dst);

        lp.slots.reserve(c.size() - 1);
        for (std::size_t i = 0; i + 1 < c.size(); ++i) {
            int s = g_.slot_between(c[i], c[i + 1]);
            if (s < 0) throw Error("lightpath step is not a graph adjacency");
            lp.slots.push_back(s);
        }
        return lp;
    }

    const ComponentGraph& g_;
    int wavelengths_;
    bool bidirectional_;
    // [link][direction][fiber][wavelength] -> taken
    std::vector<std::vector<std::vector<std::vector<bool>>>> occupancy_;
    std::vector<bool> tx_used_;
};

inline RoutingResult route_spff(const ComponentGraph& graph, const std::vector<LightpathRequest>& requests,
                                int wavelengths = 32, std::uint64_t seed = 0, bool bidirectional = true) {
    (void)seed;  // routing is fully deterministic; the seed is part of the
                 // interface for config plumbing only
    SpffRouter router(graph, wavelengths, bidirectional);
    RoutingResult out;
    for (const auto& r : requests) router.provision(r, out);
    return out;
}

}  // namespace lightloc

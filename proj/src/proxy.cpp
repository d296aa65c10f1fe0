#include "vlnforge/proxy.hpp"

#include <algorithm>
#include <climits>
#include <limits>
#include <queue>
#include <set>

namespace vlnforge {

namespace {

/// Graph-level Dijkstra over edge weights (or hop counts).
std::vector<double> graph_distances(const NavGraph& graph, int source, bool hops) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(graph.positions.size(), kInf);
    const auto adj = graph.adjacency();
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[size_t(source)] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[size_t(u)]) continue;
        for (const auto& [v, w] : adj[size_t(u)]) {
            const double nd = d + (hops ? 1.0 : w);
            if (nd < dist[size_t(v)]) {
                dist[size_t(v)] = nd;
                heap.emplace(nd, v);
            }
        }
    }
    return dist;
}

}  // namespace

int sap_case3_target(const NavGraph& graph, int anchor, int final_node, bool hop_distances) {
    const auto from_anchor = graph_distances(graph, anchor, hop_distances);
    const auto to_final = graph_distances(graph, final_node, hop_distances);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int n = 0; n < graph.size(); ++n) {
        if (n == anchor) continue;
        const double d = from_anchor[size_t(n)] + to_final[size_t(n)];
        if (d < best_d) {
            best_d = d;
            best = n;
        }
    }
    if (best < 0) throw Error("sap: no node reachable from the anchor");
    return best;
}

std::vector<SapSample> sap_samples(const VlnTriplet& triplet, const NavGraph& graph, Rng& rng,
                                   const SapOptions& opts) {
    if (triplet.expert_path.empty()) throw InvalidArgument("sap: triplet has no expert path");
    std::vector<SapSample> out;
    out.push_back({1, triplet.expert_path, -1});
    for (size_t t = 1; t < triplet.expert_path.size(); ++t) {
        SapSample s;
        s.kase = 2;
        s.history.assign(triplet.expert_path.begin(), triplet.expert_path.begin() + long(t));
        s.target = triplet.expert_path[t];
        out.push_back(std::move(s));
    }
    const int final_node = triplet.expert_path.back();
    // anchors come from the final node's connected component; the
    // two-leg objective is undefined elsewhere
    const auto hops = hop_distances(graph, {final_node});
    std::vector<int> reachable;
    for (int n = 0; n < graph.size(); ++n)
        if (hops[size_t(n)] != INT_MAX) reachable.push_back(n);
    for (int i = 0; i < opts.random_anchors; ++i) {
        const int anchor = reachable[rng.uniform_u64(reachable.size())];
        SapSample s;
        s.kase = 3;
        s.history = {anchor};
        s.target = sap_case3_target(graph, anchor, final_node, opts.hop_distances);
        out.push_back(std::move(s));
    }
    return out;
}

MlmSample mlm_mask(const std::vector<std::string>& tokens, Rng& rng, double mask_prob) {
    if (tokens.empty()) throw InvalidArgument("mlm_mask: no tokens");
    if (mask_prob < 0 || mask_prob > 1) throw InvalidArgument("mlm_mask: bad mask_prob");
    MlmSample s;
    s.tokens = tokens;
    for (size_t i = 0; i < tokens.size(); ++i)
        if (rng.bernoulli(mask_prob)) s.masked.push_back(i);
    if (s.masked.empty()) s.masked.push_back(rng.uniform_u64(tokens.size()));
    return s;
}

OgSample og_sample(const VlnTriplet& triplet, const std::map<ViewInstanceRef, int>& view_map,
                   Rng* shuffle_rng) {
    const int final_node = triplet.expert_path.back();
    std::set<int> visible;
    for (const auto& [ref, obj] : view_map)
        if (ref.node == final_node) visible.insert(obj);
    OgSample s;
    s.trajectory = triplet.expert_path;
    s.candidates.assign(visible.begin(), visible.end());
    if (s.candidates.empty())
        throw OgConsistencyError("og: no visible objects at the trajectory's final node");
    if (shuffle_rng) shuffle_rng->shuffle(s.candidates);
    const auto it = std::find(s.candidates.begin(), s.candidates.end(), triplet.target_object);
    if (it == s.candidates.end())
        throw OgConsistencyError("og: target object not visible at the final node");
    s.target_index = int(it - s.candidates.begin());
    return s;
}

}  // namespace vlnforge

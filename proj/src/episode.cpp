#include "vlnforge/episode.hpp"

#include <algorithm>
#include <cmath>

namespace vlnforge {

void MetricOptions::check() const {
    if (success_radius <= 0) throw InvalidArgument("metrics: success_radius must be positive");
}

Episode::Episode(const NavGraph& graph, const VlnTriplet& triplet,
                 const std::map<ViewInstanceRef, int>* view_map,
                 const std::vector<Object3D>* objects)
    : graph_(graph), triplet_(triplet), objects_(objects) {
    if (triplet.start_node < 0 || triplet.start_node >= graph.size())
        throw InvalidArgument("episode: start node outside the graph");
    adjacency_ = graph.adjacency();
    visible_objects_.resize(graph.positions.size());
    if (view_map) {
        for (const auto& [ref, obj] : *view_map) {
            auto& v = visible_objects_[size_t(ref.node)];
            if (std::find(v.begin(), v.end(), obj) == v.end()) v.push_back(obj);
        }
        for (auto& v : visible_objects_) std::sort(v.begin(), v.end());
    }
    visited_.push_back(triplet.start_node);
}

Observation Episode::observe() const {
    Observation obs;
    obs.current = visited_.back();
    for (const auto& [v, w] : adjacency_[size_t(obs.current)]) obs.adjacent.push_back(v);
    if (objects_) {
        const Vec3 here = graph_.positions[size_t(obs.current)];
        for (int oid : visible_objects_[size_t(obs.current)]) {
            const Vec3 d = (*objects_)[size_t(oid)].centroid - here;
            obs.visible.emplace_back(oid, normalize_heading(std::atan2(d.y, d.x)));
        }
    }
    return obs;
}

Observation Episode::move_to(int node) {
    if (!running_) throw Error("episode: step after stop");
    const auto& adj = adjacency_[size_t(visited_.back())];
    const bool ok = std::any_of(adj.begin(), adj.end(),
                                [node](const auto& e) { return e.first == node; });
    if (!ok) throw InvalidArgument("episode: move target is not adjacent");
    visited_.push_back(node);
    return observe();
}

void Episode::stop(std::optional<int> grounded_object) {
    if (!running_) throw Error("episode: stop after stop");
    running_ = false;
    grounded_ = grounded_object;
}

namespace {

double walk_length(const std::vector<int>& walk, const NavGraph& graph) {
    double len = 0.0;
    for (size_t i = 0; i + 1 < walk.size(); ++i) {
        const auto w = graph.edge_weight(walk[i], walk[i + 1]);
        if (!w) throw InvalidArgument("walk uses a non-existent edge");
        len += *w;
    }
    return len;
}

bool near_goal(int node, const VlnTriplet& t, const NavGraph& graph, const MetricOptions& opts) {
    if (opts.strict_goal_membership)
        return std::find(t.goal_nodes.begin(), t.goal_nodes.end(), node) != t.goal_nodes.end();
    const Vec3 p = graph.positions[size_t(node)];
    for (int g : t.goal_nodes)
        if (distance(p, graph.positions[size_t(g)]) <= opts.success_radius) return true;
    return false;
}

}  // namespace

EpisodeResult score_walk(const std::vector<int>& visited, std::optional<int> grounded,
                         const VlnTriplet& triplet, const NavGraph& graph,
                         const MetricOptions& opts) {
    opts.check();
    if (visited.empty()) throw InvalidArgument("score: empty walk");
    EpisodeResult r;
    r.shortest_length = walk_length(triplet.expert_path, graph);
    r.predicted_length = visited.size() == 1 ? r.shortest_length : walk_length(visited, graph);
    r.success = near_goal(visited.back(), triplet, graph, opts);
    for (int node : visited) {
        if (near_goal(node, triplet, graph, opts)) {
            r.oracle_success = true;
            break;
        }
    }
    const double ratio = r.shortest_length / std::max(r.predicted_length, r.shortest_length);
    r.spl = r.success ? ratio : 0.0;
    r.rgs = r.success && grounded.has_value() && *grounded == triplet.target_object;
    r.rgspl = r.rgs ? ratio : 0.0;
    return r;
}

EpisodeResult score(const Episode& episode, const MetricOptions& opts) {
    if (episode.running()) throw Error("score: episode still running");
    return score_walk(episode.visited(), episode.grounded(), episode.triplet(), episode.graph(),
                      opts);
}

AggregateMetrics aggregate(const std::vector<EpisodeResult>& results) {
    if (results.empty()) throw InvalidArgument("aggregate: no results");
    AggregateMetrics m;
    m.n = results.size();
    for (const auto& r : results) {
        m.sr += r.success ? 1.0 : 0.0;
        m.osr += r.oracle_success ? 1.0 : 0.0;
        m.spl += r.spl;
        m.rgs += r.rgs ? 1.0 : 0.0;
        m.rgspl += r.rgspl;
    }
    auto pct = [n = double(m.n)](double sum) { return std::round(sum / n * 10000.0) / 100.0; };
    m.sr = pct(m.sr);
    m.osr = pct(m.osr);
    m.spl = pct(m.spl);
    m.rgs = pct(m.rgs);
    m.rgspl = pct(m.rgspl);
    return m;
}

EpisodeResult run_oracle_agent(const NavGraph& graph, const VlnTriplet& triplet,
                               const MetricOptions& opts) {
    Episode ep(graph, triplet);
    for (size_t i = 1; i < triplet.expert_path.size(); ++i) ep.move_to(triplet.expert_path[i]);
    ep.stop(triplet.target_object);
    return score(ep, opts);
}

EpisodeResult run_random_agent(const NavGraph& graph, const VlnTriplet& triplet, Rng& rng,
                               const MetricOptions& opts) {
    Episode ep(graph, triplet);
    const int steps = rng.uniform_int(4, 12);
    for (int i = 0; i < steps; ++i) {
        const Observation obs = ep.observe();
        if (obs.adjacent.empty()) break;
        ep.move_to(obs.adjacent[rng.uniform_u64(obs.adjacent.size())]);
    }
    ep.stop(std::nullopt);
    return score(ep, opts);
}

EpisodeResult run_replay(const NavGraph& graph, const VlnTriplet& triplet,
                         const ReplayAction& actions, const MetricOptions& opts) {
    Episode ep(graph, triplet);
    for (int node : actions.moves) ep.move_to(node);
    ep.stop(actions.grounded);
    return score(ep, opts);
}

}  // namespace vlnforge

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vlnforge/triplets.hpp"

namespace vlnforge {

struct MetricOptions {
    double success_radius = 3.0;
    bool strict_goal_membership = false;  // require stopping on a goal node

    void check() const;
};

/// Stepwise observation for an agent.
struct Observation {
    int current = 0;
    std::vector<int> adjacent;                       // id-sorted neighbor nodes
    std::vector<std::pair<int, double>> visible;     // object id -> bearing (radians)
};

/// Discrete episode over a navigation graph. Moves are restricted to
/// graph edges; stop freezes the walk and records the grounded object.
class Episode {
public:
    Episode(const NavGraph& graph, const VlnTriplet& triplet,
            const std::map<ViewInstanceRef, int>* view_map = nullptr,
            const std::vector<Object3D>* objects = nullptr);

    Observation observe() const;
    Observation move_to(int node);  // throws InvalidArgument on non-adjacent targets
    void stop(std::optional<int> grounded_object = std::nullopt);
    bool running() const { return running_; }

    const std::vector<int>& visited() const { return visited_; }
    std::optional<int> grounded() const { return grounded_; }
    const VlnTriplet& triplet() const { return triplet_; }
    const NavGraph& graph() const { return graph_; }

private:
    const NavGraph& graph_;
    VlnTriplet triplet_;
    std::vector<std::vector<std::pair<int, double>>> adjacency_;
    std::vector<std::vector<int>> visible_objects_;  // per node, from the view map
    const std::vector<Object3D>* objects_;
    std::vector<int> visited_;
    std::optional<int> grounded_;
    bool running_ = true;
};

struct EpisodeResult {
    bool success = false;
    bool oracle_success = false;
    double spl = 0.0;
    bool rgs = false;
    double rgspl = 0.0;
    double predicted_length = 0.0;
    double shortest_length = 0.0;
};

/// Scores a finished walk: success is ending within success_radius of a
/// goal node, SPL weights it by shortest/predicted geodesic length
/// (predicted := shortest when the agent never moves), grounding
/// success additionally requires the correct object.
EpisodeResult score_walk(const std::vector<int>& visited, std::optional<int> grounded,
                         const VlnTriplet& triplet, const NavGraph& graph,
                         const MetricOptions& opts = {});

EpisodeResult score(const Episode& episode, const MetricOptions& opts = {});  // episode must be stopped

struct AggregateMetrics {
    double sr = 0.0, osr = 0.0, spl = 0.0, rgs = 0.0, rgspl = 0.0;
    size_t n = 0;
};

/// Means scaled to percentages and rounded to two decimals.
AggregateMetrics aggregate(const std::vector<EpisodeResult>& results);

/// Walks the expert path and grounds the target object.
EpisodeResult run_oracle_agent(const NavGraph& graph, const VlnTriplet& triplet,
                               const MetricOptions& opts = {});

/// Seeded random walk (4..12 moves) that stops without grounding.
EpisodeResult run_random_agent(const NavGraph& graph, const VlnTriplet& triplet, Rng& rng,
                               const MetricOptions& opts = {});

struct ReplayAction {
    std::vector<int> moves;
    std::optional<int> grounded;
};

EpisodeResult run_replay(const NavGraph& graph, const VlnTriplet& triplet,
                         const ReplayAction& actions, const MetricOptions& opts = {});

}  // namespace vlnforge

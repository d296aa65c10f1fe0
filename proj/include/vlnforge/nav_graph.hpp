#pragma once

#include <optional>
#include <vector>

#include "vlnforge/bundle.hpp"
#include "vlnforge/json_util.hpp"
#include "vlnforge/render.hpp"
#include "vlnforge/rng.hpp"

namespace vlnforge {

struct GraphParams {
    int sample_count = 20000;
    double min_node_spacing = 2.0;
    double max_edge_geodesic = 3.0;
    double min_visibility_depth = 2.0;
    double coverage_radius = 2.0;
    double visibility_window = 20.0 * kPi / 180.0;  // square window, radians
    int visibility_patch = 11;                      // rays per side
    bool symmetric_visibility = true;

    void check() const;
};

struct NavGraph {
    std::vector<Vec3> positions;                    // node id = index
    std::vector<std::tuple<int, int, double>> edges;  // i < j, sorted

    int size() const { return int(positions.size()); }
    std::vector<std::vector<std::pair<int, double>>> adjacency() const;
    std::optional<double> edge_weight(int a, int b) const;
};

Json nav_graph_to_json(const NavGraph& graph);
NavGraph nav_graph_from_json(const Json& j);

/// Grid pathfinding over a navigability field: 8-connected cells with
/// diagonal cost sqrt(2)*cell, plus any stair links.
class GridRouter {
public:
    explicit GridRouter(const NavigabilityField& field);

    /// Geodesic distances from src to every cell within max_dist;
    /// untouched cells hold infinity.
    std::vector<double> distances_from(const CellRef& src, double max_dist) const;

    size_t cell_index(const CellRef& c) const;
    const NavigabilityField& field() const { return field_; }

private:
    const NavigabilityField& field_;
    std::vector<size_t> floor_offset_;
    size_t total_cells_ = 0;
    std::vector<std::vector<std::pair<size_t, double>>> stair_adj_;
};

/// Uniform positions over the navigable area (cell-uniform, jittered
/// within the cell, at eye level). Deterministic for a fixed rng state.
std::vector<Vec3> sample_navigable(const NavigabilityField& field, int n, Rng& rng);

/// Greedy node placement: the seed is the candidate nearest the
/// navigable-area centroid; each round drops candidates closer than
/// min_node_spacing to any node and admits the remaining candidate
/// whose distance to its nearest node is smallest (ties to the lowest
/// candidate index).
std::vector<Vec3> build_nodes(const std::vector<Vec3>& candidates,
                              const NavigabilityField& field, const GraphParams& params);

/// Shortest navigable path length between the nearest navigable cells
/// of a and b; nullopt when disconnected. Throws DomainError for
/// positions outside the field.
std::optional<double> geodesic_distance(const NavigabilityField& field, const Vec3& a,
                                        const Vec3& b);

/// Depth source for the visibility criterion.
class DepthProber {
public:
    virtual ~DepthProber() = default;
    /// Planar depths (along the from->toward axis) of a window_rad x
    /// window_rad ray patch, n x n rays, capped at max_depth.
    virtual std::vector<double> patch_depths(int node_index, const Vec3& from, const Vec3& toward,
                                             double window_rad, int n, double max_depth) = 0;
};

class TruthDepthProber : public DepthProber {
public:
    explicit TruthDepthProber(const RenderScene& scene) : scene_(scene) {}
    std::vector<double> patch_depths(int node_index, const Vec3& from, const Vec3& toward,
                                     double window_rad, int n, double max_depth) override;

private:
    const RenderScene& scene_;
};

/// Samples stored panoramas instead of ray casting; used to recheck
/// edges of bundles that carry view data but no ground truth.
class PanoDepthProber : public DepthProber {
public:
    explicit PanoDepthProber(ViewProvider& provider) : provider_(provider) {}
    std::vector<double> patch_depths(int node_index, const Vec3& from, const Vec3& toward,
                                     double window_rad, int n, double max_depth) override;

private:
    ViewProvider& provider_;
};

/// Directional visibility: mean patch depth from a toward b exceeds
/// min_visibility_depth.
bool visibility_check(DepthProber& prober, int index_a, const Vec3& a, const Vec3& b,
                      const GraphParams& params, double max_depth);

/// Connects node pairs whose geodesic distance is below
/// max_edge_geodesic and whose visibility test passes (both directions
/// when symmetric_visibility is set).
NavGraph connect_edges(const std::vector<Vec3>& nodes, const NavigabilityField& field,
                       DepthProber& prober, const GraphParams& params, double max_depth);

/// Fraction of navigable cells within radius (horizontal, same floor)
/// of some node.
double coverage(const NavGraph& graph, const NavigabilityField& field, double radius);

struct GraphBuildResult {
    NavGraph graph;
    double coverage = 0.0;
};

/// sample -> place -> connect -> coverage, driven by the bundle's
/// ground truth for visibility.
GraphBuildResult build_graph(const SceneBundle& bundle, const GraphParams& params, uint64_t seed);

}  // namespace vlnforge

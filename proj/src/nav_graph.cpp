#include "vlnforge/nav_graph.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace vlnforge {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void GraphParams::check() const {
    if (sample_count < 1 || min_node_spacing <= 0 || max_edge_geodesic <= 0 ||
        min_visibility_depth <= 0 || coverage_radius <= 0)
        throw InvalidArgument("graph params must be positive");
    if (min_node_spacing > max_edge_geodesic)
        throw InvalidArgument("min_node_spacing must not exceed max_edge_geodesic");
    if (visibility_patch < 1 || visibility_window <= 0)
        throw InvalidArgument("bad visibility window");
}

std::vector<std::vector<std::pair<int, double>>> NavGraph::adjacency() const {
    std::vector<std::vector<std::pair<int, double>>> adj(positions.size());
    for (const auto& [i, j, w] : edges) {
        adj[size_t(i)].emplace_back(j, w);
        adj[size_t(j)].emplace_back(i, w);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
}

std::optional<double> NavGraph::edge_weight(int a, int b) const {
    if (a > b) std::swap(a, b);
    for (const auto& [i, j, w] : edges)
        if (i == a && j == b) return w;
    return std::nullopt;
}

Json nav_graph_to_json(const NavGraph& graph) {
    Json j;
    Json nodes = Json::array();
    for (size_t i = 0; i < graph.positions.size(); ++i)
        nodes.push_back({{"id", int(i)}, {"xyz", vec3_to_json(graph.positions[i])}});
    j["nodes"] = nodes;
    Json edges = Json::array();
    for (const auto& [a, b, w] : graph.edges) edges.push_back({a, b, w});
    j["edges"] = edges;
    return j;
}

NavGraph nav_graph_from_json(const Json& j) {
    NavGraph g;
    g.positions.resize(j.at("nodes").size());
    for (const auto& n : j.at("nodes")) {
        const int id = n.at("id").get<int>();
        if (id < 0 || id >= int(g.positions.size()))
            throw Error("graph json: node ids must be dense 0..n-1");
        g.positions[size_t(id)] = vec3_from_json(n.at("xyz"));
    }
    for (const auto& e : j.at("edges")) {
        const int a = e.at(0).get<int>();
        const int b = e.at(1).get<int>();
        if (a < 0 || b < 0 || a >= g.size() || b >= g.size() || a == b)
            throw Error("graph json: bad edge endpoints");
        g.edges.emplace_back(std::min(a, b), std::max(a, b), e.at(2).get<double>());
    }
    std::sort(g.edges.begin(), g.edges.end());
    return g;
}

GridRouter::GridRouter(const NavigabilityField& field) : field_(field) {
    floor_offset_.resize(field.floors.size());
    for (size_t f = 0; f < field.floors.size(); ++f) {
        floor_offset_[f] = total_cells_;
        total_cells_ += size_t(field.floors[f].nx) * field.floors[f].ny;
    }
    stair_adj_.resize(total_cells_);
    for (const auto& s : field.stairs) {
        const size_t a = cell_index({s.floor_a, s.cell_a_x, s.cell_a_y});
        const size_t b = cell_index({s.floor_b, s.cell_b_x, s.cell_b_y});
        stair_adj_[a].emplace_back(b, s.length);
        stair_adj_[b].emplace_back(a, s.length);
    }
}

size_t GridRouter::cell_index(const CellRef& c) const {
    const FloorGrid& g = field_.floors[size_t(c.floor)];
    return floor_offset_[size_t(c.floor)] + size_t(c.iy) * g.nx + c.ix;
}

std::vector<double> GridRouter::distances_from(const CellRef& src, double max_dist) const {
    std::vector<double> dist(total_cells_, kInf);
    using Item = std::pair<double, size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    const size_t s = cell_index(src);
    dist[s] = 0.0;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
        const auto [d, idx] = heap.top();
        heap.pop();
        if (d > dist[idx]) continue;
        if (d > max_dist) break;
        // decode floor and cell
        size_t f = field_.floors.size() - 1;
        while (floor_offset_[f] > idx) --f;
        const FloorGrid& g = field_.floors[f];
        const size_t local = idx - floor_offset_[f];
        const int iy = int(local / size_t(g.nx));
        const int ix = int(local % size_t(g.nx));
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = ix + dx, ny = iy + dy;
                if (!g.is_navigable(nx, ny)) continue;
                const double step = (dx != 0 && dy != 0) ? g.cell * std::sqrt(2.0) : g.cell;
                const double nd = d + step;
                const size_t nidx = floor_offset_[f] + size_t(ny) * g.nx + nx;
                if (nd < dist[nidx] && nd <= max_dist) {
                    dist[nidx] = nd;
                    heap.emplace(nd, nidx);
                }
            }
        }
        for (const auto& [nidx, w] : stair_adj_[idx]) {
            const double nd = d + w;
            if (nd < dist[nidx] && nd <= max_dist) {
                dist[nidx] = nd;
                heap.emplace(nd, nidx);
            }
        }
    }
    return dist;
}

std::vector<Vec3> sample_navigable(const NavigabilityField& field, int n, Rng& rng) {
    std::vector<CellRef> cells;
    for (size_t f = 0; f < field.floors.size(); ++f) {
        const FloorGrid& g = field.floors[f];
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix)
                if (g.is_navigable(ix, iy)) cells.push_back({int(f), ix, iy});
    }
    if (cells.empty()) throw DomainError("sample_navigable: no navigable cells");
    std::vector<Vec3> out;
    out.reserve(size_t(n));
    for (int i = 0; i < n; ++i) {
        const CellRef c = cells[rng.uniform_u64(cells.size())];
        const FloorGrid& g = field.floors[size_t(c.floor)];
        const double x = g.origin_x + (c.ix + rng.uniform_double()) * g.cell;
        const double y = g.origin_y + (c.iy + rng.uniform_double()) * g.cell;
        out.push_back({x, y, g.height + field.camera_height});
    }
    return out;
}

std::vector<Vec3> build_nodes(const std::vector<Vec3>& candidates, const NavigabilityField& field,
                              const GraphParams& params) {
    if (candidates.empty()) throw InvalidArgument("build_nodes: no candidates");
    const Vec3 centroid = field.navigable_centroid();

    size_t seed_idx = 0;
    double seed_d = kInf;
    for (size_t i = 0; i < candidates.size(); ++i) {
        const double d = distance(candidates[i], centroid);
        if (d < seed_d) {
            seed_d = d;
            seed_idx = i;
        }
    }

    std::vector<Vec3> nodes{candidates[seed_idx]};
    struct Cand {
        size_t index;
        double nearest;  // distance to the closest node so far
    };
    std::vector<Cand> pool;
    pool.reserve(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
        if (i == seed_idx) continue;
        pool.push_back({i, distance(candidates[i], nodes[0])});
    }

    const double spacing = params.min_node_spacing;
    for (;;) {
        size_t best = SIZE_MAX;
        double best_d = kInf;
        size_t keep = 0;
        for (size_t p = 0; p < pool.size(); ++p) {
            if (pool[p].nearest <= spacing) continue;  // inside the spacing ring, drop
            pool[keep] = pool[p];
            if (pool[keep].nearest < best_d ||
                (pool[keep].nearest == best_d && pool[keep].index < pool[best].index))
                best = keep, best_d = pool[keep].nearest;
            ++keep;
        }
        pool.resize(keep);
        if (best == SIZE_MAX) break;
        const Vec3 chosen = candidates[pool[best].index];
        nodes.push_back(chosen);
        pool[best] = pool.back();
        pool.pop_back();
        for (auto& c : pool) c.nearest = std::min(c.nearest, distance(candidates[c.index], chosen));
    }
    return nodes;
}

std::optional<double> geodesic_distance(const NavigabilityField& field, const Vec3& a,
                                        const Vec3& b) {
    const auto sa = field.snap(a);
    const auto sb = field.snap(b);
    if (!sa || !sb) return std::nullopt;
    GridRouter router(field);
    const auto dist = router.distances_from(*sa, kInf);
    const double d = dist[router.cell_index(*sb)];
    if (d == kInf) return std::nullopt;
    return d;
}

namespace {

std::vector<Vec3> patch_axes(const Vec3& from, const Vec3& toward, double window_rad, int n,
                             Vec3* axis_out) {
    const Vec3 delta = toward - from;
    const double yaw0 = std::atan2(delta.y, delta.x);
    const double pitch0 = std::atan2(delta.z, delta.norm_xy());
    auto dir_of = [](double yaw, double pitch) {
        const double cp = std::cos(pitch);
        return Vec3{cp * std::cos(yaw), cp * std::sin(yaw), std::sin(pitch)};
    };
    *axis_out = dir_of(yaw0, pitch0);
    std::vector<Vec3> dirs;
    dirs.reserve(size_t(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double du = n == 1 ? 0.0 : (i / double(n - 1) - 0.5) * window_rad;
            const double dv = n == 1 ? 0.0 : (j / double(n - 1) - 0.5) * window_rad;
            dirs.push_back(dir_of(yaw0 + du, pitch0 + dv));
        }
    }
    return dirs;
}

}  // namespace

std::vector<double> TruthDepthProber::patch_depths(int, const Vec3& from, const Vec3& toward,
                                                   double window_rad, int n, double max_depth) {
    Vec3 axis;
    const auto dirs = patch_axes(from, toward, window_rad, n, &axis);
    std::vector<double> out;
    out.reserve(dirs.size());
    for (const Vec3& d : dirs) {
        // scale so the forward component along the axis is 1: the ray
        // parameter then is planar depth in the patch frame
        const Vec3 scaled = d * (1.0 / d.dot(axis));
        out.push_back(scene_.cast_ray(from, scaled, max_depth).t);
    }
    return out;
}

std::vector<double> PanoDepthProber::patch_depths(int node_index, const Vec3& from,
                                                  const Vec3& toward, double window_rad, int n,
                                                  double max_depth) {
    Vec3 axis;
    const auto dirs = patch_axes(from, toward, window_rad, n, &axis);
    const PanoramaNode& pano = provider_.panorama(node_index);
    std::vector<double> out;
    out.reserve(dirs.size());
    for (const Vec3& d : dirs) {
        // pick the panorama view whose center is nearest the ray
        const double yaw = normalize_heading(std::atan2(d.y, d.x));
        const double pitch = std::atan2(d.z, d.norm_xy());
        int hk = int(std::lround(yaw / (kPi / 6.0))) % kHeadingsPerRing;
        int ek = pitch < -kPi / 12.0 ? 0 : (pitch > kPi / 12.0 ? 2 : 1);
        const ViewObservation& view = pano.views[size_t(ek * kHeadingsPerRing + hk)];
        const Vec3 probe = from + d;
        const PixelProjection proj = project_point(probe, view.intrinsics, view.pose);
        double planar = max_depth;
        if (proj.depth > 0.0) {
            const int u = std::clamp(int(std::lround(proj.u)), 0, view.width() - 1);
            const int v = std::clamp(int(std::lround(proj.v)), 0, view.height() - 1);
            const double dview = view.depth_at(u, v);
            if (dview > 0.0) {
                const Vec3 p = pixel_to_point(u, v, dview, view.intrinsics, view.pose);
                planar = std::min(max_depth, (p - from).dot(axis));
            }
        }
        out.push_back(planar);
    }
    return out;
}

bool visibility_check(DepthProber& prober, int index_a, const Vec3& a, const Vec3& b,
                      const GraphParams& params, double max_depth) {
    const auto depths = prober.patch_depths(index_a, a, b, params.visibility_window,
                                            params.visibility_patch, max_depth);
    double sum = 0.0;
    for (double d : depths) sum += d;
    return sum / double(depths.size()) > params.min_visibility_depth;
}

NavGraph connect_edges(const std::vector<Vec3>& nodes, const NavigabilityField& field,
                       DepthProber& prober, const GraphParams& params, double max_depth) {
    if (nodes.empty()) throw InvalidArgument("connect_edges: no nodes");
    NavGraph graph;
    graph.positions = nodes;
    GridRouter router(field);
    std::vector<std::optional<CellRef>> snapped(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) snapped[i] = field.snap(nodes[i]);

    for (size_t i = 0; i < nodes.size(); ++i) {
        if (!snapped[i]) continue;
        const auto dist = router.distances_from(*snapped[i], params.max_edge_geodesic);
        for (size_t j = i + 1; j < nodes.size(); ++j) {
            if (!snapped[j]) continue;
            const double g = dist[router.cell_index(*snapped[j])];
            if (!(g < params.max_edge_geodesic)) continue;
            if (!visibility_check(prober, int(i), nodes[i], nodes[j], params, max_depth)) continue;
            if (params.symmetric_visibility &&
                !visibility_check(prober, int(j), nodes[j], nodes[i], params, max_depth))
                continue;
            graph.edges.emplace_back(int(i), int(j), g);
        }
    }
    std::sort(graph.edges.begin(), graph.edges.end());
    return graph;
}

double coverage(const NavGraph& graph, const NavigabilityField& field, double radius) {
    if (radius <= 0) throw InvalidArgument("coverage: radius must be positive");
    size_t total = 0, covered = 0;
    for (size_t f = 0; f < field.floors.size(); ++f) {
        const FloorGrid& g = field.floors[f];
        std::vector<Vec3> floor_nodes;
        for (const Vec3& p : graph.positions)
            if (field.floor_of(p.z) == int(f)) floor_nodes.push_back(p);
        const double r2 = radius * radius;
        for (int iy = 0; iy < g.ny; ++iy) {
            for (int ix = 0; ix < g.nx; ++ix) {
                if (!g.is_navigable(ix, iy)) continue;
                ++total;
                const double x = g.cell_x(ix), y = g.cell_y(iy);
                for (const Vec3& p : floor_nodes) {
                    const double dx = p.x - x, dy = p.y - y;
                    if (dx * dx + dy * dy <= r2) {
                        ++covered;
                        break;
                    }
                }
            }
        }
    }
    return total == 0 ? 0.0 : double(covered) / double(total);
}

GraphBuildResult build_graph(const SceneBundle& bundle, const GraphParams& params, uint64_t seed) {
    params.check();
    if (!bundle.ground_truth)
        throw Error("build_graph needs ground truth for the visibility criterion");
    Rng rng(stage_seed(seed, seed_tag::kGraph));
    const auto candidates = sample_navigable(bundle.field, params.sample_count, rng);
    const auto nodes = build_nodes(candidates, bundle.field, params);
    const RenderScene scene(*bundle.ground_truth, bundle.class_vocabulary);
    TruthDepthProber prober(scene);
    GraphBuildResult out;
    out.graph = connect_edges(nodes, bundle.field, prober, params, bundle.max_depth);
    out.coverage = coverage(out.graph, bundle.field, params.coverage_radius);
    return out;
}

}  // namespace vlnforge

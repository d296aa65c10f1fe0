// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written from scratch against the
// documented conventions, not by calling into the code under test.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <vector>

#include "vlnforge/core.hpp"
#include "vlnforge/episode.hpp"
#include "vlnforge/field.hpp"
#include "vlnforge/truth.hpp"

namespace oracle {

using vlnforge::Vec3;

// ---------------------------------------------------------------------------
// Camera: explicit 3x3 rotation matrix built from heading/elevation,
// solved as a linear projection (independent of the library's basis
// arithmetic).

struct Matrix3 {
    double m[3][3];

    Vec3 mul(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
    Matrix3 transpose() const {
        Matrix3 t;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) t.m[i][j] = m[j][i];
        return t;
    }
};

// camera frame: +x right, +y down, +z forward (view direction)
inline Matrix3 camera_rotation(double heading, double elevation) {
    const double ch = std::cos(heading), sh = std::sin(heading);
    const double ce = std::cos(elevation), se = std::sin(elevation);
    // world axes of the camera frame, column-wise
    const Vec3 right{sh, -ch, 0.0};
    const Vec3 down{se * ch, se * sh, -ce};
    const Vec3 forward{ce * ch, ce * sh, se};
    Matrix3 r;
    r.m[0][0] = right.x;   r.m[1][0] = right.y;   r.m[2][0] = right.z;
    r.m[0][1] = down.x;    r.m[1][1] = down.y;    r.m[2][1] = down.z;
    r.m[0][2] = forward.x; r.m[1][2] = forward.y; r.m[2][2] = forward.z;
    return r;
}

struct OracleCamera {
    int width, height;
    double hfov;

    double fx() const { return (std::max(width - 1, 1) / 2.0) / std::tan(hfov / 2.0); }
    double cx() const { return (width - 1) / 2.0; }
    double cy() const { return (height - 1) / 2.0; }
};

inline Vec3 backproject(const OracleCamera& cam, double u, double v, double depth,
                        const Vec3& origin, double heading, double elevation) {
    const Vec3 cam_point{(u - cam.cx()) / cam.fx() * depth, (v - cam.cy()) / cam.fx() * depth,
                         depth};
    const Matrix3 r = camera_rotation(heading, elevation);
    const Vec3 world = r.mul(cam_point);
    return {world.x + origin.x, world.y + origin.y, world.z + origin.z};
}

struct OracleProjection {
    double u, v, depth;
};

inline OracleProjection project(const OracleCamera& cam, const Vec3& point, const Vec3& origin,
                                double heading, double elevation) {
    const Matrix3 rt = camera_rotation(heading, elevation).transpose();
    const Vec3 c = rt.mul(point - origin);
    return {cam.cx() + c.x / c.z * cam.fx(), cam.cy() + c.y / c.z * cam.fx(), c.z};
}

// ---------------------------------------------------------------------------
// Ray vs axis-aligned box, written with explicit per-axis interval
// arithmetic; returns the entry distance along a unit ray.

inline std::optional<double> ray_box(const Vec3& origin, const Vec3& unit_dir,
                                     const vlnforge::Aabb& box) {
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {unit_dir.x, unit_dir.y, unit_dir.z};
    const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
    const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-300) {
            if (o[a] < lo[a] || o[a] > hi[a]) return std::nullopt;
            continue;
        }
        double t1 = (lo[a] - o[a]) / d[a];
        double t2 = (hi[a] - o[a]) / d[a];
        if (t1 > t2) std::swap(t1, t2);
        t_enter = std::max(t_enter, t1);
        t_exit = std::min(t_exit, t2);
    }
    if (t_enter > t_exit || t_exit <= 0.0) return std::nullopt;
    return t_enter > 0.0 ? t_enter : t_exit;
}

/// Nearest hit distance over a set of boxes (ray length, unit dir).
inline std::optional<std::pair<double, size_t>> nearest_hit(const Vec3& origin,
                                                            const Vec3& unit_dir,
                                                            const std::vector<vlnforge::Aabb>& boxes) {
    std::optional<std::pair<double, size_t>> best;
    for (size_t i = 0; i < boxes.size(); ++i) {
        const auto t = ray_box(origin, unit_dir, boxes[i]);
        if (t && *t > 1e-9 && (!best || *t < best->first)) best = {{*t, i}};
    }
    return best;
}

// ---------------------------------------------------------------------------
// Plain grid Dijkstra over one floor, no early exit, array-based.

inline std::optional<double> grid_dijkstra(const vlnforge::FloorGrid& g, int sx, int sy, int tx,
                                           int ty) {
    const size_t n = size_t(g.nx) * g.ny;
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[size_t(sy) * g.nx + sx] = 0.0;
    heap.emplace(0.0, size_t(sy) * g.nx + sx);
    const double diag = g.cell * std::sqrt(2.0);
    while (!heap.empty()) {
        auto [d, idx] = heap.top();
        heap.pop();
        if (d > dist[idx]) continue;
        const int x = int(idx % size_t(g.nx));
        const int y = int(idx / size_t(g.nx));
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx2 = x + dx, ny2 = y + dy;
                if (nx2 < 0 || ny2 < 0 || nx2 >= g.nx || ny2 >= g.ny) continue;
                if (!g.is_navigable(nx2, ny2)) continue;
                const double nd = d + ((dx != 0 && dy != 0) ? diag : g.cell);
                const size_t nidx = size_t(ny2) * g.nx + nx2;
                if (nd < dist[nidx]) {
                    dist[nidx] = nd;
                    heap.emplace(nd, nidx);
                }
            }
    }
    const double out = dist[size_t(ty) * g.nx + tx];
    if (out == std::numeric_limits<double>::infinity()) return std::nullopt;
    return out;
}

// ---------------------------------------------------------------------------
// Exhaustive path enumeration: all simple paths from start into the
// goal set with at most max_hops edges, ranked by
// (hops, total weight, lexicographic node sequence).

inline void enumerate_paths(const std::vector<std::vector<std::pair<int, double>>>& adj, int node,
                            const std::vector<int>& goals, int max_hops, std::vector<int>& prefix,
                            double weight, std::vector<std::pair<double, std::vector<int>>>& out) {
    if (std::find(goals.begin(), goals.end(), node) != goals.end())
        out.emplace_back(weight, prefix);
    if (int(prefix.size()) - 1 >= max_hops) return;
    for (const auto& [next, w] : adj[size_t(node)]) {
        if (std::find(prefix.begin(), prefix.end(), next) != prefix.end()) continue;
        prefix.push_back(next);
        enumerate_paths(adj, next, goals, max_hops, prefix, weight + w, out);
        prefix.pop_back();
    }
}

inline std::optional<std::vector<int>> best_path_bruteforce(
    const vlnforge::NavGraph& graph, int start, const std::vector<int>& goals, int max_hops) {
    const auto adj = graph.adjacency();
    std::vector<int> prefix{start};
    std::vector<std::pair<double, std::vector<int>>> all;
    enumerate_paths(adj, start, goals, max_hops, prefix, 0.0, all);
    if (all.empty()) return std::nullopt;
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second.size() != b.second.size()) return a.second.size() < b.second.size();
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    return all.front().second;
}

// ---------------------------------------------------------------------------
// Reference episode scorer, written directly from the metric
// definitions.

struct RefScore {
    double sr, osr, spl, rgs, rgspl, predicted, shortest;
};

inline RefScore score_reference(const std::vector<int>& visited, std::optional<int> grounded,
                                const vlnforge::VlnTriplet& t, const vlnforge::NavGraph& graph,
                                double radius) {
    auto length_of = [&](const std::vector<int>& walk) {
        double len = 0.0;
        for (size_t i = 0; i + 1 < walk.size(); ++i) {
            double w = -1.0;
            for (const auto& [a, b, ew] : graph.edges) {
                if ((a == walk[i] && b == walk[i + 1]) || (b == walk[i] && a == walk[i + 1])) {
                    w = ew;
                    break;
                }
            }
            len += w;
        }
        return len;
    };
    auto near = [&](int node) {
        const Vec3 p = graph.positions[size_t(node)];
        for (int g : t.goal_nodes) {
            const Vec3 q = graph.positions[size_t(g)];
            const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
            if (std::sqrt(dx * dx + dy * dy + dz * dz) <= radius) return true;
        }
        return false;
    };
    RefScore r{};
    r.shortest = length_of(t.expert_path);
    r.predicted = visited.size() <= 1 ? r.shortest : length_of(visited);
    r.sr = near(visited.back()) ? 1.0 : 0.0;
    r.osr = 0.0;
    for (int n : visited)
        if (near(n)) r.osr = 1.0;
    const double ratio = r.shortest / std::max(r.predicted, r.shortest);
    r.spl = r.sr * ratio;
    r.rgs = (r.sr > 0 && grounded && *grounded == t.target_object) ? 1.0 : 0.0;
    r.rgspl = r.rgs * ratio;
    return r;
}

// ---------------------------------------------------------------------------
// Hungarian algorithm (O(n^3) potentials form) for maximum-IoU
// one-to-one matching between predictions and ground truth.

inline std::vector<int> hungarian_max(const std::vector<std::vector<double>>& score) {
    const int n = int(score.size());
    if (n == 0) return {};
    const int m = int(score[0].size());
    const int dim = std::max(n, m);
    const double kInf = std::numeric_limits<double>::infinity();
    // pad to square, convert to costs
    std::vector<std::vector<double>> cost(size_t(dim) + 1, std::vector<double>(size_t(dim) + 1, 0.0));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            cost[size_t(i) + 1][size_t(j) + 1] =
                (i < n && j < m) ? -score[size_t(i)][size_t(j)] : 0.0;
    std::vector<double> u(size_t(dim) + 1, 0.0), v(size_t(dim) + 1, 0.0);
    std::vector<int> p(size_t(dim) + 1, 0), way(size_t(dim) + 1, 0);
    for (int i = 1; i <= dim; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(size_t(dim) + 1, kInf);
        std::vector<char> used(size_t(dim) + 1, false);
        do {
            used[size_t(j0)] = true;
            const int i0 = p[size_t(j0)];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= dim; ++j) {
                if (used[size_t(j)]) continue;
                const double cur = cost[size_t(i0)][size_t(j)] - u[size_t(i0)] - v[size_t(j)];
                if (cur < minv[size_t(j)]) {
                    minv[size_t(j)] = cur;
                    way[size_t(j)] = j0;
                }
                if (minv[size_t(j)] < delta) {
                    delta = minv[size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= dim; ++j) {
                if (used[size_t(j)]) {
                    u[size_t(p[size_t(j)])] += delta;
                    v[size_t(j)] -= delta;
                } else {
                    minv[size_t(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[size_t(j0)] != 0);
        do {
            const int j1 = way[size_t(j0)];
            p[size_t(j0)] = p[size_t(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> match(size_t(n), -1);
    for (int j = 1; j <= dim; ++j) {
        const int i = p[size_t(j)];
        if (i >= 1 && i <= n && j <= m) match[size_t(i) - 1] = j - 1;
    }
    return match;
}

}  // namespace oracle

#pragma once

#include <string>
#include <vector>

#include "vlnforge/core.hpp"

namespace vlnforge {

struct Aabb {
    Vec3 lo, hi;

    Vec3 center() const { return (lo + hi) * 0.5; }
    Vec3 size() const { return hi - lo; }
    double volume() const {
        const Vec3 s = size();
        return std::max(s.x, 0.0) * std::max(s.y, 0.0) * std::max(s.z, 0.0);
    }
    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z &&
               p.z <= hi.z;
    }
    static Aabb from_center_extent(const Vec3& c, const Vec3& e) {
        return {c - e * 0.5, c + e * 0.5};
    }
};

double iou(const Aabb& a, const Aabb& b);

struct RoomTruth {
    int id = 0;
    int floor = 0;
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // floor rectangle
    std::string type;

    bool contains_xy(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

struct ObjectTruth {
    int id = 0;
    uint16_t cls = 0;
    int room = 0;
    Vec3 center;
    Vec3 extent;

    Aabb box() const { return Aabb::from_center_extent(center, extent); }
};

struct SceneTruth {
    double building_x0 = 0, building_y0 = 0, building_x1 = 0, building_y1 = 0;
    std::vector<double> floor_heights;
    double wall_height = 2.6;
    std::vector<RoomTruth> rooms;
    std::vector<Aabb> walls;  // slabs: outer walls, partitions, floor and ceiling plates
    std::vector<ObjectTruth> objects;

    void check() const;  // throws InvalidArgument on violated invariants
};

/// View-level corruption model for rendered semantics.
struct NoiseSpec {
    std::string name = "none";
    /// Row-stochastic class confusion; empty means identity. Applied
    /// once per (surface entity, view): all pixels of an entity in a
    /// view share one corrupted label draw.
    std::vector<std::vector<double>> confusion;
    int boundary_jitter = 0;  // pixels
    double dropout = 0.0;     // per-pixel chance of a uniform-noise prediction

    bool is_identity() const { return confusion.empty() && boundary_jitter == 0 && dropout == 0.0; }
    void check(int num_classes) const;

    /// Samples a corrupted label for an entity of true class cls.
    uint16_t corrupt_class(uint16_t cls, class Rng& rng) const;
};

/// Named profiles: "none", "confusion30" (0.7 diagonal with structured
/// confusions, the fixture used for cross-view evaluation), "harsh"
/// (0.5 diagonal, jitter and dropout). Unknown names throw.
NoiseSpec noise_profile(const std::string& name, int num_classes);

}  // namespace vlnforge

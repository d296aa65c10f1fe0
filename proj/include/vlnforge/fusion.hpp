#pragma once

#include <map>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "vlnforge/json_util.hpp"
#include "vlnforge/render.hpp"
#include "vlnforge/view.hpp"
#include "vlnforge/vocab.hpp"

namespace vlnforge {

struct FusionParams {
    double voxel_size = 0.1;
    int connectivity = 26;  // 6 | 18 | 26
    int min_voxels = 5;
    int stride = 2;  // pixel subsampling when lifting views
    double map_overlap = 0.3;
    std::vector<uint16_t> stuff_classes = default_stuff_classes();

    void check() const;
};

/// Packs a voxel index (3 x 21-bit signed) into one key.
int64_t voxel_key(int ix, int iy, int iz);
void voxel_unpack(int64_t key, int& ix, int& iy, int& iz);

struct SemanticVoxelGrid {
    Vec3 origin;
    double voxel_size = 0.1;
    int num_classes = 0;

    struct Cell {
        std::vector<std::pair<uint16_t, double>> sums;  // sparse class mass
        uint32_t count = 0;

        void add(uint16_t cls, double mass);
        double sum_of(uint16_t cls) const;
        double total() const;
    };
    std::unordered_map<int64_t, Cell> cells;

    int64_t key_of(const Vec3& p) const;
    Vec3 center_of(int64_t key) const;
    Aabb voxel_box(int64_t key) const;
    size_t size() const { return cells.size(); }
};

/// Adds every point's class distribution to its voxel accumulator.
void accumulate(SemanticVoxelGrid& grid, const LabeledCloud& cloud);

/// Per-voxel argmax of accumulated mass (ties toward the lowest class
/// index); voxels whose winner is the void class are dropped. The
/// ordered result keeps downstream passes deterministic.
std::map<int64_t, uint16_t> finalize_labels(const SemanticVoxelGrid& grid);

/// Key of a 2D instance in a specific view.
struct ViewInstanceRef {
    int node = 0;
    int view = 0;
    uint16_t instance = 0;

    auto operator<=>(const ViewInstanceRef&) const = default;
    std::string str() const;
};

struct Object3D {
    int id = 0;
    uint16_t cls = 0;
    Vec3 center;   // aabb center
    Vec3 extent;   // aabb size
    Vec3 centroid; // mean voxel center
    std::vector<int64_t> voxels;  // sorted member keys
    std::map<ViewInstanceRef, int> support;  // 2D instances -> overlap counts

    Aabb box() const { return Aabb::from_center_extent(center, extent); }
};

/// Connected components of same-class voxels under the configured
/// connectivity; stuff classes and components below min_voxels are
/// dropped. Ids follow the sorted-key discovery order.
std::vector<Object3D> extract_instances(const std::map<int64_t, uint16_t>& labels,
                                        const SemanticVoxelGrid& grid,
                                        const FusionParams& params);

/// One Object3D per 2D instance of a single view; no cross-view
/// merging. Class is the argmax of the instance's summed probabilities.
std::vector<Object3D> single_view_objects(const ViewObservation& view, int node_id,
                                          int view_index, const FusionParams& params);

struct FusionResult {
    std::vector<Object3D> objects;
    std::map<ViewInstanceRef, int> view_map;        // instance -> object id
    std::unordered_map<int64_t, int> voxel_owner;   // voxel -> object id
    std::map<int64_t, uint16_t> voxel_labels;
};

/// Full cross-view fusion over the given nodes: lift, accumulate,
/// label, group, and associate 2D instances to fused objects. By
/// default each node's probability planes are released once consumed;
/// pass release_probs = false to keep the provider cache warm for a
/// second pass.
FusionResult fuse_scene(ViewProvider& provider, const std::vector<int>& node_ids,
                        int num_classes, const FusionParams& params, bool release_probs = true);

/// Single-view baseline over all views of the given nodes.
std::vector<Object3D> single_view_scene(ViewProvider& provider, const std::vector<int>& node_ids,
                                        const FusionParams& params, bool release_probs = true);

struct LabelAccuracy {
    double accuracy = 0.0;
    int matched = 0;
    int total = 0;
    bool undefined = false;  // no predictions (or none matched)
};

/// Matches each prediction to the ground-truth box of maximal IoU
/// (counting matches with IoU >= 0.1) and reports the fraction with the
/// correct class.
LabelAccuracy label_accuracy(const std::vector<Object3D>& objects, const SceneTruth& truth);

Json objects_to_json(const FusionResult& result, const std::vector<std::string>& vocab);
}  // namespace vlnforge

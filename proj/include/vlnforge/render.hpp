#pragma once

#include <filesystem>
#include <memory>
#include <unordered_map>
#include <vector>

#include "vlnforge/bundle.hpp"
#include "vlnforge/rng.hpp"
#include "vlnforge/truth.hpp"

namespace vlnforge {

struct RenderEntity {
    Aabb box;
    uint16_t cls = 0;
    int truth_object = -1;  // ground-truth object id, -1 for structure
};

struct RayHit {
    double t = 0.0;  // planar depth when dir has unit forward component
    int entity = -1;
};

/// Immutable ray-castable expansion of a SceneTruth: wall slabs, floor
/// and ceiling plates, and object boxes, with class labels resolved
/// against a vocabulary.
class RenderScene {
public:
    RenderScene(const SceneTruth& truth, const std::vector<std::string>& vocabulary);

    /// Nearest intersection along origin + t*dir with t in
    /// (1e-9, t_max]; entity -1 when nothing is hit.
    RayHit cast_ray(const Vec3& origin, const Vec3& dir, double t_max) const;

    const std::vector<RenderEntity>& entities() const { return entities_; }
    int num_classes() const { return num_classes_; }

private:
    std::vector<RenderEntity> entities_;
    int num_classes_ = 0;
};

struct RenderedView {
    ViewObservation view;
    /// Ground-truth object id per local 2D instance id (index 0 unused;
    /// local ids start at 1).
    std::vector<int> instance_to_object;
};

/// Renders one view with exact geometry, then applies the noise model
/// (entity-level confusion, boundary jitter, per-pixel dropout) and
/// quantizes class probabilities to the bundle's top-k representation.
RenderedView render_view(const RenderScene& scene, const Pose& pose,
                         const CameraIntrinsics& intrinsics, double max_depth, int topk,
                         const NoiseSpec& noise, Rng& rng);

class PlacementError : public Error {
public:
    explicit PlacementError(const std::string& msg) : Error(msg) {}
};

/// 36-view panorama at a node position; view k's corruption stream is
/// seeded with view_seed(render_seed, node_id, k).
PanoramaNode build_panorama(const RenderScene& scene, int node_id, const Vec3& position,
                            const ViewConfig& cfg, double max_depth, int topk,
                            const NoiseSpec& noise, uint64_t render_seed);

/// Panoramas for every position; positions must sit on navigable cells
/// of the field (PlacementError otherwise).
std::vector<PanoramaNode> build_panoramas(const RenderScene& scene,
                                          const NavigabilityField& field,
                                          const std::vector<Vec3>& positions,
                                          const ViewConfig& cfg, double max_depth, int topk,
                                          const NoiseSpec& noise, uint64_t render_seed);

/// Uniform access to panorama views regardless of whether they are
/// stored in a bundle directory or synthesized on demand. Views are
/// cached; release_probs() frees a node's probability planes (depth
/// and instances stay cached), and a later panorama() call
/// re-materializes them from the source.
class ViewProvider {
public:
    virtual ~ViewProvider() = default;

    /// Full views including class probabilities.
    const PanoramaNode& panorama(int node_id);
    /// Views with depth/instances only; may lack probability planes.
    const PanoramaNode& depth_panorama(int node_id);

    void release_probs(int node_id);
    virtual const std::vector<int>* instance_objects(int node_id, int view_index) const {
        (void)node_id; (void)view_index;
        return nullptr;
    }

    const ViewObservation& view(int node_id, int view_index) {
        return depth_panorama(node_id).views[size_t(view_index)];
    }
    float depth_at(int node_id, int view_index, int u, int v) {
        return view(node_id, view_index).depth_at(u, v);
    }

protected:
    virtual PanoramaNode materialize(int node_id) = 0;

    struct Entry {
        PanoramaNode node;
        bool stripped = false;
    };
    std::unordered_map<int, Entry> cache_;
};

/// Renders panoramas deterministically from ground truth.
class SynthViewProvider : public ViewProvider {
public:
    SynthViewProvider(std::shared_ptr<const RenderScene> scene, const SceneBundle& bundle,
                      std::vector<std::pair<int, Vec3>> node_positions);

    const std::vector<int>* instance_objects(int node_id, int view_index) const override;

protected:
    PanoramaNode materialize(int node_id) override;

private:
    std::shared_ptr<const RenderScene> scene_;
    ViewConfig cfg_;
    double max_depth_;
    int topk_;
    NoiseSpec noise_;
    uint64_t render_seed_;
    std::unordered_map<int, Vec3> positions_;
    std::unordered_map<int, std::vector<std::vector<int>>> instance_objects_;
};

/// Reads stored panoramas from a bundle directory.
class StoredViewProvider : public ViewProvider {
public:
    StoredViewProvider(std::filesystem::path bundle_dir, const SceneBundle& bundle);

protected:
    PanoramaNode materialize(int node_id) override;

private:
    std::filesystem::path dir_;
    const SceneBundle& bundle_;
};

/// Builds the right provider for a bundle: stored views when the node
/// has data on disk, otherwise a deterministic re-render from truth.
std::unique_ptr<ViewProvider> make_view_provider(
    const std::filesystem::path& bundle_dir, const SceneBundle& bundle,
    const std::vector<std::pair<int, Vec3>>& node_positions);

}  // namespace vlnforge

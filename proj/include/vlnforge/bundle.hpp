#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vlnforge/field.hpp"
#include "vlnforge/truth.hpp"
#include "vlnforge/view.hpp"

namespace vlnforge {

/// Shared view geometry for every panorama in a bundle.
struct ViewConfig {
    int width = 64;
    int height = 64;
    double hfov = kPi / 3.0;

    CameraIntrinsics intrinsics() const { return CameraIntrinsics(width, height, hfov); }
};

struct SceneBundle {
    std::string scene_id;
    NavigabilityField field;
    std::vector<std::string> class_vocabulary;
    std::vector<PanoramaNode> nodes;  // empty until the graph stage places them
    std::optional<SceneTruth> ground_truth;

    ViewConfig view;
    double max_depth = 10.0;
    int topk = 5;
    double agent_radius = 0.2;
    std::string noise_profile = "none";
    uint64_t render_seed = 0;

    int num_classes() const { return int(class_vocabulary.size()); }
    const PanoramaNode* find_node(int id) const;
    void check() const;  // throws InvalidArgument on violated invariants
};

}  // namespace vlnforge

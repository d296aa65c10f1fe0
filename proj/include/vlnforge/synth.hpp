#pragma once

#include <string>

#include "vlnforge/bundle.hpp"

namespace vlnforge {

class GenerationError : public Error {
public:
    explicit GenerationError(const std::string& msg) : Error(msg) {}
};

struct SynthParams {
    int min_floors = 1, max_floors = 1;
    int min_rooms = 9, max_rooms = 12;             // per floor
    int min_objects_per_room = 9, max_objects_per_room = 13;
    double min_room_dim = 3.0;
    double max_building_dim = 40.0;
    double wall_thickness = 0.1;
    double wall_height = 2.6;
    double door_width = 1.2;
    double door_height = 2.0;
    double extra_door_prob = 0.7;
    double open_boundary_prob = 0.25;  // chance a room boundary has no wall at all
    double object_gap = 0.3;   // clearance between object boxes
    double cell = 0.1;         // navigability grid resolution
    double camera_height = 1.2;
    double agent_radius = 0.2;
    ViewConfig view;
    double max_depth = 10.0;
    int topk = 5;
    std::string noise_profile = "none";

    void check() const;  // throws InvalidArgument on empty/invalid ranges
};

/// Deterministically generates a multi-room scene with ground truth.
/// The navigability field excludes walls and blocking objects inflated
/// by the agent radius; no panorama nodes are placed yet. Throws
/// GenerationError when the requested layout cannot fit.
SceneBundle generate_scene(uint64_t seed, const SynthParams& params,
                           const std::string& scene_id = "");

}  // namespace vlnforge

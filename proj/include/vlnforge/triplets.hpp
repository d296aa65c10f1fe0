#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vlnforge/fusion.hpp"
#include "vlnforge/instructions.hpp"
#include "vlnforge/nav_graph.hpp"

namespace vlnforge {

struct TripletParams {
    double d_o = 2.0;  // goal distance cap; infinity() disables it
    int min_hops = 4;
    int max_hops = 9;
    int per_object = 1;  // triplets per (object, goal set)
    double occlusion_factor = 0.9;
    double bbox_min_frac = 0.5;
    InstructionMode mode = InstructionMode::TemplateSent;
    int max_other_tokens = 15;
    bool goal_distance_to_box = false;  // measure d_o to the nearest box point

    void check() const;
};

struct GoalBox {
    int node = 0;
    int view = 0;
    int box[4] = {0, 0, 0, 0};  // u0, v0, u1, v1 inclusive
};

struct VlnTriplet {
    std::string scene_id;
    std::string instruction;
    int start_node = 0;
    double start_heading = 0.0;
    std::vector<int> expert_path;
    std::vector<int> goal_nodes;
    int target_object = 0;
    std::vector<GoalBox> target_bbox_2d;
};

Json triplet_to_json(const VlnTriplet& t);
VlnTriplet triplet_from_json(const Json& j);
void write_triplets_jsonl(const std::filesystem::path& path,
                          const std::vector<VlnTriplet>& triplets);
std::vector<VlnTriplet> read_triplets_jsonl(const std::filesystem::path& path);

/// Unweighted hop distances from a set of source nodes (INT_MAX when
/// unreachable).
std::vector<int> hop_distances(const NavGraph& graph, const std::vector<int>& sources);

/// Nodes from which the object is near (within d_o of its centroid, or
/// of the nearest box point when configured) and visible: the centroid
/// projects into at least one of the node's 36 views whose stored depth
/// at that pixel is >= occlusion_factor times the centroid's depth.
std::vector<int> goal_nodes(const Object3D& object, const NavGraph& graph, ViewProvider& provider,
                            double d_o, const TripletParams& params);

/// Uniform choice among nodes whose hop distance to the goal set lies
/// in [min_hops, max_hops]; nullopt when no such node exists.
std::optional<int> sample_start(const NavGraph& graph, const std::vector<int>& goals, Rng& rng,
                                const TripletParams& params);

/// Minimum-hop path from start to the goal set; ties prefer smaller
/// total geodesic weight, then the lexicographically smallest node-id
/// sequence. Throws Error when no goal is reachable.
std::vector<int> expert_path(const NavGraph& graph, int start, const std::vector<int>& goals);

struct TripletContext {
    std::string scene_id;
    const NavGraph* graph = nullptr;
    ViewProvider* provider = nullptr;
    const FusionResult* fusion = nullptr;
    const SceneTruth* truth = nullptr;  // optional, provides room labels
    double voxel_size = 0.1;
};

/// Full per-scene generation: goal sets (restricted to nodes where the
/// 2D->3D view map confirms covisibility), per-goal 2D boxes that pass
/// the back-projection soundness check, start sampling, expert paths
/// and instruction text.
std::vector<VlnTriplet> generate_triplets(const TripletContext& ctx, const TripletParams& params,
                                          uint64_t seed);

// ---------------------------------------------------------------------------
// Speaker prompt export

struct PromptToken {
    std::string class_name;
    Vec3 location;  // relative to the goal node, rotated into the prompt view frame
    Vec3 size;
    std::string feature;
};

struct SpeakerPrompt {
    std::string scene_id;
    int triplet_index = 0;
    int view = 0;  // panorama view defining the prompt frame
    PromptToken target;
    std::vector<PromptToken> others;
    struct ViewToken {
        double heading = 0.0;
        double elevation = 0.0;
        std::string feature;
    };
    std::vector<ViewToken> views;
};

std::vector<SpeakerPrompt> export_prompts(const std::vector<VlnTriplet>& triplets,
                                          const FusionResult& fusion, const NavGraph& graph,
                                          const std::vector<std::string>& vocab,
                                          const TripletParams& params);

Json prompt_to_json(const SpeakerPrompt& p);
SpeakerPrompt prompt_from_json(const Json& j);
void write_prompts_jsonl(const std::filesystem::path& path,
                         const std::vector<SpeakerPrompt>& prompts);
std::vector<SpeakerPrompt> read_prompts_jsonl(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Dataset-level operations

struct DatasetStats {
    size_t n_env = 0;
    size_t n_objects = 0;       // distinct (scene, target object) pairs
    size_t n_instructions = 0;
    size_t vocab_size = 0;      // whitespace tokens occurring more than 5 times
    double mean_instruction_length = 0.0;
};

DatasetStats dataset_stats(const std::vector<VlnTriplet>& triplets);
Json stats_to_json(const DatasetStats& s);

/// Keeps triplets from k environments sampled without replacement
/// (or from an explicit id list).
std::vector<VlnTriplet> subset_by_environments(const std::vector<VlnTriplet>& triplets, size_t k,
                                               Rng& rng);
std::vector<VlnTriplet> subset_by_environments(const std::vector<VlnTriplet>& triplets,
                                               const std::vector<std::string>& env_ids);

/// Caps the instruction count while drawing round-robin across every
/// environment. Throws InvalidArgument when cap exceeds the total.
std::vector<VlnTriplet> subset_matched_count(const std::vector<VlnTriplet>& triplets, size_t cap,
                                             Rng& rng);

/// Balances two datasets by resampling the smaller one with
/// replacement to the larger one's size, then shuffles the union.
std::vector<VlnTriplet> mix_balanced(const std::vector<VlnTriplet>& a,
                                     const std::vector<VlnTriplet>& b, Rng& rng);

}  // namespace vlnforge

#pragma once

#include <optional>
#include <vector>

#include "vlnforge/triplets.hpp"

namespace vlnforge {

struct SapSample {
    int kase = 0;                // 1, 2 or 3
    std::vector<int> history;    // visited node ids
    int target = -1;             // next node, -1 = STOP
};

struct SapOptions {
    int random_anchors = 1;  // case-(iii) samples per triplet
    bool hop_distances = false;  // use hop counts instead of geodesic weights
};

/// Case 1: the full trajectory with target STOP. Case 2: every proper
/// prefix with the next expert node as target. Case 3: a random anchor
/// node V_i with target argmin over nodes n != V_i of
/// d(V_i, n) + d(n, V_T); ties break toward the lower node id.
std::vector<SapSample> sap_samples(const VlnTriplet& triplet, const NavGraph& graph, Rng& rng,
                                   const SapOptions& opts = {});

/// The case-(iii) target for a given anchor; exposed for exhaustive
/// verification.
int sap_case3_target(const NavGraph& graph, int anchor, int final_node, bool hop_distances);

struct MlmSample {
    std::vector<std::string> tokens;
    std::vector<size_t> masked;  // sorted indices
};

/// Independent per-token masking at mask_prob with at least one mask
/// forced. Throws InvalidArgument on an empty token list.
MlmSample mlm_mask(const std::vector<std::string>& tokens, Rng& rng, double mask_prob = 0.15);

struct OgSample {
    std::vector<int> trajectory;
    std::vector<int> candidates;  // object ids visible at the final node
    int target_index = -1;
};

class OgConsistencyError : public Error {
public:
    explicit OgConsistencyError(const std::string& msg) : Error(msg) {}
};

/// Object-grounding sample at the trajectory's final node. Candidates
/// come from the 2D->3D view map; throws OgConsistencyError when the
/// triplet's target is not among them. Pass an rng to shuffle the
/// candidate order (the target index follows the shuffle).
OgSample og_sample(const VlnTriplet& triplet, const std::map<ViewInstanceRef, int>& view_map,
                   Rng* shuffle_rng = nullptr);

}  // namespace vlnforge

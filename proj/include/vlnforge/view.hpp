#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "vlnforge/core.hpp"

namespace vlnforge {

constexpr uint16_t kNoInstance = 0xFFFF;
constexpr int kVoidClass = 0;
constexpr int kViewsPerNode = 36;
constexpr int kHeadingsPerRing = 12;

/// Heading/elevation of view index k in [0, 36).
inline double view_heading(int k) { return (k % kHeadingsPerRing) * (kPi / 6.0); }
inline double view_elevation(int k) {
    static constexpr double rows[3] = {-kPi / 6.0, 0.0, kPi / 6.0};
    return rows[k / kHeadingsPerRing];
}

/// Sparse per-pixel class distribution: up to k explicit (class, q)
/// entries with probability q/65535; the residual 65535 - sum(q) is
/// implicit mass on the void class.
struct PixelProbs {
    std::vector<std::pair<uint16_t, uint16_t>> entries;

    double prob_of(uint16_t cls) const;
    /// Argmax including the implicit void residual; ties break toward
    /// the lowest class index.
    uint16_t argmax() const;
    double total() const;  // always 1 by construction
};

/// Quantizes a sparse float distribution (pairs of class, probability)
/// into at most k explicit entries, largest probabilities first;
/// leftover mass lands on the void residual. The q values are adjusted
/// so their sum never exceeds 65535.
std::vector<std::pair<uint16_t, uint16_t>> quantize_probs(
    std::vector<std::pair<uint16_t, double>> probs, int k);

struct ViewObservation {
    Pose pose;
    CameraIntrinsics intrinsics;
    int num_classes = 0;
    int topk = 0;
    float max_depth = 10.0f;
    std::vector<float> depth;          // H*W planar meters, 0 = invalid
    std::vector<uint16_t> prob_class;  // H*W*topk
    std::vector<uint16_t> prob_q;      // H*W*topk
    std::vector<uint16_t> instances;   // H*W or empty

    int width() const { return intrinsics.width; }
    int height() const { return intrinsics.height; }
    size_t pixel_count() const { return size_t(width()) * height(); }
    bool has_instances() const { return !instances.empty(); }

    float depth_at(int u, int v) const { return depth[size_t(v) * width() + u]; }
    uint16_t instance_at(int u, int v) const { return instances[size_t(v) * width() + u]; }

    PixelProbs probs_at(size_t pix) const;
    void set_probs(size_t pix, const std::vector<std::pair<uint16_t, uint16_t>>& entries);
    uint16_t argmax_at(size_t pix) const { return probs_at(pix).argmax(); }

    /// True when the pixel carries a usable surface sample.
    bool valid_at(size_t pix) const {
        const float d = depth[pix];
        return d > 0.0f && d < max_depth;
    }
};

struct PanoramaNode {
    int id = 0;
    Vec3 position;
    std::vector<ViewObservation> views;  // exactly 36 when populated

    void check() const;  // throws InvalidArgument on a malformed node
};

/// Point cloud with per-point quantized class distributions.
struct LabeledCloud {
    int num_classes = 0;
    int topk = 0;
    std::vector<Vec3> points;
    std::vector<uint16_t> prob_class;  // n*topk
    std::vector<uint16_t> prob_q;      // n*topk
    std::vector<uint16_t> instance;    // n (kNoInstance when the view had none)
    std::vector<uint32_t> pixel;       // n, source pixel index

    size_t size() const { return points.size(); }
};

/// Back-projects every valid-depth pixel (subsampled by stride in both
/// directions) into a labeled world-frame point cloud.
LabeledCloud lift_view(const ViewObservation& view, int stride = 1);

}  // namespace vlnforge

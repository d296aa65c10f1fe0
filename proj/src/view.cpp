#include "vlnforge/view.hpp"

#include <algorithm>

namespace vlnforge {

double PixelProbs::prob_of(uint16_t cls) const {
    uint32_t q = 0;
    uint32_t sum = 0;
    for (const auto& [c, qq] : entries) {
        sum += qq;
        if (c == cls) q += qq;
    }
    if (cls == kVoidClass) q += 65535 - sum;
    return q / 65535.0;
}

uint16_t PixelProbs::argmax() const {
    uint32_t void_q = 65535;
    for (const auto& [c, q] : entries) void_q -= q;
    for (const auto& [c, q] : entries)
        if (c == kVoidClass) void_q += q;

    uint16_t best = kVoidClass;
    uint32_t best_q = void_q;
    for (const auto& [c, q] : entries) {
        const uint32_t qq = (c == kVoidClass) ? void_q : q;
        if (qq > best_q || (qq == best_q && c < best)) {
            best_q = qq;
            best = c;
        }
    }
    return best;
}

double PixelProbs::total() const {
    return 1.0;  // residual completes the distribution by construction
}

std::vector<std::pair<uint16_t, uint16_t>> quantize_probs(
    std::vector<std::pair<uint16_t, double>> probs, int k) {
    std::sort(probs.begin(), probs.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (int(probs.size()) > k) probs.resize(size_t(k));
    std::vector<std::pair<uint16_t, uint16_t>> out;
    out.reserve(probs.size());
    uint32_t sum = 0;
    for (const auto& [c, p] : probs) {
        const double clamped = std::min(std::max(p, 0.0), 1.0);
        uint32_t q = uint32_t(std::lround(clamped * 65535.0));
        if (sum + q > 65535) q = 65535 - sum;
        sum += q;
        if (q > 0) out.emplace_back(c, uint16_t(q));
    }
    return out;
}

PixelProbs ViewObservation::probs_at(size_t pix) const {
    PixelProbs out;
    const size_t base = pix * size_t(topk);
    for (int i = 0; i < topk; ++i) {
        const uint16_t q = prob_q[base + i];
        if (q > 0) out.entries.emplace_back(prob_class[base + i], q);
    }
    return out;
}

void ViewObservation::set_probs(size_t pix,
                                const std::vector<std::pair<uint16_t, uint16_t>>& entries) {
    const size_t base = pix * size_t(topk);
    for (int i = 0; i < topk; ++i) {
        if (i < int(entries.size())) {
            prob_class[base + i] = entries[size_t(i)].first;
            prob_q[base + i] = entries[size_t(i)].second;
        } else {
            prob_class[base + i] = 0;
            prob_q[base + i] = 0;
        }
    }
}

void PanoramaNode::check() const {
    if (views.size() != kViewsPerNode)
        throw InvalidArgument("panorama node must have exactly 36 views");
    for (int k = 0; k < kViewsPerNode; ++k) {
        const auto& v = views[size_t(k)];
        if (v.pose.heading != view_heading(k) || v.pose.elevation != view_elevation(k))
            throw InvalidArgument("panorama view orientation off the canonical grid");
        if (!(v.pose.position == position))
            throw InvalidArgument("panorama view not captured at the node position");
    }
}

LabeledCloud lift_view(const ViewObservation& view, int stride) {
    if (stride < 1) throw InvalidArgument("lift_view: stride must be >= 1");
    LabeledCloud cloud;
    cloud.num_classes = view.num_classes;
    cloud.topk = view.topk;
    const int w = view.width();
    const int h = view.height();
    for (int v = 0; v < h; v += stride) {
        for (int u = 0; u < w; u += stride) {
            const size_t pix = size_t(v) * w + u;
            if (!view.valid_at(pix)) continue;
            cloud.points.push_back(
                pixel_to_point(u, v, view.depth[pix], view.intrinsics, view.pose));
            const size_t base = pix * size_t(view.topk);
            for (int i = 0; i < view.topk; ++i) {
                cloud.prob_class.push_back(view.prob_class[base + i]);
                cloud.prob_q.push_back(view.prob_q[base + i]);
            }
            cloud.instance.push_back(view.has_instances() ? view.instances[pix] : kNoInstance);
            cloud.pixel.push_back(uint32_t(pix));
        }
    }
    return cloud;
}

}  // namespace vlnforge

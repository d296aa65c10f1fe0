#include "vlnforge/truth.hpp"

#include <algorithm>
#include <set>

#include "vlnforge/rng.hpp"
#include "vlnforge/vocab.hpp"

namespace vlnforge {

double iou(const Aabb& a, const Aabb& b) {
    const double ix = std::min(a.hi.x, b.hi.x) - std::max(a.lo.x, b.lo.x);
    const double iy = std::min(a.hi.y, b.hi.y) - std::max(a.lo.y, b.lo.y);
    const double iz = std::min(a.hi.z, b.hi.z) - std::max(a.lo.z, b.lo.z);
    if (ix <= 0 || iy <= 0 || iz <= 0) return 0.0;
    const double inter = ix * iy * iz;
    const double uni = a.volume() + b.volume() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

void SceneTruth::check() const {
    std::set<int> ids;
    for (const auto& o : objects) {
        if (!ids.insert(o.id).second) throw InvalidArgument("duplicate object id");
        if (!(o.extent.x > 0 && o.extent.y > 0 && o.extent.z > 0))
            throw InvalidArgument("object extent must be strictly positive");
        if (o.room < 0 || o.room >= int(rooms.size()))
            throw InvalidArgument("object references unknown room");
        const auto& r = rooms[size_t(o.room)];
        if (!r.contains_xy(o.center.x, o.center.y))
            throw InvalidArgument("object center outside its room");
    }
}

void NoiseSpec::check(int num_classes) const {
    if (!confusion.empty()) {
        if (int(confusion.size()) != num_classes)
            throw InvalidArgument("confusion matrix size does not match vocabulary");
        for (const auto& row : confusion) {
            if (int(row.size()) != num_classes)
                throw InvalidArgument("confusion matrix is not square");
            double sum = 0;
            for (double p : row) {
                if (p < 0 || p > 1) throw InvalidArgument("confusion entries must be in [0,1]");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-6)
                throw InvalidArgument("confusion rows must sum to 1");
        }
    }
    if (dropout < 0 || dropout > 1) throw InvalidArgument("dropout must be in [0,1]");
    if (boundary_jitter < 0) throw InvalidArgument("boundary_jitter must be >= 0");
}

uint16_t NoiseSpec::corrupt_class(uint16_t cls, Rng& rng) const {
    if (confusion.empty()) return cls;
    const auto& row = confusion[cls];
    double r = rng.uniform_double();
    for (size_t c = 0; c < row.size(); ++c) {
        r -= row[c];
        if (r < 0) return uint16_t(c);
    }
    return cls;  // numerical fallthrough
}

namespace {

// Structured confusion partners, mirroring the kinds of mistakes 2D
// models make between look-alike categories.
const std::vector<std::pair<std::string, std::vector<std::string>>>& confusion_partners() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> partners = {
        {"chair", {"stool", "armchair", "bench", "sofa"}},
        {"table", {"desk", "counter", "nightstand", "bench"}},
        {"sofa", {"armchair", "bench", "chair", "bed"}},
        {"bed", {"sofa", "bench", "bathtub", "rug"}},
        {"cabinet", {"wardrobe", "dresser", "bookshelf", "refrigerator"}},
        {"shelf", {"bookshelf", "cabinet", "counter", "painting"}},
        {"lamp", {"chandelier", "vase", "plant", "stool"}},
        {"mirror", {"window", "painting", "television", "curtain"}},
        {"desk", {"table", "counter", "piano", "dresser"}},
        {"wardrobe", {"door", "cabinet", "refrigerator", "bookshelf"}},
        {"window", {"mirror", "painting", "curtain", "television"}},
        {"door", {"wardrobe", "window", "mirror", "curtain"}},
        {"toilet", {"sink", "stool", "basket", "vase"}},
        {"sink", {"toilet", "basket", "vase", "stool"}},
        {"bathtub", {"bench", "sink", "bed", "rug"}},
        {"refrigerator", {"wardrobe", "cabinet", "washer", "oven"}},
        {"oven", {"microwave", "washer", "refrigerator", "fireplace"}},
        {"microwave", {"oven", "television", "washer", "basket"}},
        {"television", {"painting", "mirror", "window", "microwave"}},
        {"plant", {"vase", "basket", "lamp", "chandelier"}},
        {"pillow", {"basket", "stool", "rug", "vase"}},
        {"curtain", {"window", "painting", "mirror", "door"}},
        {"rug", {"bench", "basket", "pillow", "bed"}},
        {"chandelier", {"lamp", "plant", "vase", "basket"}},
        {"stool", {"chair", "basket", "nightstand", "toilet"}},
        {"bench", {"sofa", "table", "bathtub", "rug"}},
        {"bookshelf", {"shelf", "cabinet", "wardrobe", "dresser"}},
        {"counter", {"table", "desk", "shelf", "piano"}},
        {"dresser", {"cabinet", "nightstand", "desk", "counter"}},
        {"nightstand", {"stool", "dresser", "table", "basket"}},
        {"armchair", {"chair", "sofa", "stool", "bench"}},
        {"fireplace", {"cabinet", "oven", "piano", "washer"}},
        {"washer", {"oven", "refrigerator", "microwave", "fireplace"}},
        {"piano", {"desk", "cabinet", "fireplace", "counter"}},
        {"painting", {"mirror", "window", "television", "shelf"}},
        {"vase", {"lamp", "plant", "pillow", "sink"}},
        {"basket", {"stool", "vase", "pillow", "plant"}},
    };
    return partners;
}

std::vector<std::vector<double>> structured_confusion(double diagonal, int num_classes) {
    const auto& vocab = default_class_vocabulary();
    const auto& stuff = default_stuff_classes();
    std::vector<std::vector<double>> m(size_t(num_classes),
                                       std::vector<double>(size_t(num_classes), 0.0));
    for (int c = 0; c < num_classes; ++c) m[size_t(c)][size_t(c)] = 1.0;

    for (const auto& [name, confusable] : confusion_partners()) {
        const int c = class_index(vocab, name);
        if (c < 0 || c >= num_classes) continue;
        if (std::find(stuff.begin(), stuff.end(), uint16_t(c)) != stuff.end()) continue;
        std::vector<int> targets;
        for (const auto& t : confusable) {
            const int ti = class_index(vocab, t);
            if (ti >= 0 && ti < num_classes && ti != c) targets.push_back(ti);
        }
        if (targets.empty()) continue;
        auto& row = m[size_t(c)];
        std::fill(row.begin(), row.end(), 0.0);
        row[size_t(c)] = diagonal;
        const double off = (1.0 - diagonal) / double(targets.size());
        for (int t : targets) row[size_t(t)] += off;
    }
    return m;
}

}  // namespace

NoiseSpec noise_profile(const std::string& name, int num_classes) {
    NoiseSpec spec;
    spec.name = name;
    if (name == "none") {
        // identity
    } else if (name == "confusion30") {
        spec.confusion = structured_confusion(0.7, num_classes);
    } else if (name == "harsh") {
        spec.confusion = structured_confusion(0.5, num_classes);
        spec.boundary_jitter = 2;
        spec.dropout = 0.05;
    } else {
        throw InvalidArgument("unknown noise profile: " + name);
    }
    spec.check(num_classes);
    return spec;
}

}  // namespace vlnforge

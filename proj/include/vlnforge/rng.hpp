#pragma once

#include <cstdint>
#include <initializer_list>

namespace vlnforge {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Folds any number of values into one seed; the documented derivation
/// behind per-scene/per-stage seed fan-out.
inline uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
    uint64_t state = 0x6C078965A3B1F459ULL;
    uint64_t h = splitmix64(state);
    for (uint64_t p : parts) {
        state ^= p + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
        h = splitmix64(state);
    }
    return h;
}

// Stage tags for seed derivation (see format.md).
namespace seed_tag {
constexpr uint64_t kScene = 0x53434E45;     // "SCNE"
constexpr uint64_t kSynth = 0x53594E54;     // "SYNT"
constexpr uint64_t kGraph = 0x47525048;     // "GRPH"
constexpr uint64_t kRender = 0x524E4452;    // "RNDR"
constexpr uint64_t kTriplets = 0x54524950;  // "TRIP"
constexpr uint64_t kEval = 0x4556414C;      // "EVAL"
constexpr uint64_t kProxy = 0x50524F58;     // "PROX"
}  // namespace seed_tag

/// xoshiro256++ with hand-rolled distributions so that streams are
/// identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static Rng child(uint64_t seed, std::initializer_list<uint64_t> parts) {
        uint64_t h = seed;
        for (uint64_t p : parts) h = mix_seed({h, p});
        return Rng(h);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Unbiased integer in [0, n). n must be > 0.
    uint64_t uniform_u64(uint64_t n) {
        const uint64_t threshold = -n % n;
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform_u64(static_cast<uint64_t>(hi - lo) + 1));
    }

    /// Double in [0, 1).
    double uniform_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform_double(double lo, double hi) { return lo + (hi - lo) * uniform_double(); }

    bool bernoulli(double p) { return uniform_double() < p; }

    template <typename T>
    void shuffle(T& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = uniform_u64(i);
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t s_[4];
};

inline uint64_t scene_seed(uint64_t master, uint64_t scene_index) {
    return mix_seed({master, seed_tag::kScene, scene_index});
}
inline uint64_t stage_seed(uint64_t scene, uint64_t tag) { return mix_seed({scene, tag}); }
inline uint64_t view_seed(uint64_t stage, uint64_t node, uint64_t view) {
    return mix_seed({stage, node, view});
}

}  // namespace vlnforge

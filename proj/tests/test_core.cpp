#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "vlnforge/core.hpp"
#include "vlnforge/hash.hpp"
#include "vlnforge/rng.hpp"
#include "vlnforge/view.hpp"

using namespace vlnforge;

TEST_CASE("principal pixel lifts along the viewing axis") {
    // odd dimensions put the principal point on an integer pixel
    const CameraIntrinsics intr(65, 65, kPi / 2);
    const Pose pose = Pose::at({0, 0, 0}, 0.0, 0.0);
    const Vec3 p = pixel_to_point(32, 32, 2.0, intr, pose);
    CHECK(p.x == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.z == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("left edge pixel offset equals tan of half the field of view") {
    const CameraIntrinsics intr(65, 65, kPi / 2);
    const Pose pose = Pose::at({0, 0, 0}, 0.0, 0.0);
    const Vec3 p = pixel_to_point(0, 32, 1.0, intr, pose);
    CHECK(p.x == doctest::Approx(1.0).epsilon(1e-12));
    // heading 0 looks along +x; image-left is +y (right axis is -y)
    CHECK(std::abs(p.y) == doctest::Approx(std::tan(kPi / 4)).epsilon(1e-12));
    CHECK(p.z == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("invalid depth is rejected") {
    const CameraIntrinsics intr(64, 64, kPi / 3);
    CHECK_THROWS_AS(pixel_to_point(0, 0, 0.0, intr, Pose{}), InvalidArgument);
    CHECK_THROWS_AS(pixel_to_point(0, 0, -1.0, intr, Pose{}), InvalidArgument);
}

TEST_CASE("back-projection matches an independent projection oracle") {
    Rng rng(2024);
    const oracle::OracleCamera cam{97, 65, 1.1};
    const CameraIntrinsics intr(97, 65, 1.1);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 origin{rng.uniform_double(-5, 5), rng.uniform_double(-5, 5),
                          rng.uniform_double(0, 3)};
        const double heading = rng.uniform_double(0, kTwoPi);
        const double elevation = rng.uniform_double(-1.2, 1.2);
        const double u = rng.uniform_double(0, 96);
        const double v = rng.uniform_double(0, 64);
        const double depth = rng.uniform_double(0.1, 15.0);
        const Pose pose = Pose::at(origin, heading, elevation);
        const Vec3 mine = pixel_to_point(u, v, depth, intr, pose);
        const Vec3 ref = oracle::backproject(cam, u, v, depth, origin, heading, elevation);
        CHECK(distance(mine, ref) < 1e-6);
    }
}

TEST_CASE("project then backproject round-trips") {
    Rng rng(77);
    const CameraIntrinsics intr(64, 48, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const Pose pose = Pose::at({rng.uniform_double(-3, 3), rng.uniform_double(-3, 3), 1.2},
                                   rng.uniform_double(0, kTwoPi), rng.uniform_double(-0.5, 0.5));
        const double u = rng.uniform_double(0, 63);
        const double v = rng.uniform_double(0, 47);
        const double depth = rng.uniform_double(0.2, 9.0);
        const Vec3 p = pixel_to_point(u, v, depth, intr, pose);
        const PixelProjection proj = project_point(p, intr, pose);
        CHECK(std::abs(proj.u - u) < 0.5);
        CHECK(std::abs(proj.v - v) < 0.5);
        CHECK(std::abs(proj.depth - depth) < 1e-5);
        CHECK(std::abs(proj.u - u) < 1e-6);  // analytically exact inverse
    }
}

TEST_CASE("panorama headings partition the circle") {
    for (int k = 0; k < kHeadingsPerRing; ++k)
        CHECK(view_heading(k) == k * (kPi / 6.0));
    CHECK(view_heading(12) == view_heading(0));
    for (int k = 0; k < kViewsPerNode; ++k) {
        const double e = view_elevation(k);
        CHECK((e == -kPi / 6.0 || e == 0.0 || e == kPi / 6.0));
    }
}

TEST_CASE("heading normalization wraps into [0, 2pi)") {
    CHECK(normalize_heading(kTwoPi) == 0.0);
    CHECK(normalize_heading(-kPi / 2) == doctest::Approx(3 * kPi / 2));
    CHECK(normalize_heading(5 * kPi) == doctest::Approx(kPi));
}

TEST_CASE("quantized pixel distributions stay normalized") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        // random distribution over up to 12 classes
        std::vector<std::pair<uint16_t, double>> probs;
        double rest = 1.0;
        const int n = rng.uniform_int(1, 12);
        for (int c = 0; c < n; ++c) {
            const double p = (c == n - 1) ? rest : rng.uniform_double() * rest;
            probs.emplace_back(uint16_t(c + 1), p);
            rest -= p;
        }
        const auto q = quantize_probs(probs, 5);
        PixelProbs pix{q};
        double total = 0.0;
        for (int c = 0; c < 16; ++c) total += pix.prob_of(uint16_t(c));
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
        // explicit entries are within quantization error of the input
        for (const auto& [c, p] : probs) {
            const bool kept =
                std::any_of(q.begin(), q.end(), [&](const auto& e) { return e.first == c; });
            if (kept) CHECK(pix.prob_of(c) == doctest::Approx(p).epsilon(1e-3));
        }
    }
}

TEST_CASE("one-hot distributions quantize exactly") {
    const auto q = quantize_probs({{7, 1.0}}, 5);
    REQUIRE(q.size() == 1);
    CHECK(q[0].first == 7);
    CHECK(q[0].second == 65535);
    PixelProbs pix{q};
    CHECK(pix.prob_of(7) == 1.0);
    CHECK(pix.argmax() == 7);
}

TEST_CASE("argmax ties break toward the lowest class index") {
    PixelProbs pix{{{3, 20000}, {1, 20000}, {9, 20000}}};
    CHECK(pix.argmax() == 1);
}

TEST_CASE("sha256 matches known vectors") {
    CHECK(Sha256::of_string("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(Sha256::of_string("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(Sha256::of_string(std::string(1000, 'a')) !=
          Sha256::of_string(std::string(1001, 'a')));
}

TEST_CASE("rng streams are deterministic and uniform-ish") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(43);
    size_t below = 0;
    for (int i = 0; i < 100000; ++i)
        if (c.uniform_double() < 0.5) ++below;
    CHECK(below > 49000);
    CHECK(below < 51000);
}

TEST_CASE("seed mixing separates nearby inputs") {
    CHECK(mix_seed({1, 2}) != mix_seed({2, 1}));
    CHECK(scene_seed(1, 0) != scene_seed(1, 1));
    CHECK(scene_seed(1, 0) != scene_seed(2, 0));
}

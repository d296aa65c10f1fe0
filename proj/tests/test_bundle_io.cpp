#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vlnforge/bundle_io.hpp"
#include "vlnforge/json_util.hpp"
#include "vlnforge/png_io.hpp"
#include "vlnforge/render.hpp"
#include "vlnforge/rng.hpp"
#include "vlnforge/synth.hpp"

using namespace vlnforge;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("vlnforge_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

SynthParams small_params() {
    SynthParams p;
    p.min_rooms = 2;
    p.max_rooms = 3;
    p.min_objects_per_room = 2;
    p.max_objects_per_room = 4;
    p.view.width = 32;
    p.view.height = 32;
    return p;
}

SceneBundle bundle_with_views(uint64_t seed) {
    SceneBundle bundle = generate_scene(seed, small_params(), "scene_test");
    const RenderScene scene(*bundle.ground_truth, bundle.class_vocabulary);
    // two hand-picked navigable positions, far enough apart
    std::vector<Vec3> positions;
    const FloorGrid& g = bundle.field.floors[0];
    for (int iy = 0; iy < g.ny && positions.size() < 2; ++iy)
        for (int ix = 0; ix < g.nx && positions.size() < 2; ++ix)
            if (g.is_navigable(ix, iy) &&
                (positions.empty() ||
                 distance_xy(positions[0], {g.cell_x(ix), g.cell_y(iy), 0}) > 2.0))
                positions.push_back(
                    {g.cell_x(ix), g.cell_y(iy), g.height + bundle.field.camera_height});
    REQUIRE(positions.size() == 2);
    bundle.nodes = build_panoramas(scene, bundle.field, positions, bundle.view, bundle.max_depth,
                                   bundle.topk, noise_profile("none", bundle.num_classes()),
                                   bundle.render_seed);
    return bundle;
}

}  // namespace

TEST_CASE("gray png round-trips") {
    Rng rng(9);
    GrayImage img;
    img.width = 33;
    img.height = 17;
    img.pixels.resize(33 * 17);
    for (auto& p : img.pixels) p = uint8_t(rng.next_u64() & 0xff);
    const auto bytes = encode_gray_png(img);
    const GrayImage back = decode_gray_png(bytes.data(), bytes.size());
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.pixels == img.pixels);
}

TEST_CASE("png decoder rejects garbage") {
    std::vector<uint8_t> junk(64, 0x41);
    CHECK_THROWS_AS(decode_gray_png(junk.data(), junk.size()), Error);
}

TEST_CASE("bundle save/load round-trips every field") {
    const fs::path dir = temp_dir("roundtrip");
    const SceneBundle bundle = bundle_with_views(11);
    save_bundle(bundle, dir);
    const SceneBundle back = load_bundle(dir);

    CHECK(back.scene_id == bundle.scene_id);
    CHECK(back.class_vocabulary == bundle.class_vocabulary);
    CHECK(back.max_depth == bundle.max_depth);
    CHECK(back.topk == bundle.topk);
    CHECK(back.render_seed == bundle.render_seed);
    REQUIRE(back.field.floors.size() == bundle.field.floors.size());
    CHECK(back.field.floors[0].navigable == bundle.field.floors[0].navigable);
    REQUIRE(back.ground_truth.has_value());
    CHECK(back.ground_truth->objects.size() == bundle.ground_truth->objects.size());
    REQUIRE(back.nodes.size() == bundle.nodes.size());
    for (size_t n = 0; n < back.nodes.size(); ++n) {
        REQUIRE(back.nodes[n].views.size() == size_t(kViewsPerNode));
        for (int k = 0; k < kViewsPerNode; ++k) {
            const auto& a = bundle.nodes[n].views[size_t(k)];
            const auto& b = back.nodes[n].views[size_t(k)];
            CHECK(a.depth == b.depth);  // float32 exact
            CHECK(a.prob_class == b.prob_class);
            CHECK(a.prob_q == b.prob_q);  // quantized at render time, lossless on disk
            CHECK(a.instances == b.instances);
        }
    }
}

TEST_CASE("truncated manifest yields a parse error and no bundle") {
    const fs::path dir = temp_dir("truncated");
    save_bundle(bundle_with_views(12), dir);
    const std::string text = read_text_file(dir / "manifest.json");
    write_text_file(dir / "manifest.json", text.substr(0, text.size() / 2));
    try {
        load_bundle(dir);
        FAIL("expected a parse error");
    } catch (const BundleError& e) {
        CHECK(e.kind() == BundleError::Kind::Parse);
    }
}

TEST_CASE("version mismatch is its own error") {
    const fs::path dir = temp_dir("version");
    save_bundle(bundle_with_views(13), dir);
    Json manifest = read_json_file(dir / "manifest.json");
    manifest["format_version"] = 999;
    write_json_file(dir / "manifest.json", manifest);
    try {
        load_bundle(dir);
        FAIL("expected a version error");
    } catch (const BundleError& e) {
        CHECK(e.kind() == BundleError::Kind::VersionMismatch);
    }
}

TEST_CASE("checksum corruption is detected") {
    const fs::path dir = temp_dir("checksum");
    save_bundle(bundle_with_views(14), dir);
    {
        std::fstream f(dir / "nodes/0/view3.depth",
                       std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(40);
        const char junk = 0x5A;
        f.write(&junk, 1);
    }
    try {
        load_bundle(dir);
        FAIL("expected a checksum error");
    } catch (const BundleError& e) {
        CHECK(e.kind() == BundleError::Kind::ChecksumMismatch);
    }
    CHECK_NOTHROW(load_bundle(dir, {.load_views = true, .verify = false}));
}

TEST_CASE("missing view file is its own error") {
    const fs::path dir = temp_dir("missing");
    save_bundle(bundle_with_views(15), dir);
    fs::remove(dir / "nodes/1/view7.probs");
    try {
        load_bundle(dir);
        FAIL("expected a missing-file error");
    } catch (const BundleError& e) {
        CHECK(e.kind() == BundleError::Kind::MissingFile);
    }
}

TEST_CASE("single-class vocabulary degenerates to certainty") {
    SceneBundle bundle;
    bundle.scene_id = "degenerate";
    bundle.class_vocabulary = {"void"};
    bundle.topk = 5;
    bundle.view = {8, 8, kPi / 3};
    FloorGrid g;
    g.nx = g.ny = 4;
    g.cell = 0.5;
    g.navigable.assign(16, 1);
    bundle.field.floors.push_back(g);

    PanoramaNode node;
    node.id = 0;
    node.position = {1.0, 1.0, 1.2};
    for (int k = 0; k < kViewsPerNode; ++k) {
        ViewObservation v;
        v.pose = Pose::at(node.position, view_heading(k), view_elevation(k));
        v.intrinsics = bundle.view.intrinsics();
        v.num_classes = 1;
        v.topk = bundle.topk;
        v.depth.assign(64, 1.0f);
        v.prob_class.assign(64 * 5, 0);
        v.prob_q.assign(64 * 5, 0);
        for (size_t pix = 0; pix < 64; ++pix) v.set_probs(pix, {{0, 65535}});
        node.views.push_back(std::move(v));
    }
    bundle.nodes.push_back(std::move(node));
    bundle.check();

    const fs::path dir = temp_dir("degenerate");
    save_bundle(bundle, dir);
    const SceneBundle back = load_bundle(dir);
    for (const auto& v : back.nodes[0].views)
        for (size_t pix = 0; pix < v.pixel_count(); ++pix)
            CHECK(v.probs_at(pix).prob_of(0) == 1.0);
}

TEST_CASE("stored views round-trip through the provider") {
    const fs::path dir = temp_dir("provider");
    const SceneBundle bundle = bundle_with_views(16);
    save_bundle(bundle, dir);
    SceneBundle meta = load_bundle(dir, {.load_views = false, .verify = true});
    StoredViewProvider provider(dir, meta);
    const PanoramaNode& node = provider.panorama(0);
    REQUIRE(node.views.size() == size_t(kViewsPerNode));
    CHECK(node.views[5].depth == bundle.nodes[0].views[5].depth);
    provider.release_probs(0);
    CHECK(provider.view(0, 5).depth == bundle.nodes[0].views[5].depth);  // depth survives
    CHECK(provider.panorama(0).views[5].prob_q == bundle.nodes[0].views[5].prob_q);
}

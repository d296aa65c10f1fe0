#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <set>

#include "oracles.hpp"
#include "vlnforge/fusion.hpp"
#include "vlnforge/synth.hpp"

using namespace vlnforge;

namespace {

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

LabeledCloud cloud_of(std::vector<std::pair<Vec3, std::vector<std::pair<uint16_t, uint16_t>>>> pts,
                      int topk = 5, int num_classes = 8) {
    LabeledCloud cloud;
    cloud.topk = topk;
    cloud.num_classes = num_classes;
    for (const auto& [p, probs] : pts) {
        cloud.points.push_back(p);
        for (int k = 0; k < topk; ++k) {
            if (k < int(probs.size())) {
                cloud.prob_class.push_back(probs[size_t(k)].first);
                cloud.prob_q.push_back(probs[size_t(k)].second);
            } else {
                cloud.prob_class.push_back(0);
                cloud.prob_q.push_back(0);
            }
        }
        cloud.instance.push_back(kNoInstance);
        cloud.pixel.push_back(0);
    }
    return cloud;
}

struct SceneFixture {
    SceneBundle bundle;
    std::shared_ptr<RenderScene> scene;
    std::vector<std::pair<int, Vec3>> node_positions;
    std::unique_ptr<SynthViewProvider> provider;
    std::vector<int> node_ids;

    explicit SceneFixture(uint64_t seed, const std::string& noise = "none") {
        SynthParams p = small_params();
        p.noise_profile = noise;
        bundle = generate_scene(seed, p);
        GraphParams gp;
        gp.sample_count = 3000;
        Rng rng(stage_seed(seed, seed_tag::kGraph));
        const auto candidates = sample_navigable(bundle.field, gp.sample_count, rng);
        const auto nodes = build_nodes(candidates, bundle.field, gp);
        for (size_t i = 0; i < nodes.size(); ++i) node_positions.emplace_back(int(i), nodes[i]);
        scene = std::make_shared<RenderScene>(*bundle.ground_truth, bundle.class_vocabulary);
        provider = std::make_unique<SynthViewProvider>(scene, bundle, node_positions);
        for (const auto& [id, pos] : node_positions) node_ids.push_back(id);
    }
};

}  // namespace

TEST_CASE("accumulating an empty cloud changes nothing") {
    SemanticVoxelGrid grid;
    accumulate(grid, LabeledCloud{});
    CHECK(grid.size() == 0);
}

TEST_CASE("single point mean equals its distribution") {
    SemanticVoxelGrid grid;
    grid.voxel_size = 0.1;
    accumulate(grid, cloud_of({{{0.05, 0.05, 0.05},
                                {{1, uint16_t(std::lround(0.6 * 65535))},
                                 {2, uint16_t(std::lround(0.4 * 65535))}}}}));
    REQUIRE(grid.size() == 1);
    const auto& cell = grid.cells.begin()->second;
    CHECK(cell.count == 1);
    CHECK(cell.sum_of(1) == doctest::Approx(0.6).epsilon(1e-4));
    CHECK(cell.sum_of(2) == doctest::Approx(0.4).epsilon(1e-4));
}

TEST_CASE("two points in one voxel average to the arithmetic mean") {
    SemanticVoxelGrid grid;
    grid.voxel_size = 0.1;
    auto q = [](double p) { return uint16_t(std::lround(p * 65535)); };
    accumulate(grid, cloud_of({{{0.02, 0.02, 0.02}, {{1, q(0.6)}, {2, q(0.4)}}},
                               {{0.08, 0.08, 0.08}, {{1, q(0.1)}, {2, q(0.9)}}}}));
    REQUIRE(grid.size() == 1);
    const auto& cell = grid.cells.begin()->second;
    CHECK(cell.count == 2);
    CHECK(cell.sum_of(1) / 2 == doctest::Approx(0.35).epsilon(1e-4));
    CHECK(cell.sum_of(2) / 2 == doctest::Approx(0.65).epsilon(1e-4));
    const auto labels = finalize_labels(grid);
    CHECK(labels.begin()->second == 2);
}

TEST_CASE("accumulation is order-independent") {
    SceneFixture fx(5, "confusion30");
    const PanoramaNode& pano = fx.provider->panorama(fx.node_ids[0]);

    SemanticVoxelGrid forward, reverse;
    forward.voxel_size = reverse.voxel_size = 0.1;
    for (int k = 0; k < kViewsPerNode; ++k)
        accumulate(forward, lift_view(pano.views[size_t(k)], 2));
    for (int k = kViewsPerNode - 1; k >= 0; --k)
        accumulate(reverse, lift_view(pano.views[size_t(k)], 2));

    REQUIRE(forward.size() == reverse.size());
    for (const auto& [key, cell] : forward.cells) {
        const auto it = reverse.cells.find(key);
        REQUIRE(it != reverse.cells.end());
        CHECK(cell.count == it->second.count);
        for (const auto& [cls, sum] : cell.sums)
            CHECK(std::abs(sum / cell.count - it->second.sum_of(cls) / it->second.count) < 1e-9);
    }
}

TEST_CASE("voxel means are bounded and sub-stochastic") {
    SceneFixture fx(6, "harsh");
    SemanticVoxelGrid grid;
    grid.voxel_size = 0.1;
    const PanoramaNode& pano = fx.provider->panorama(fx.node_ids[0]);
    for (int k = 0; k < kViewsPerNode; ++k) accumulate(grid, lift_view(pano.views[size_t(k)], 2));
    for (const auto& [key, cell] : grid.cells) {
        double total = 0;
        for (const auto& [cls, sum] : cell.sums) {
            const double mean = sum / cell.count;
            CHECK(mean >= 0.0);
            CHECK(mean <= 1.0 + 1e-4);
            total += mean;
        }
        CHECK(total <= 1.0 + 1e-4);
    }
}

TEST_CASE("finalize breaks exact ties toward the lower class") {
    SemanticVoxelGrid grid;
    grid.voxel_size = 0.1;
    auto q = [](double p) { return uint16_t(std::lround(p * 65535)); };
    accumulate(grid, cloud_of({{{0.05, 0.05, 0.05}, {{4, q(0.5)}, {2, q(0.5)}}}}));
    const auto labels = finalize_labels(grid);
    REQUIRE(labels.size() == 1);
    CHECK(labels.begin()->second == 2);
    CHECK_THROWS_AS(finalize_labels(SemanticVoxelGrid{}), InvalidArgument);
}

TEST_CASE("noise-free voxel labels match an integer-majority oracle") {
    SceneFixture fx(7);
    SemanticVoxelGrid grid;
    grid.voxel_size = 0.1;
    grid.num_classes = fx.bundle.num_classes();
    std::unordered_map<int64_t, std::map<uint16_t, int>> votes;
    for (int node : fx.node_ids) {
        const PanoramaNode& pano = fx.provider->panorama(node);
        for (int k = 0; k < kViewsPerNode; ++k) {
            const LabeledCloud cloud = lift_view(pano.views[size_t(k)], 2);
            accumulate(grid, cloud);
            for (size_t i = 0; i < cloud.size(); ++i) {
                uint16_t best = 0;
                uint16_t best_q = 0;
                for (int t = 0; t < cloud.topk; ++t) {
                    if (cloud.prob_q[i * size_t(cloud.topk) + t] > best_q) {
                        best_q = cloud.prob_q[i * size_t(cloud.topk) + t];
                        best = cloud.prob_class[i * size_t(cloud.topk) + t];
                    }
                }
                votes[grid.key_of(cloud.points[i])][best] += 1;
            }
        }
        fx.provider->release_probs(node);
    }
    const auto labels = finalize_labels(grid);
    for (const auto& [key, counts] : votes) {
        uint16_t best = 0;
        int best_n = -1;
        for (const auto& [cls, n] : counts)
            if (n > best_n || (n == best_n && cls < best)) {
                best = cls;
                best_n = n;
            }
        const auto it = labels.find(key);
        if (best == kVoidClass) {
            CHECK(it == labels.end());
        } else {
            REQUIRE(it != labels.end());
            CHECK(it->second == best);
        }
    }
}

TEST_CASE("instance extraction honors connectivity and size filters") {
    SemanticVoxelGrid grid;
    grid.voxel_size = 0.1;
    std::map<int64_t, uint16_t> labels;
    for (int i = 0; i < 4; ++i) labels[voxel_key(i, 0, 0)] = 5;
    labels[voxel_key(3, 1, 0)] = 5;
    labels[voxel_key(3, 2, 0)] = 5;
    labels[voxel_key(8, 0, 0)] = 5;
    labels[voxel_key(9, 0, 0)] = 5;
    FusionParams params;
    params.min_voxels = 5;
    auto objects = extract_instances(labels, grid, params);
    REQUIRE(objects.size() == 1);
    CHECK(objects[0].voxels.size() == 6);
    CHECK(objects[0].cls == 5);

    params.min_voxels = 2;
    objects = extract_instances(labels, grid, params);
    CHECK(objects.size() == 2);

    std::map<int64_t, uint16_t> touching{{voxel_key(0, 0, 0), 4}, {voxel_key(1, 0, 0), 4}};
    params.connectivity = 6;
    params.min_voxels = 1;
    CHECK(extract_instances(touching, grid, params).size() == 1);
    std::map<int64_t, uint16_t> corner{{voxel_key(0, 0, 0), 4}, {voxel_key(1, 1, 1), 4}};
    CHECK(extract_instances(corner, grid, params).size() == 2);
    params.connectivity = 26;
    CHECK(extract_instances(corner, grid, params).size() == 1);
}

TEST_CASE("every extracted instance is internally connected") {
    SceneFixture fx(8, "confusion30");
    const FusionResult result =
        fuse_scene(*fx.provider, fx.node_ids, fx.bundle.num_classes(), FusionParams{});
    for (const auto& obj : result.objects) {
        std::set<int64_t> members(obj.voxels.begin(), obj.voxels.end());
        std::set<int64_t> seen{obj.voxels.front()};
        std::vector<int64_t> frontier{obj.voxels.front()};
        while (!frontier.empty()) {
            const int64_t key = frontier.back();
            frontier.pop_back();
            int x, y, z;
            voxel_unpack(key, x, y, z);
            for (int dz = -1; dz <= 1; ++dz)
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (!dx && !dy && !dz) continue;
                        const int64_t nk = voxel_key(x + dx, y + dy, z + dz);
                        if (members.count(nk) && !seen.count(nk)) {
                            seen.insert(nk);
                            frontier.push_back(nk);
                        }
                    }
        }
        CHECK(seen.size() == members.size());
    }
}

TEST_CASE("stuff classes never become instances") {
    SceneFixture fx(9);
    const FusionResult result =
        fuse_scene(*fx.provider, fx.node_ids, fx.bundle.num_classes(), FusionParams{});
    const auto& stuff = default_stuff_classes();
    for (const auto& obj : result.objects)
        CHECK(std::find(stuff.begin(), stuff.end(), obj.cls) == stuff.end());
}

TEST_CASE("single-view objects lift one object per 2D instance") {
    SceneFixture fx(10);
    const PanoramaNode& pano = fx.provider->panorama(fx.node_ids[0]);
    FusionParams params;
    for (int k = 0; k < kViewsPerNode; ++k) {
        const auto& view = pano.views[size_t(k)];
        const auto objs = single_view_objects(view, fx.node_ids[0], k, params);
        std::set<uint16_t> insts;
        for (size_t pix = 0; pix < view.pixel_count(); ++pix)
            if (view.valid_at(pix) && view.instances[pix] != kNoInstance)
                insts.insert(view.instances[pix]);
        CHECK(objs.size() <= insts.size());
        for (const auto& o : objs) {
            REQUIRE(o.support.size() == 1);
            CHECK(o.support.begin()->first.node == fx.node_ids[0]);
            CHECK(o.support.begin()->first.view == k);
        }
    }
    ViewObservation empty;
    empty.intrinsics = CameraIntrinsics(8, 8, kPi / 3);
    empty.num_classes = 41;
    empty.topk = 5;
    empty.depth.assign(64, 1.0f);
    empty.prob_class.assign(64 * 5, 0);
    empty.prob_q.assign(64 * 5, 0);
    CHECK(single_view_objects(empty, 0, 0, params).empty());
}

TEST_CASE("an object seen from two nodes fuses into one but stays split per view") {
    SceneTruth truth;
    truth.building_x0 = truth.building_y0 = 0;
    truth.building_x1 = truth.building_y1 = 10;
    truth.floor_heights = {0.0};
    truth.rooms.push_back({0, 0, 0, 0, 10, 10, "room"});
    ObjectTruth obj;
    obj.id = 0;
    obj.cls = 13;
    obj.room = 0;
    obj.center = {5.0, 5.0, 0.5};
    obj.extent = {0.4, 0.4, 1.0};
    truth.objects.push_back(obj);

    SceneBundle bundle;
    bundle.scene_id = "two_sides";
    bundle.class_vocabulary = default_class_vocabulary();
    bundle.view = {48, 48, kPi / 3};
    FloorGrid g;
    g.cell = 0.1;
    g.nx = g.ny = 100;
    g.navigable.assign(10000, 1);
    bundle.field.floors.push_back(g);
    bundle.ground_truth = truth;

    auto scene = std::make_shared<RenderScene>(truth, bundle.class_vocabulary);
    SynthViewProvider provider(scene, bundle, {{0, {3.5, 5.0, 1.2}}, {1, {6.5, 5.0, 1.2}}});
    FusionParams params;
    const FusionResult fused = fuse_scene(provider, {0, 1}, bundle.num_classes(), params);
    std::vector<const Object3D*> wardrobe;
    for (const auto& o : fused.objects)
        if (o.cls == 13) wardrobe.push_back(&o);
    REQUIRE(wardrobe.size() == 1);

    const auto single = single_view_scene(provider, {0, 1}, params);
    int wardrobe_views = 0;
    std::set<int> nodes_seen;
    for (const auto& o : single)
        if (o.cls == 13) {
            ++wardrobe_views;
            nodes_seen.insert(o.support.begin()->first.node);
        }
    CHECK(wardrobe_views >= 2);
    CHECK(nodes_seen.size() == 2);
    CHECK(wardrobe[0]->extent.x >= 0.4);
}

TEST_CASE("2D instances of unextracted objects stay unmapped") {
    // one normal object and one too small to survive the voxel filter
    SceneTruth truth;
    truth.building_x0 = truth.building_y0 = 0;
    truth.building_x1 = truth.building_y1 = 10;
    truth.floor_heights = {0.0};
    truth.rooms.push_back({0, 0, 0, 0, 10, 10, "room"});
    ObjectTruth big;
    big.id = 0;
    big.cls = 13;
    big.room = 0;
    big.center = {5.0, 4.0, 0.5};
    big.extent = {0.4, 0.4, 1.0};
    truth.objects.push_back(big);
    ObjectTruth tiny;
    tiny.id = 1;
    tiny.cls = 10;
    tiny.room = 0;
    tiny.center = {5.0, 6.5, 0.07};
    tiny.extent = {0.12, 0.12, 0.12};
    truth.objects.push_back(tiny);

    SceneBundle bundle;
    bundle.class_vocabulary = default_class_vocabulary();
    bundle.view = {48, 48, kPi / 3};
    FloorGrid g;
    g.cell = 0.1;
    g.nx = g.ny = 100;
    g.navigable.assign(10000, 1);
    bundle.field.floors.push_back(g);
    bundle.ground_truth = truth;

    auto scene = std::make_shared<RenderScene>(truth, bundle.class_vocabulary);
    SynthViewProvider provider(scene, bundle, {{0, {5.0, 5.2, 1.2}}});
    FusionParams params;
    params.min_voxels = 12;  // high enough to reject the tiny box
    const FusionResult fused = fuse_scene(provider, {0}, bundle.num_classes(), params);
    bool tiny_extracted = false;
    for (const auto& o : fused.objects)
        if (o.cls == 10) tiny_extracted = true;
    CHECK_FALSE(tiny_extracted);
    // the tiny object's 2D instances exist but map to no fused object
    for (const auto& [ref, obj] : fused.view_map) {
        const auto* table = provider.instance_objects(ref.node, ref.view);
        REQUIRE(table != nullptr);
        CHECK((*table)[ref.instance] != 1);
    }
}

TEST_CASE("2D instances map to fused objects matching their truth boxes") {
    SceneFixture fx(11);
    const FusionResult result =
        fuse_scene(*fx.provider, fx.node_ids, fx.bundle.num_classes(), FusionParams{});
    REQUIRE(!result.view_map.empty());

    int checked = 0, agree = 0;
    for (const auto& [ref, obj_id] : result.view_map) {
        const auto* table = fx.provider->instance_objects(ref.node, ref.view);
        REQUIRE(table != nullptr);
        REQUIRE(ref.instance < table->size());
        const int truth_obj = (*table)[ref.instance];
        const Aabb truth_box = fx.bundle.ground_truth->objects[size_t(truth_obj)].box();
        const double v = iou(result.objects[size_t(obj_id)].box(), truth_box);
        ++checked;
        if (v >= 0.1) ++agree;
    }
    CHECK(checked > 0);
    CHECK(double(agree) / double(checked) >= 0.95);
}

TEST_CASE("label accuracy trivial cases") {
    SceneTruth truth;
    truth.floor_heights = {0.0};
    ObjectTruth a;
    a.id = 0;
    a.cls = 7;
    a.center = {1, 1, 0.5};
    a.extent = {0.5, 0.5, 1.0};
    truth.objects.push_back(a);

    Object3D pred;
    pred.id = 0;
    pred.cls = 7;
    pred.center = a.center;
    pred.extent = a.extent;
    pred.centroid = a.center;
    CHECK(label_accuracy({pred}, truth).accuracy == 1.0);

    pred.cls = 9;
    const auto wrong = label_accuracy({pred}, truth);
    CHECK(wrong.accuracy == 0.0);
    CHECK_FALSE(wrong.undefined);

    const auto empty = label_accuracy({}, truth);
    CHECK(empty.accuracy == 0.0);
    CHECK(empty.undefined);
}

TEST_CASE("cross-view fusion dominates the single-view baseline under noise") {
    int wins = 0;
    const int scenes = 4;
    for (uint64_t seed = 0; seed < scenes; ++seed) {
        SceneFixture fx(100 + seed, "confusion30");
        FusionParams params;
        const FusionResult fused =
            fuse_scene(*fx.provider, fx.node_ids, fx.bundle.num_classes(), params);
        const auto cross = label_accuracy(fused.objects, *fx.bundle.ground_truth);
        const auto single = label_accuracy(single_view_scene(*fx.provider, fx.node_ids, params),
                                           *fx.bundle.ground_truth);
        if (cross.accuracy >= single.accuracy) ++wins;
    }
    CHECK(wins >= scenes - 1);
}

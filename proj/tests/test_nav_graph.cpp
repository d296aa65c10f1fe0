#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "vlnforge/nav_graph.hpp"
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

GraphParams fast_graph_params() {
    GraphParams p;
    p.sample_count = 4000;
    return p;
}

/// One-floor field that is fully navigable over [0,w] x [0,h].
NavigabilityField open_field(double w, double h, double cell = 0.1) {
    NavigabilityField field;
    FloorGrid g;
    g.cell = cell;
    g.nx = int(std::lround(w / cell));
    g.ny = int(std::lround(h / cell));
    g.navigable.assign(size_t(g.nx) * g.ny, 1);
    field.floors.push_back(std::move(g));
    return field;
}

}  // namespace

TEST_CASE("samples from a single navigable cell stay inside it") {
    NavigabilityField field = open_field(1.0, 1.0, 0.2);
    for (auto& v : field.floors[0].navigable) v = 0;
    field.floors[0].set_navigable(2, 3, true);
    Rng rng(4);
    const auto samples = sample_navigable(field, 50, rng);
    for (const Vec3& s : samples) {
        CHECK(s.x >= 0.4);
        CHECK(s.x <= 0.6);
        CHECK(s.y >= 0.6);
        CHECK(s.y <= 0.8);
        CHECK(s.z == doctest::Approx(1.2));
    }
}

TEST_CASE("two equal floors receive balanced samples") {
    NavigabilityField field = open_field(2.0, 2.0, 0.2);
    FloorGrid upper = field.floors[0];
    upper.height = 3.0;
    field.floors.push_back(upper);
    Rng rng(5);
    const int n = 10000;
    const auto samples = sample_navigable(field, n, rng);
    int low = 0;
    for (const Vec3& s : samples)
        if (s.z < 2.0) ++low;
    const double sigma = std::sqrt(0.25 * n);
    CHECK(std::abs(low - n / 2.0) <= 3 * sigma);
}

TEST_CASE("sampling is deterministic per seed") {
    NavigabilityField field = open_field(3.0, 2.0);
    Rng a(9), b(9);
    const auto sa = sample_navigable(field, 100, a);
    const auto sb = sample_navigable(field, 100, b);
    REQUIRE(sa.size() == sb.size());
    for (size_t i = 0; i < sa.size(); ++i) CHECK(sa[i] == sb[i]);
}

TEST_CASE("clustered candidates collapse to a single node") {
    NavigabilityField field = open_field(1.5, 1.5);
    std::vector<Vec3> candidates;
    Rng rng(3);
    for (int i = 0; i < 40; ++i)
        candidates.push_back({0.5 + rng.uniform_double() * 0.8, 0.5 + rng.uniform_double() * 0.8, 1.2});
    const auto nodes = build_nodes(candidates, field, GraphParams{});
    CHECK(nodes.size() == 1);
}

TEST_CASE("greedy placement follows the hand-traced collinear order") {
    // navigable mass concentrated on the left pulls the centroid below
    // x = 1.3, so the x = 0.05 candidate seeds the graph
    NavigabilityField field = open_field(6.0, 3.0);
    FloorGrid& g = field.floors[0];
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            g.set_navigable(ix, iy, g.cell_x(ix) < 2.0 || iy == 15);
    const std::vector<Vec3> candidates = {
        {0.05, 1.5, 1.2}, {2.55, 1.5, 1.2}, {5.05, 1.5, 1.2}};
    const auto nodes = build_nodes(candidates, field, GraphParams{});
    REQUIRE(nodes.size() == 3);
    CHECK(nodes[0].x == doctest::Approx(0.05));   // seed: nearest the centroid
    CHECK(nodes[1].x == doctest::Approx(2.55));   // nearest eligible to the seed
    CHECK(nodes[2].x == doctest::Approx(5.05));
}

TEST_CASE("placed nodes respect pairwise spacing on random scenes") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        const SceneBundle bundle = generate_scene(seed, small_params());
        Rng rng(stage_seed(seed, seed_tag::kGraph));
        const auto candidates = sample_navigable(bundle.field, 4000, rng);
        const auto nodes = build_nodes(candidates, bundle.field, GraphParams{});
        for (size_t i = 0; i < nodes.size(); ++i)
            for (size_t j = i + 1; j < nodes.size(); ++j)
                CHECK(distance(nodes[i], nodes[j]) >= 2.0);
    }
}

TEST_CASE("geodesic distance of a point to itself is zero") {
    NavigabilityField field = open_field(2.0, 2.0);
    const Vec3 p{1.0, 1.0, 1.2};
    CHECK(geodesic_distance(field, p, p) == 0.0);
}

TEST_CASE("straight corridor geodesic stays within discretization error") {
    NavigabilityField field = open_field(6.0, 1.0);
    const auto d = geodesic_distance(field, {0.55, 0.55, 1.2}, {4.55, 0.55, 1.2});
    REQUIRE(d.has_value());
    CHECK(*d >= 3.9);
    CHECK(*d <= 4.0 * 1.08 + 0.2);
}

TEST_CASE("detours around a U-shaped wall match the reference dijkstra") {
    NavigabilityField field = open_field(5.0, 5.0);
    FloorGrid& g = field.floors[0];
    // vertical wall at x=2.5 from y=0 to y=4
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            if (std::abs(g.cell_x(ix) - 2.5) < 0.15 && g.cell_y(iy) < 4.0)
                g.set_navigable(ix, iy, false);
    const Vec3 a{1.0, 1.0, 1.2};
    const Vec3 b{4.0, 1.0, 1.2};
    const auto mine = geodesic_distance(field, a, b);
    REQUIRE(mine.has_value());
    const auto ref = oracle::grid_dijkstra(g, g.index_x(a.x), g.index_y(a.y), g.index_x(b.x),
                                           g.index_y(b.y));
    REQUIRE(ref.has_value());
    CHECK(*mine == doctest::Approx(*ref).epsilon(1e-12));
    CHECK(*mine > 5.0);  // forced around the wall
}

TEST_CASE("positions outside the field raise a domain error") {
    NavigabilityField field = open_field(2.0, 2.0);
    CHECK_THROWS_AS(geodesic_distance(field, {-5.0, 0.5, 1.2}, {1.0, 1.0, 1.2}), DomainError);
}

TEST_CASE("disconnected regions report unreachable") {
    NavigabilityField field = open_field(4.0, 1.0);
    FloorGrid& g = field.floors[0];
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            if (std::abs(g.cell_x(ix) - 2.0) < 0.3) g.set_navigable(ix, iy, false);
    CHECK_FALSE(geodesic_distance(field, {0.5, 0.5, 1.2}, {3.5, 0.5, 1.2}).has_value());
}

TEST_CASE("stair links join floors in the router") {
    NavigabilityField field = open_field(2.0, 1.0);
    FloorGrid upper = field.floors[0];
    upper.height = 3.0;
    field.floors.push_back(upper);
    StairLink s;
    s.floor_a = 0;
    s.cell_a_x = 10;
    s.cell_a_y = 5;
    s.floor_b = 1;
    s.cell_b_x = 10;
    s.cell_b_y = 5;
    s.length = 4.0;
    field.stairs.push_back(s);
    const auto d = geodesic_distance(field, {0.55, 0.55, 1.2}, {0.55, 0.55, 4.2});
    REQUIRE(d.has_value());
    CHECK(*d > 4.0);
    CHECK(*d < 6.0);
}

namespace {

struct WallScene {
    SceneTruth truth;
    RenderScene scene;
    WallScene(std::vector<Aabb> walls, double extent = 20.0)
        : truth(make_truth(std::move(walls), extent)), scene(truth, default_class_vocabulary()) {}

    static SceneTruth make_truth(std::vector<Aabb> walls, double extent) {
        SceneTruth t;
        t.building_x0 = t.building_y0 = -extent;
        t.building_x1 = t.building_y1 = extent;
        t.floor_heights = {0.0};
        t.wall_height = 2.6;
        t.walls = std::move(walls);
        return t;
    }
};

}  // namespace

TEST_CASE("a wall half a meter ahead fails the visibility test") {
    WallScene ws(std::vector<Aabb>{{{0.5, -3.0, 0.0}, {0.6, 3.0, 2.6}}});
    TruthDepthProber prober(ws.scene);
    GraphParams params;
    CHECK_FALSE(visibility_check(prober, 0, {0, 0, 1.2}, {2.8, 0, 1.2}, params, 10.0));
}

TEST_CASE("open space passes the visibility test") {
    WallScene ws(std::vector<Aabb>{});
    TruthDepthProber prober(ws.scene);
    GraphParams params;
    CHECK(visibility_check(prober, 0, {0, 0, 1.2}, {2.8, 0, 1.2}, params, 10.0));
}

TEST_CASE("doorway visibility decisions track a ray-cast oracle") {
    // wall with a central gap; vary the gap width and the node offset
    Rng rng(17);
    GraphParams params;
    int agree = 0, total = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double gap = rng.uniform_double(0.2, 2.2);
        const double offset = rng.uniform_double(-1.0, 1.0);
        std::vector<Aabb> walls = {
            {{1.4, -8.0, 0.0}, {1.5, offset - gap / 2, 2.6}},
            {{1.4, offset + gap / 2, 0.0}, {1.5, 8.0, 2.6}},
        };
        WallScene ws(std::move(walls));
        TruthDepthProber prober(ws.scene);
        const Vec3 a{0, 0, 1.2};
        const Vec3 b{2.8, 0, 1.2};
        const bool mine = visibility_check(prober, 0, a, b, params, 10.0);

        // oracle: the same mean-depth rule computed with the
        // independent ray caster over the same window
        const Vec3 axis = (b - a) * (1.0 / (b - a).norm());
        double sum = 0.0;
        const int n = params.visibility_patch;
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const double du = (i / double(n - 1) - 0.5) * params.visibility_window;
                const double dv = (j / double(n - 1) - 0.5) * params.visibility_window;
                const double yaw = std::atan2(axis.y, axis.x) + du;
                const double pitch = std::asin(axis.z) + dv;
                const Vec3 dir{std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw),
                               std::sin(pitch)};
                const auto hit = oracle::nearest_hit(a, dir, ws.truth.walls);
                double planar = 10.0;
                if (hit) planar = std::min(10.0, hit->first * dir.dot(axis));
                sum += planar;
            }
        }
        const bool ref = sum / (n * n) > params.min_visibility_depth;
        total++;
        if (mine == ref) agree++;
    }
    CHECK(agree == total);
}

TEST_CASE("edges require both the geodesic and visibility criteria") {
    // two nodes 2.5 m apart in the open: edge with weight about 2.5
    {
        WallScene ws({}, 4.0);
        NavigabilityField field = open_field(8.0, 8.0);
        TruthDepthProber prober(ws.scene);
        GraphParams params;
        const std::vector<Vec3> nodes = {{2.0, 4.0, 1.2}, {4.5, 4.0, 1.2}};
        const NavGraph g = connect_edges(nodes, field, prober, params, 10.0);
        REQUIRE(g.edges.size() == 1);
        CHECK(std::get<2>(g.edges[0]) == doctest::Approx(2.5).epsilon(0.05));
    }
    // same Euclidean distance with a wall between: geodesic too long, no edge
    {
        WallScene ws({{{3.2, 0.0, 0.0}, {3.3, 7.0, 2.6}}}, 8.0);
        NavigabilityField field = open_field(8.0, 8.0);
        FloorGrid& grid = field.floors[0];
        for (int iy = 0; iy < grid.ny; ++iy)
            for (int ix = 0; ix < grid.nx; ++ix)
                if (grid.cell_x(ix) >= 3.0 && grid.cell_x(ix) <= 3.5 && grid.cell_y(iy) < 7.0)
                    grid.set_navigable(ix, iy, false);
        TruthDepthProber prober(ws.scene);
        GraphParams params;
        const std::vector<Vec3> nodes = {{2.0, 1.0, 1.2}, {4.5, 1.0, 1.2}};
        const NavGraph g = connect_edges(nodes, field, prober, params, 10.0);
        CHECK(g.edges.empty());
    }
}

TEST_CASE("every edge of generated graphs passes an independent recheck") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        const SceneBundle bundle = generate_scene(seed, small_params());
        const auto result = build_graph(bundle, fast_graph_params(), seed);
        const RenderScene scene(*bundle.ground_truth, bundle.class_vocabulary);
        TruthDepthProber prober(scene);
        GraphParams params = fast_graph_params();
        const FloorGrid& g = bundle.field.floors[0];
        for (const auto& [a, b, w] : result.graph.edges) {
            const Vec3 pa = result.graph.positions[size_t(a)];
            const Vec3 pb = result.graph.positions[size_t(b)];
            // independent grid dijkstra between snapped cells
            const auto sa = bundle.field.snap(pa);
            const auto sb = bundle.field.snap(pb);
            REQUIRE(sa);
            REQUIRE(sb);
            const auto ref = oracle::grid_dijkstra(g, sa->ix, sa->iy, sb->ix, sb->iy);
            REQUIRE(ref.has_value());
            CHECK(*ref == doctest::Approx(w).epsilon(1e-9));
            CHECK(*ref < params.max_edge_geodesic);
            CHECK(visibility_check(prober, a, pa, pb, params, bundle.max_depth));
            CHECK(visibility_check(prober, b, pb, pa, params, bundle.max_depth));
        }
    }
}

TEST_CASE("coverage handles the trivial cases") {
    NavigabilityField field = open_field(2.0, 2.0);  // inscribed in a 2 m disk around center
    NavGraph empty;
    CHECK(coverage(empty, field, 2.0) == 0.0);
    NavGraph one;
    one.positions.push_back({1.0, 1.0, 1.2});
    CHECK(coverage(one, field, 2.0) == 1.0);
    CHECK_THROWS_AS(coverage(one, field, 0.0), InvalidArgument);
    // any node at all covers everything under an unbounded radius
    NavGraph corner;
    corner.positions.push_back({0.05, 0.05, 1.2});
    CHECK(coverage(corner, field, std::numeric_limits<double>::infinity()) == 1.0);
}

TEST_CASE("coverage never decreases when nodes are added") {
    const SceneBundle bundle = generate_scene(61, small_params());
    Rng rng(2);
    const auto candidates = sample_navigable(bundle.field, 2000, rng);
    const auto nodes = build_nodes(candidates, bundle.field, GraphParams{});
    NavGraph g;
    double prev = 0.0;
    for (const Vec3& n : nodes) {
        g.positions.push_back(n);
        const double c = coverage(g, bundle.field, 2.0);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("graph building is deterministic") {
    const SceneBundle bundle = generate_scene(71, small_params());
    const auto a = build_graph(bundle, fast_graph_params(), 5);
    const auto b = build_graph(bundle, fast_graph_params(), 5);
    CHECK(a.graph.positions.size() == b.graph.positions.size());
    CHECK(a.graph.edges == b.graph.edges);
    CHECK(a.coverage == b.coverage);
    CHECK(nav_graph_to_json(a.graph).dump() == nav_graph_to_json(b.graph).dump());
}

TEST_CASE("graph json round-trips") {
    NavGraph g;
    g.positions = {{0, 0, 1.2}, {2.5, 0, 1.2}, {5.0, 0.5, 1.2}};
    g.edges = {{0, 1, 2.5}, {1, 2, 2.55}};
    const NavGraph back = nav_graph_from_json(nav_graph_to_json(g));
    CHECK(back.positions.size() == g.positions.size());
    CHECK(back.edges == g.edges);
}

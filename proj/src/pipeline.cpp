#include "vlnforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include "vlnforge/bundle_io.hpp"
#include "vlnforge/hash.hpp"
#include "vlnforge/proxy.hpp"

namespace vlnforge {

namespace fs = std::filesystem;

namespace {

std::string scene_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%06d", index);
    return buf;
}

class StageTimer {
public:
    explicit StageTimer(std::map<std::string, double>& sink, std::mutex& mu) : sink_(sink), mu_(mu) {}

    template <typename F>
    auto run(const std::string& stage, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(f())>) {
                f();
                add(stage, t0);
            } else {
                auto out = f();
                add(stage, t0);
                return out;
            }
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(stage, e.what());
        }
    }

private:
    void add(const std::string& stage, std::chrono::steady_clock::time_point t0) {
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::lock_guard lock(mu_);
        sink_[stage] += dt;
    }
    std::map<std::string, double>& sink_;
    std::mutex& mu_;
};

struct SceneOutput {
    std::vector<VlnTriplet> triplets;
};

SceneOutput process_scene(int index, const PipelineConfig& config, const fs::path& out_dir,
                          StageTimer& timer) {
    const std::string id = scene_name(index);
    const fs::path scene_dir = out_dir / id;
    const uint64_t sseed = scene_seed(config.seed, uint64_t(index));

    SceneBundle bundle = timer.run("synth", [&] {
        SceneBundle b = generate_scene(sseed, config.synth, id);
        fs::create_directories(scene_dir);
        save_bundle(b, scene_dir, {.write_views = false});
        return b;
    });

    GraphBuildResult graph = timer.run("graph", [&] {
        GraphBuildResult g = build_graph(bundle, config.graph, sseed);
        for (int i = 0; i < g.graph.size(); ++i) {
            PanoramaNode node;
            node.id = i;
            node.position = g.graph.positions[size_t(i)];
            bundle.nodes.push_back(std::move(node));
        }
        Json gj = nav_graph_to_json(g.graph);
        gj["meta"] = {{"scene_id", id},
                      {"coverage", g.coverage},
                      {"params",
                       {{"sample_count", config.graph.sample_count},
                        {"min_node_spacing", config.graph.min_node_spacing},
                        {"max_edge_geodesic", config.graph.max_edge_geodesic},
                        {"min_visibility_depth", config.graph.min_visibility_depth},
                        {"coverage_radius", config.graph.coverage_radius}}}};
        write_json_file(scene_dir / "graph.json", gj);
        return g;
    });

    std::vector<std::pair<int, Vec3>> node_positions;
    for (int i = 0; i < graph.graph.size(); ++i)
        node_positions.emplace_back(i, graph.graph.positions[size_t(i)]);
    auto scene = std::make_shared<RenderScene>(*bundle.ground_truth, bundle.class_vocabulary);
    SynthViewProvider provider(scene, bundle, node_positions);

    if (config.write_views) {
        timer.run("render", [&] {
            for (auto& node : bundle.nodes) node.views = provider.panorama(node.id).views;
        });
    }
    save_bundle(bundle, scene_dir, {.write_views = config.write_views});
    for (auto& node : bundle.nodes) node.views.clear();

    std::vector<int> node_ids;
    for (const auto& [nid, pos] : node_positions) node_ids.push_back(nid);

    FusionResult fusion = timer.run("label", [&] {
        FusionResult f = fuse_scene(provider, node_ids, bundle.num_classes(), config.fusion);
        Json oj = objects_to_json(f, bundle.class_vocabulary);
        oj["meta"] = {{"scene_id", id},
                      {"voxel", config.fusion.voxel_size},
                      {"connectivity", config.fusion.connectivity},
                      {"baseline", "cross-view"}};
        write_json_file(scene_dir / "objects.json", oj);
        return f;
    });

    SceneOutput out;
    timer.run("triplets", [&] {
        TripletContext ctx;
        ctx.scene_id = id;
        ctx.graph = &graph.graph;
        ctx.provider = &provider;
        ctx.fusion = &fusion;
        ctx.truth = bundle.ground_truth ? &*bundle.ground_truth : nullptr;
        ctx.voxel_size = config.fusion.voxel_size;
        out.triplets = generate_triplets(ctx, config.triplets, sseed);
        const auto prompts = export_prompts(out.triplets, fusion, graph.graph,
                                            bundle.class_vocabulary, config.triplets);
        write_prompts_jsonl(scene_dir / "prompts.jsonl", prompts);
    });
    return out;
}

void collect_files(const fs::path& root, const fs::path& dir,
                   std::map<std::string, std::string>& outputs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const std::string rel = fs::relative(f, root).generic_string();
        if (rel == "run_manifest.json") continue;
        outputs[rel] = Sha256::of_file(f);
    }
}

}  // namespace

Json RunManifest::to_json() const {
    Json j;
    j["config"] = config;
    j["config_sha256"] = config_sha256;
    j["stage_seconds"] = stage_seconds;
    j["outputs"] = outputs;
    j["triplet_count"] = triplet_count;
    return j;
}

RunManifest run_pipeline(const PipelineConfig& config, const fs::path& out_dir) {
    config.check();
    fs::create_directories(out_dir);

    RunManifest manifest;
    manifest.config = config.to_json();
    manifest.config_sha256 = config.sha256();

    std::mutex timer_mu;
    StageTimer timer(manifest.stage_seconds, timer_mu);

    std::vector<SceneOutput> results(size_t(config.scenes));
    std::atomic<int> next{0};
    std::mutex error_mu;
    std::exception_ptr first_error;

    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= config.scenes) return;
            {
                std::lock_guard lock(error_mu);
                if (first_error) return;
            }
            try {
                results[size_t(i)] = process_scene(i, config, out_dir, timer);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    const int n_threads = std::min(config.jobs, config.scenes);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (first_error) {
        // quarantine partial outputs next to the requested directory
        const fs::path q = out_dir.string() + ".quarantine";
        std::error_code ec;
        fs::remove_all(q, ec);
        fs::rename(out_dir, q, ec);
        std::rethrow_exception(first_error);
    }

    std::vector<VlnTriplet> all;
    for (auto& r : results)
        all.insert(all.end(), std::make_move_iterator(r.triplets.begin()),
                   std::make_move_iterator(r.triplets.end()));
    timer.run("stats", [&] {
        write_triplets_jsonl(out_dir / "triplets.jsonl", all);
        write_json_file(out_dir / "stats.json", stats_to_json(dataset_stats(all)));
    });
    manifest.triplet_count = all.size();

    collect_files(out_dir, out_dir, manifest.outputs);
    write_json_file(out_dir / "run_manifest.json", manifest.to_json());
    return manifest;
}

// ---------------------------------------------------------------------------

bool ValidationReport::ok() const {
    if (!structural_errors.empty()) return false;
    for (const auto& c : checks)
        if (c.violations > 0) return false;
    return true;
}

Json ValidationReport::to_json() const {
    Json j;
    j["structural_errors"] = structural_errors;
    Json checks_json = Json::array();
    for (const auto& c : checks)
        checks_json.push_back({{"name", c.name},
                               {"checked", c.checked},
                               {"violations", c.violations},
                               {"details", c.details}});
    j["checks"] = checks_json;
    j["coverage"] = coverage;
    j["ok"] = ok();
    return j;
}

namespace {

ValidationCheck& check_named(ValidationReport& report, const std::string& name) {
    for (auto& c : report.checks)
        if (c.name == name) return c;
    report.checks.push_back({name, 0, 0, {}});
    return report.checks.back();
}

void violation(ValidationCheck& check, const std::string& detail) {
    ++check.violations;
    if (check.details.size() < 10) check.details.push_back(detail);
}

struct SceneData {
    std::string id;
    fs::path dir;
    SceneBundle bundle;
    NavGraph graph;
    Json graph_meta;
    Json objects_json;
};

void validate_scene(SceneData& sd, const std::vector<VlnTriplet>& triplets,
                    const PipelineConfig& config, ValidationReport& report) {
    // create every entry first so the references below stay valid
    for (const char* name : {"node_spacing", "edge_soundness", "triplet_validity",
                             "goal_soundness", "grounding_consistency"})
        check_named(report, name);
    auto& spacing_check = check_named(report, "node_spacing");
    auto& edge_check = check_named(report, "edge_soundness");
    auto& triplet_check = check_named(report, "triplet_validity");
    auto& goal_check = check_named(report, "goal_soundness");
    auto& og_check = check_named(report, "grounding_consistency");

    const NavGraph& graph = sd.graph;
    GraphParams gp = config.graph;
    if (sd.graph_meta.contains("params")) {
        const Json& p = sd.graph_meta["params"];
        if (p.contains("min_node_spacing")) gp.min_node_spacing = p["min_node_spacing"].get<double>();
        if (p.contains("max_edge_geodesic")) gp.max_edge_geodesic = p["max_edge_geodesic"].get<double>();
        if (p.contains("min_visibility_depth"))
            gp.min_visibility_depth = p["min_visibility_depth"].get<double>();
        if (p.contains("coverage_radius")) gp.coverage_radius = p["coverage_radius"].get<double>();
    }

    for (int i = 0; i < graph.size(); ++i) {
        for (int j = i + 1; j < graph.size(); ++j) {
            ++spacing_check.checked;
            if (distance(graph.positions[size_t(i)], graph.positions[size_t(j)]) <
                gp.min_node_spacing)
                violation(spacing_check, sd.id + ": nodes " + std::to_string(i) + "," +
                                             std::to_string(j) + " closer than spacing");
        }
    }

    // edge recheck needs a depth source; prefer ground truth
    std::unique_ptr<RenderScene> scene;
    std::unique_ptr<DepthProber> prober;
    std::vector<std::pair<int, Vec3>> node_positions;
    for (int i = 0; i < graph.size(); ++i) node_positions.emplace_back(i, graph.positions[size_t(i)]);
    std::unique_ptr<ViewProvider> provider;
    try {
        provider = make_view_provider(sd.dir, sd.bundle, node_positions);
    } catch (const Error& e) {
        report.structural_errors.push_back(sd.id + ": " + e.what());
        return;
    }
    if (sd.bundle.ground_truth) {
        scene = std::make_unique<RenderScene>(*sd.bundle.ground_truth, sd.bundle.class_vocabulary);
        prober = std::make_unique<TruthDepthProber>(*scene);
    } else {
        prober = std::make_unique<PanoDepthProber>(*provider);
    }

    GridRouter router(sd.bundle.field);
    for (const auto& [a, b, w] : graph.edges) {
        ++edge_check.checked;
        const auto sa = sd.bundle.field.snap(graph.positions[size_t(a)]);
        const auto sb = sd.bundle.field.snap(graph.positions[size_t(b)]);
        bool ok = sa && sb;
        if (ok) {
            const auto dist = router.distances_from(*sa, gp.max_edge_geodesic);
            const double g = dist[router.cell_index(*sb)];
            ok = g < gp.max_edge_geodesic && std::abs(g - w) < 1e-6;
        }
        if (ok)
            ok = visibility_check(*prober, a, graph.positions[size_t(a)], graph.positions[size_t(b)],
                                  gp, sd.bundle.max_depth) &&
                 (!gp.symmetric_visibility ||
                  visibility_check(*prober, b, graph.positions[size_t(b)],
                                   graph.positions[size_t(a)], gp, sd.bundle.max_depth));
        if (!ok)
            violation(edge_check, sd.id + ": edge " + std::to_string(a) + "-" + std::to_string(b) +
                                      " fails the connection criteria");
    }
    report.coverage[sd.id] = coverage(graph, sd.bundle.field, gp.coverage_radius);

    // re-derive the fusion output to recover voxel member sets
    std::vector<int> node_ids;
    for (const auto& [nid, pos] : node_positions) node_ids.push_back(nid);
    const FusionResult fusion =
        fuse_scene(*provider, node_ids, sd.bundle.num_classes(), config.fusion);
    if (sd.objects_json.contains("objects") &&
        sd.objects_json["objects"].size() != fusion.objects.size())
        report.structural_errors.push_back(sd.id +
                                           ": objects.json disagrees with the re-derived fusion");

    TripletParams tp = config.triplets;
    SemanticVoxelGrid ref_grid;
    ref_grid.voxel_size = config.fusion.voxel_size;
    const auto adjacency = graph.adjacency();
    for (const auto& t : triplets) {
        ++triplet_check.checked;
        std::string why;
        const int hops = int(t.expert_path.size()) - 1;
        if (t.expert_path.empty() || t.expert_path.front() != t.start_node)
            why = "path does not start at start_node";
        else if (hops < tp.min_hops || hops > tp.max_hops)
            why = "hop count outside [" + std::to_string(tp.min_hops) + "," +
                  std::to_string(tp.max_hops) + "]";
        else if (std::find(t.goal_nodes.begin(), t.goal_nodes.end(), t.expert_path.back()) ==
                 t.goal_nodes.end())
            why = "path does not end in the goal set";
        for (size_t i = 0; why.empty() && i + 1 < t.expert_path.size(); ++i) {
            const auto& adj = adjacency[size_t(t.expert_path[i])];
            if (!std::any_of(adj.begin(), adj.end(), [&](const auto& e) {
                    return e.first == t.expert_path[i + 1];
                }))
                why = "consecutive path nodes are not adjacent";
        }
        if (!why.empty()) {
            violation(triplet_check, sd.id + ": " + why);
            continue;
        }

        if (t.target_object < 0 || t.target_object >= int(fusion.objects.size())) {
            violation(triplet_check, sd.id + ": target object out of range");
            continue;
        }
        const Object3D& obj = fusion.objects[size_t(t.target_object)];
        for (int g : t.goal_nodes) {
            ++goal_check.checked;
            const Vec3 pos = graph.positions[size_t(g)];
            bool ok = !(distance(pos, obj.centroid) > tp.d_o);
            if (ok) {
                bool vis = false;
                for (int k = 0; k < kViewsPerNode && !vis; ++k) {
                    const ViewObservation& view = provider->view(g, k);
                    const Pose pose = Pose::at(pos, view_heading(k), view_elevation(k));
                    const PixelProjection proj = project_point(obj.centroid, view.intrinsics, pose);
                    if (!proj.in_image || proj.depth <= 0.0) continue;
                    const int u = std::clamp(int(std::lround(proj.u)), 0, view.width() - 1);
                    const int v = std::clamp(int(std::lround(proj.v)), 0, view.height() - 1);
                    const double stored = view.depth_at(u, v);
                    if (stored > 0.0 && stored >= tp.occlusion_factor * proj.depth) vis = true;
                }
                ok = vis;
            }
            if (!ok)
                violation(goal_check,
                          sd.id + ": goal node " + std::to_string(g) + " fails the predicate");
        }
        for (const auto& gb : t.target_bbox_2d) {
            ++goal_check.checked;
            const ViewObservation& view = provider->view(gb.node, gb.view);
            const Pose pose = Pose::at(graph.positions[size_t(gb.node)], view_heading(gb.view),
                                       view_elevation(gb.view));
            int hits = 0, total = 0;
            for (int v = gb.box[1]; v <= gb.box[3]; ++v) {
                for (int u = gb.box[0]; u <= gb.box[2]; ++u) {
                    ++total;
                    const double d = view.depth_at(u, v);
                    if (d <= 0.0 || d >= view.max_depth) continue;
                    const Vec3 p = pixel_to_point(u, v, d, view.intrinsics, pose);
                    if (std::binary_search(obj.voxels.begin(), obj.voxels.end(),
                                           ref_grid.key_of(p)))
                        ++hits;
                }
            }
            if (total == 0 || double(hits) / double(total) < tp.bbox_min_frac)
                violation(goal_check, sd.id + ": 2d box at node " + std::to_string(gb.node) +
                                          " fails back-projection soundness");
        }

        ++og_check.checked;
        try {
            og_sample(t, fusion.view_map);
        } catch (const OgConsistencyError& e) {
            violation(og_check, sd.id + ": " + e.what());
        }
    }
}

}  // namespace

ValidationReport validate_dataset(const fs::path& dir) {
    ValidationReport report;
    if (!fs::exists(dir) || !fs::is_directory(dir)) {
        report.structural_errors.push_back("dataset directory does not exist: " + dir.string());
        return report;
    }

    PipelineConfig config;
    if (fs::exists(dir / "run_manifest.json")) {
        try {
            config =
                PipelineConfig::from_json(read_json_file(dir / "run_manifest.json").at("config"));
        } catch (const std::exception& e) {
            report.structural_errors.push_back(std::string("bad run_manifest.json: ") + e.what());
        }
    }

    std::vector<fs::path> scene_dirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
            scene_dirs.push_back(entry.path());
    std::sort(scene_dirs.begin(), scene_dirs.end());
    if (scene_dirs.empty()) {
        report.structural_errors.push_back("no scene bundles found in " + dir.string());
        return report;
    }

    std::vector<VlnTriplet> all_triplets;
    if (fs::exists(dir / "triplets.jsonl")) {
        try {
            all_triplets = read_triplets_jsonl(dir / "triplets.jsonl");
        } catch (const Error& e) {
            report.structural_errors.push_back(e.what());
        }
    }

    for (const auto& scene_dir : scene_dirs) {
        SceneData sd;
        sd.dir = scene_dir;
        try {
            sd.bundle = load_bundle(scene_dir, {.load_views = false, .verify = true});
            sd.id = sd.bundle.scene_id;
            const Json gj = read_json_file(scene_dir / "graph.json");
            sd.graph = nav_graph_from_json(gj);
            if (gj.contains("meta")) sd.graph_meta = gj["meta"];
            if (fs::exists(scene_dir / "objects.json"))
                sd.objects_json = read_json_file(scene_dir / "objects.json");
        } catch (const std::exception& e) {
            report.structural_errors.push_back(scene_dir.string() + ": " + e.what());
            continue;
        }
        std::vector<VlnTriplet> scene_triplets;
        for (const auto& t : all_triplets)
            if (t.scene_id == sd.id) scene_triplets.push_back(t);
        if (fs::exists(scene_dir / "triplets.jsonl")) {
            const auto extra = read_triplets_jsonl(scene_dir / "triplets.jsonl");
            scene_triplets.insert(scene_triplets.end(), extra.begin(), extra.end());
        }
        try {
            validate_scene(sd, scene_triplets, config, report);
        } catch (const std::exception& e) {
            report.structural_errors.push_back(sd.id + ": " + e.what());
        }
    }
    return report;
}

}  // namespace vlnforge

#include "vlnforge/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "vlnforge/bundle_io.hpp"
#include "vlnforge/episode.hpp"
#include "vlnforge/hash.hpp"
#include "vlnforge/pipeline.hpp"
#include "vlnforge/proxy.hpp"

namespace vlnforge {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

double parse_d_o(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    return std::stod(s);
}

struct GlobalArgs {
    uint64_t seed = 1;
    int jobs = 1;
    std::string config_path;

    PipelineConfig config(const CLI::App& app) const {
        PipelineConfig c;
        if (!config_path.empty()) c = PipelineConfig::load(config_path);
        if (app.count("--seed")) c.seed = seed;
        if (app.count("--jobs")) c.jobs = jobs;
        return c;
    }
};

NavGraph load_graph_file(const fs::path& path) {
    return nav_graph_from_json(read_json_file(path));
}

struct DatasetGraphs {
    std::map<std::string, NavGraph> by_scene;

    const NavGraph& for_scene(const std::string& scene_id) const {
        const auto it = by_scene.find(scene_id);
        if (it == by_scene.end()) throw Error("no graph loaded for scene " + scene_id);
        return it->second;
    }
};

DatasetGraphs load_graphs(const std::string& graph_path, const std::string& dataset_dir,
                          const std::vector<VlnTriplet>& triplets) {
    DatasetGraphs graphs;
    if (!graph_path.empty()) {
        NavGraph g = load_graph_file(graph_path);
        for (const auto& t : triplets) graphs.by_scene.emplace(t.scene_id, g);
        if (triplets.empty()) graphs.by_scene.emplace("", std::move(g));
    } else {
        for (const auto& entry : fs::directory_iterator(dataset_dir)) {
            if (!entry.is_directory() || !fs::exists(entry.path() / "graph.json")) continue;
            const Json gj = read_json_file(entry.path() / "graph.json");
            std::string scene_id = entry.path().filename().string();
            if (gj.contains("meta") && gj["meta"].contains("scene_id"))
                scene_id = gj["meta"]["scene_id"].get<std::string>();
            graphs.by_scene.emplace(scene_id, nav_graph_from_json(gj));
        }
    }
    return graphs;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"vlnforge: synthetic indoor scenes to navigation training data"};
    app.require_subcommand(1);

    GlobalArgs global;
    app.add_option("--seed", global.seed, "master seed");
    app.add_option("--jobs", global.jobs, "worker threads for scene-level parallelism");
    app.add_option("--config", global.config_path, "pipeline config file (JSON)");

    // ---- synth ----
    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic scene bundles");
    int synth_scenes = 5;
    std::string synth_out, synth_noise;
    std::vector<int> synth_rooms, synth_objects, synth_floors;
    synth_cmd->add_option("--scenes", synth_scenes, "number of scenes");
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--noise", synth_noise, "noise profile (none|confusion30|harsh)");
    synth_cmd->add_option("--rooms", synth_rooms, "room count range: lo hi")->expected(2);
    synth_cmd->add_option("--objects", synth_objects, "objects per room range: lo hi")->expected(2);
    synth_cmd->add_option("--floors", synth_floors, "floor count range: lo hi")->expected(2);

    // ---- graph ----
    auto* graph_cmd = app.add_subcommand("graph", "build the navigation graph of a bundle");
    std::string graph_bundle, graph_out;
    GraphParams graph_params;
    bool graph_write_views = false;
    graph_cmd->add_option("--bundle", graph_bundle, "bundle directory")->required();
    graph_cmd->add_option("--out", graph_out, "graph.json output")->required();
    graph_cmd->add_option("--samples", graph_params.sample_count, "navigable location samples");
    graph_cmd->add_option("--spacing", graph_params.min_node_spacing, "min node spacing (m)");
    graph_cmd->add_option("--edge", graph_params.max_edge_geodesic, "max edge geodesic (m)");
    graph_cmd->add_option("--visdepth", graph_params.min_visibility_depth,
                          "min mean visibility depth (m)");
    graph_cmd->add_flag("--write-views", graph_write_views,
                        "render panoramas at the new nodes into the bundle");

    // ---- label ----
    auto* label_cmd = app.add_subcommand("label", "fuse per-view semantics into 3D objects");
    std::string label_bundle, label_graph, label_out, label_baseline = "cross-view";
    FusionParams label_params;
    label_cmd->add_option("--bundle", label_bundle, "bundle directory")->required();
    label_cmd->add_option("--graph", label_graph, "graph.json")->required();
    label_cmd->add_option("--out", label_out, "objects.json output")->required();
    label_cmd->add_option("--voxel", label_params.voxel_size, "voxel size (m)");
    label_cmd->add_option("--connectivity", label_params.connectivity, "6, 18 or 26");
    label_cmd->add_option("--stride", label_params.stride, "pixel stride when lifting");
    label_cmd->add_option("--baseline", label_baseline, "cross-view | single-view");

    // ---- triplets ----
    auto* trip_cmd = app.add_subcommand("triplets", "generate instruction triplets");
    std::string trip_bundle, trip_graph, trip_objects, trip_out, trip_prompts, trip_instructions;
    std::string trip_do = "2.0", trip_mode = "template-sent";
    TripletParams trip_params;
    trip_cmd->add_option("--bundle", trip_bundle, "bundle directory")->required();
    trip_cmd->add_option("--graph", trip_graph, "graph.json")->required();
    trip_cmd->add_option("--objects", trip_objects, "objects.json")->required();
    trip_cmd->add_option("--do", trip_do, "goal distance d_o in meters, or 'inf'");
    trip_cmd->add_option("--mode", trip_mode, "template-obj | template-sent");
    trip_cmd->add_option("--per-object", trip_params.per_object, "triplets per object");
    trip_cmd->add_option("--out", trip_out, "triplets.jsonl output")->required();
    trip_cmd->add_option("--prompts", trip_prompts, "prompts.jsonl output");
    trip_cmd->add_option("--instructions", trip_instructions,
                         "merge externally generated instruction text (one line per triplet)");

    // ---- proxy ----
    auto* proxy_cmd = app.add_subcommand("proxy", "emit pretraining proxy-task samples");
    std::string proxy_task, proxy_triplets, proxy_graph, proxy_objects, proxy_out;
    int proxy_anchors = 1;
    double proxy_mask_prob = 0.15;
    bool proxy_hops = false;
    proxy_cmd->add_option("--task", proxy_task, "sap | mlm | og")->required();
    proxy_cmd->add_option("--triplets", proxy_triplets, "triplets.jsonl")->required();
    proxy_cmd->add_option("--graph", proxy_graph, "graph.json (sap)");
    proxy_cmd->add_option("--objects", proxy_objects, "objects.json (og)");
    proxy_cmd->add_option("--anchors", proxy_anchors, "case-(iii) samples per triplet");
    proxy_cmd->add_option("--mask-prob", proxy_mask_prob, "mlm masking probability");
    proxy_cmd->add_flag("--hop", proxy_hops, "case-(iii) distances in hops instead of meters");
    proxy_cmd->add_option("--out", proxy_out, "samples.jsonl output")->required();

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "run agents over episodes and score them");
    std::string eval_triplets, eval_graph, eval_dataset, eval_agent = "oracle", eval_replay,
                eval_out, eval_plot;
    MetricOptions eval_opts;
    eval_cmd->add_option("--triplets", eval_triplets, "triplets.jsonl")->required();
    eval_cmd->add_option("--graph", eval_graph, "graph.json (single scene)");
    eval_cmd->add_option("--dataset", eval_dataset, "dataset directory (multi-scene)");
    eval_cmd->add_option("--agent", eval_agent, "oracle | random | replay");
    eval_cmd->add_option("--replay", eval_replay, "actions.jsonl for the replay agent");
    eval_cmd->add_option("--success-radius", eval_opts.success_radius, "success distance (m)");
    eval_cmd->add_flag("--strict-goal", eval_opts.strict_goal_membership,
                       "require stopping exactly on a goal node");
    eval_cmd->add_option("--out", eval_out, "results.json output")->required();
    eval_cmd->add_option("--plot-data", eval_plot, "per-environment CSV series output");

    // ---- stats ----
    auto* stats_cmd = app.add_subcommand("stats", "dataset statistics");
    std::string stats_triplets, stats_out;
    stats_cmd->add_option("--triplets", stats_triplets, "triplets.jsonl")->required();
    stats_cmd->add_option("--out", stats_out, "stats.json output");

    // ---- validate ----
    auto* validate_cmd = app.add_subcommand("validate", "recheck every invariant of a dataset");
    std::string validate_dir, validate_out;
    validate_cmd->add_option("dir", validate_dir, "dataset directory")->required();
    validate_cmd->add_option("--out", validate_out, "report.json output");

    // ---- run ----
    auto* run_cmd = app.add_subcommand("run", "end-to-end pipeline");
    std::string run_out;
    int run_scenes = -1;
    std::string run_noise;
    run_cmd->add_option("--out", run_out, "dataset output directory")->required();
    run_cmd->add_option("--scenes", run_scenes, "number of scenes");
    run_cmd->add_option("--noise", run_noise, "noise profile override");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough(true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (synth_cmd->parsed()) {
        PipelineConfig config = global.config(app);
        if (!synth_noise.empty()) config.synth.noise_profile = synth_noise;
        if (synth_rooms.size() == 2) {
            config.synth.min_rooms = synth_rooms[0];
            config.synth.max_rooms = synth_rooms[1];
        }
        if (synth_objects.size() == 2) {
            config.synth.min_objects_per_room = synth_objects[0];
            config.synth.max_objects_per_room = synth_objects[1];
        }
        if (synth_floors.size() == 2) {
            config.synth.min_floors = synth_floors[0];
            config.synth.max_floors = synth_floors[1];
        }
        noise_profile(config.synth.noise_profile,
                      int(default_class_vocabulary().size()));  // fail fast on bad names
        for (int i = 0; i < synth_scenes; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "scene_%06d", i);
            const SceneBundle bundle =
                generate_scene(scene_seed(config.seed, uint64_t(i)), config.synth, name);
            save_bundle(bundle, fs::path(synth_out) / name, {.write_views = false});
        }
        std::cout << "wrote " << synth_scenes << " bundles to " << synth_out << "\n";
        return kExitOk;
    }

    if (graph_cmd->parsed()) {
        PipelineConfig config = global.config(app);
        if (app.count("--config")) graph_params = config.graph;
        SceneBundle bundle = load_bundle(graph_bundle, {.load_views = false, .verify = true});
        const GraphBuildResult result = build_graph(bundle, graph_params, config.seed);
        bundle.nodes.clear();
        for (int i = 0; i < result.graph.size(); ++i) {
            PanoramaNode node;
            node.id = i;
            node.position = result.graph.positions[size_t(i)];
            bundle.nodes.push_back(std::move(node));
        }
        if (graph_write_views) {
            auto scene =
                std::make_shared<RenderScene>(*bundle.ground_truth, bundle.class_vocabulary);
            const NoiseSpec noise = noise_profile(bundle.noise_profile, bundle.num_classes());
            bundle.nodes =
                build_panoramas(*scene, bundle.field, result.graph.positions, bundle.view,
                                bundle.max_depth, bundle.topk, noise, bundle.render_seed);
        }
        save_bundle(bundle, graph_bundle, {.write_views = graph_write_views});
        Json gj = nav_graph_to_json(result.graph);
        gj["meta"] = {{"scene_id", bundle.scene_id},
                      {"coverage", result.coverage},
                      {"params",
                       {{"sample_count", graph_params.sample_count},
                        {"min_node_spacing", graph_params.min_node_spacing},
                        {"max_edge_geodesic", graph_params.max_edge_geodesic},
                        {"min_visibility_depth", graph_params.min_visibility_depth},
                        {"coverage_radius", graph_params.coverage_radius}}}};
        write_json_file(graph_out, gj);
        std::cout << "graph: " << result.graph.size() << " nodes, " << result.graph.edges.size()
                  << " edges, coverage " << result.coverage << "\n";
        return kExitOk;
    }

    if (label_cmd->parsed()) {
        PipelineConfig config = global.config(app);
        if (app.count("--config")) label_params = config.fusion;
        const SceneBundle bundle = load_bundle(label_bundle, {.load_views = false, .verify = true});
        const NavGraph graph = load_graph_file(label_graph);
        std::vector<std::pair<int, Vec3>> node_positions;
        for (int i = 0; i < graph.size(); ++i)
            node_positions.emplace_back(i, graph.positions[size_t(i)]);
        auto provider = make_view_provider(label_bundle, bundle, node_positions);
        std::vector<int> node_ids;
        for (const auto& [nid, p] : node_positions) node_ids.push_back(nid);

        Json oj;
        if (label_baseline == "single-view") {
            const auto objects = single_view_scene(*provider, node_ids, label_params);
            FusionResult wrapper;
            wrapper.objects = objects;
            oj = objects_to_json(wrapper, bundle.class_vocabulary);
            if (bundle.ground_truth) {
                const auto acc = label_accuracy(objects, *bundle.ground_truth);
                std::cout << "single-view label accuracy: " << acc.accuracy << " (" << acc.matched
                          << " matched)\n";
            }
        } else if (label_baseline == "cross-view") {
            const FusionResult fusion =
                fuse_scene(*provider, node_ids, bundle.num_classes(), label_params);
            oj = objects_to_json(fusion, bundle.class_vocabulary);
            if (bundle.ground_truth) {
                const auto acc = label_accuracy(fusion.objects, *bundle.ground_truth);
                std::cout << "cross-view label accuracy: " << acc.accuracy << " (" << acc.matched
                          << " matched)\n";
            }
        } else {
            throw ConfigError("unknown baseline: " + label_baseline);
        }
        oj["meta"] = {{"scene_id", bundle.scene_id},
                      {"voxel", label_params.voxel_size},
                      {"connectivity", label_params.connectivity},
                      {"baseline", label_baseline}};
        write_json_file(label_out, oj);
        return kExitOk;
    }

    if (trip_cmd->parsed()) {
        PipelineConfig config = global.config(app);
        if (app.count("--config")) trip_params = config.triplets;
        trip_params.d_o = parse_d_o(trip_do);
        trip_params.mode = instruction_mode_from_string(trip_mode);
        const SceneBundle bundle = load_bundle(trip_bundle, {.load_views = false, .verify = true});
        const NavGraph graph = load_graph_file(trip_graph);
        const Json oj = read_json_file(trip_objects);
        FusionParams fusion_params = config.fusion;
        if (oj.contains("meta")) {
            if (oj["meta"].contains("voxel")) fusion_params.voxel_size = oj["meta"]["voxel"];
            if (oj["meta"].contains("connectivity"))
                fusion_params.connectivity = oj["meta"]["connectivity"];
        }
        std::vector<std::pair<int, Vec3>> node_positions;
        for (int i = 0; i < graph.size(); ++i)
            node_positions.emplace_back(i, graph.positions[size_t(i)]);
        auto provider = make_view_provider(trip_bundle, bundle, node_positions);
        std::vector<int> node_ids;
        for (const auto& [nid, p] : node_positions) node_ids.push_back(nid);
        const FusionResult fusion =
            fuse_scene(*provider, node_ids, bundle.num_classes(), fusion_params);
        if (oj.contains("objects") && oj["objects"].size() != fusion.objects.size())
            throw Error("objects.json disagrees with the bundle's re-derived fusion output");

        TripletContext ctx;
        ctx.scene_id = bundle.scene_id;
        ctx.graph = &graph;
        ctx.provider = provider.get();
        ctx.fusion = &fusion;
        ctx.truth = bundle.ground_truth ? &*bundle.ground_truth : nullptr;
        ctx.voxel_size = fusion_params.voxel_size;
        auto triplets = generate_triplets(ctx, trip_params, config.seed);

        if (!trip_instructions.empty()) {
            const std::string text = read_text_file(trip_instructions);
            std::vector<std::string> lines;
            std::istringstream iss(text);
            std::string line;
            while (std::getline(iss, line))
                if (!line.empty()) lines.push_back(line);
            if (lines.size() != triplets.size())
                throw Error("instruction file has " + std::to_string(lines.size()) +
                            " lines for " + std::to_string(triplets.size()) + " triplets");
            for (size_t i = 0; i < triplets.size(); ++i) triplets[i].instruction = lines[i];
        }
        write_triplets_jsonl(trip_out, triplets);
        if (!trip_prompts.empty()) {
            const auto prompts =
                export_prompts(triplets, fusion, graph, bundle.class_vocabulary, trip_params);
            write_prompts_jsonl(trip_prompts, prompts);
        }
        std::cout << "wrote " << triplets.size() << " triplets\n";
        return kExitOk;
    }

    if (proxy_cmd->parsed()) {
        PipelineConfig config = global.config(app);
        const auto triplets = read_triplets_jsonl(proxy_triplets);
        std::ofstream out(proxy_out, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + proxy_out);
        Rng rng(stage_seed(config.seed, seed_tag::kProxy));
        size_t count = 0;
        if (proxy_task == "sap") {
            if (proxy_graph.empty()) throw ConfigError("sap needs --graph");
            const NavGraph graph = load_graph_file(proxy_graph);
            SapOptions opts{proxy_anchors, proxy_hops};
            for (size_t t = 0; t < triplets.size(); ++t) {
                for (const auto& s : sap_samples(triplets[t], graph, rng, opts)) {
                    out << Json{{"task", "sap"},
                                {"triplet", t},
                                {"case", s.kase},
                                {"history", s.history},
                                {"target", s.target}}
                               .dump()
                        << "\n";
                    ++count;
                }
            }
        } else if (proxy_task == "mlm") {
            for (size_t t = 0; t < triplets.size(); ++t) {
                std::istringstream iss(triplets[t].instruction);
                std::vector<std::string> tokens;
                std::string tok;
                while (iss >> tok) tokens.push_back(tok);
                if (tokens.empty()) continue;
                const auto s = mlm_mask(tokens, rng, proxy_mask_prob);
                out << Json{{"task", "mlm"}, {"triplet", t}, {"tokens", s.tokens},
                            {"masked", s.masked}}
                           .dump()
                    << "\n";
                ++count;
            }
        } else if (proxy_task == "og") {
            if (proxy_objects.empty()) throw ConfigError("og needs --objects");
            const Json oj = read_json_file(proxy_objects);
            std::map<ViewInstanceRef, int> view_map;
            for (const auto& [key, val] : oj.at("view_map").items()) {
                ViewInstanceRef ref;
                if (std::sscanf(key.c_str(), "%d/%d/%hu", &ref.node, &ref.view, &ref.instance) != 3)
                    throw Error("bad view_map key: " + key);
                view_map[ref] = val.get<int>();
            }
            for (size_t t = 0; t < triplets.size(); ++t) {
                const auto s = og_sample(triplets[t], view_map, &rng);
                out << Json{{"task", "og"},
                            {"triplet", t},
                            {"trajectory", s.trajectory},
                            {"candidates", s.candidates},
                            {"target_index", s.target_index}}
                           .dump()
                    << "\n";
                ++count;
            }
        } else {
            throw ConfigError("unknown proxy task: " + proxy_task);
        }
        std::cout << "wrote " << count << " samples\n";
        return kExitOk;
    }

    if (eval_cmd->parsed()) {
        PipelineConfig config = global.config(app);
        eval_opts.check();
        const auto triplets = read_triplets_jsonl(eval_triplets);
        if (triplets.empty()) throw Error("no triplets to evaluate");
        if (eval_graph.empty() && eval_dataset.empty())
            throw ConfigError("eval needs --graph or --dataset");
        const DatasetGraphs graphs = load_graphs(eval_graph, eval_dataset, triplets);

        std::map<size_t, ReplayAction> replays;
        if (eval_agent == "replay") {
            if (eval_replay.empty()) throw ConfigError("replay agent needs --replay");
            std::ifstream in(eval_replay);
            if (!in) throw Error("cannot read " + eval_replay);
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const Json j = Json::parse(line);
                ReplayAction a;
                a.moves = j.at("moves").get<std::vector<int>>();
                if (j.contains("grounded") && !j.at("grounded").is_null())
                    a.grounded = j.at("grounded").get<int>();
                replays[j.at("triplet").get<size_t>()] = std::move(a);
            }
        }

        std::vector<EpisodeResult> results;
        Json episodes = Json::array();
        for (size_t t = 0; t < triplets.size(); ++t) {
            const NavGraph& graph = graphs.for_scene(triplets[t].scene_id);
            EpisodeResult r;
            if (eval_agent == "oracle") {
                r = run_oracle_agent(graph, triplets[t], eval_opts);
            } else if (eval_agent == "random") {
                Rng rng = Rng::child(stage_seed(config.seed, seed_tag::kEval), {uint64_t(t)});
                r = run_random_agent(graph, triplets[t], rng, eval_opts);
            } else if (eval_agent == "replay") {
                const auto it = replays.find(t);
                if (it == replays.end()) throw Error("no replay actions for triplet " + std::to_string(t));
                r = run_replay(graph, triplets[t], it->second, eval_opts);
            } else {
                throw ConfigError("unknown agent: " + eval_agent);
            }
            results.push_back(r);
            episodes.push_back({{"triplet", t},
                                {"success", r.success},
                                {"oracle_success", r.oracle_success},
                                {"spl", r.spl},
                                {"rgs", r.rgs},
                                {"rgspl", r.rgspl},
                                {"predicted_length", r.predicted_length},
                                {"shortest_length", r.shortest_length}});
        }
        const AggregateMetrics agg = aggregate(results);
        Json rj;
        rj["aggregate"] = {{"SR", agg.sr},   {"OSR", agg.osr},     {"SPL", agg.spl},
                           {"RGS", agg.rgs}, {"RGSPL", agg.rgspl}, {"n", agg.n}};
        Json per_env = Json::array();
        std::map<std::string, std::vector<EpisodeResult>> by_env;
        for (size_t t = 0; t < triplets.size(); ++t)
            by_env[triplets[t].scene_id].push_back(results[t]);
        for (const auto& [env, rs] : by_env) {
            const AggregateMetrics a = aggregate(rs);
            per_env.push_back({{"scene_id", env}, {"SR", a.sr}, {"OSR", a.osr}, {"SPL", a.spl},
                               {"RGS", a.rgs}, {"RGSPL", a.rgspl}, {"n", a.n}});
        }
        rj["per_env"] = per_env;
        rj["episodes"] = episodes;
        write_json_file(eval_out, rj);
        if (!eval_plot.empty()) {
            std::ofstream csv(eval_plot, std::ios::trunc);
            csv << "scene_id,n,SR,OSR,SPL,RGS,RGSPL\n";
            for (const auto& row : per_env)
                csv << row["scene_id"].get<std::string>() << "," << row["n"] << "," << row["SR"]
                    << "," << row["OSR"] << "," << row["SPL"] << "," << row["RGS"] << ","
                    << row["RGSPL"] << "\n";
            csv << "ALL," << agg.n << "," << agg.sr << "," << agg.osr << "," << agg.spl << ","
                << agg.rgs << "," << agg.rgspl << "\n";
        }
        std::cout << "SR " << agg.sr << "  OSR " << agg.osr << "  SPL " << agg.spl << "  RGS "
                  << agg.rgs << "  RGSPL " << agg.rgspl << "  (n=" << agg.n << ")\n";
        return kExitOk;
    }

    if (stats_cmd->parsed()) {
        const auto triplets = read_triplets_jsonl(stats_triplets);
        const DatasetStats s = dataset_stats(triplets);
        const Json j = stats_to_json(s);
        if (!stats_out.empty()) write_json_file(stats_out, j);
        std::cout << j.dump(2) << "\n";
        return kExitOk;
    }

    if (validate_cmd->parsed()) {
        const ValidationReport report = validate_dataset(validate_dir);
        if (!validate_out.empty()) write_json_file(validate_out, report.to_json());
        for (const auto& e : report.structural_errors) std::cout << "structural: " << e << "\n";
        for (const auto& c : report.checks)
            std::cout << c.name << ": " << c.checked << " checked, " << c.violations
                      << " violations\n";
        std::cout << (report.ok() ? "OK" : "FAILED") << "\n";
        return report.ok() ? kExitOk : kExitValidation;
    }

    if (run_cmd->parsed()) {
        PipelineConfig config = global.config(app);
        if (run_scenes > 0) config.scenes = run_scenes;
        if (!run_noise.empty()) config.synth.noise_profile = run_noise;
        const RunManifest manifest = run_pipeline(config, run_out);
        std::cout << "config sha256: " << manifest.config_sha256 << "\n";
        std::cout << "triplets: " << manifest.triplet_count << "\n";
        for (const auto& [stage, sec] : manifest.stage_seconds)
            std::cout << "  " << stage << ": " << sec << " s\n";
        std::cout << "manifest: " << (fs::path(run_out) / "run_manifest.json").string() << "\n";
        return kExitOk;
    }

    return kExitUsage;
}

}  // namespace

int cli_main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}

}  // namespace vlnforge

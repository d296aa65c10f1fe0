#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vlnforge/bundle_io.hpp"
#include "vlnforge/pipeline.hpp"
#include "vlnforge/proxy.hpp"

namespace py = pybind11;
using namespace vlnforge;

namespace {

py::object json_to_py(const Json& j) {
    switch (j.type()) {
        case Json::value_t::null: return py::none();
        case Json::value_t::boolean: return py::bool_(j.get<bool>());
        case Json::value_t::number_integer: return py::int_(j.get<int64_t>());
        case Json::value_t::number_unsigned: return py::int_(j.get<uint64_t>());
        case Json::value_t::number_float: return py::float_(j.get<double>());
        case Json::value_t::string: return py::str(j.get<std::string>());
        case Json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case Json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
            return out;
        }
        default: return py::none();
    }
}

Json py_to_json(const py::handle& obj) {
    if (obj.is_none()) return nullptr;
    if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
    if (py::isinstance<py::int_>(obj)) return obj.cast<int64_t>();
    if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
    if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
    if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
        Json out = Json::array();
        for (const auto& item : obj) out.push_back(py_to_json(item));
        return out;
    }
    if (py::isinstance<py::dict>(obj)) {
        Json out = Json::object();
        for (const auto& [key, value] : obj.cast<py::dict>())
            out[key.cast<std::string>()] = py_to_json(value);
        return out;
    }
    throw py::type_error("unsupported value in a config/structure conversion");
}

PipelineConfig config_from(const py::object& config) {
    if (config.is_none()) return PipelineConfig{};
    return PipelineConfig::from_json(py_to_json(config));
}

NavGraph graph_from(const py::dict& graph) { return nav_graph_from_json(py_to_json(graph)); }

VlnTriplet triplet_from(const py::dict& t) { return triplet_from_json(py_to_json(t)); }

py::dict process_scene(uint64_t seed, const py::object& config, const std::string& scene_id) {
    const PipelineConfig cfg = config_from(config);
    const SceneBundle bundle = generate_scene(seed, cfg.synth, scene_id);
    const GraphBuildResult gb = build_graph(bundle, cfg.graph, seed);

    std::vector<std::pair<int, Vec3>> node_positions;
    std::vector<int> node_ids;
    for (int i = 0; i < gb.graph.size(); ++i) {
        node_positions.emplace_back(i, gb.graph.positions[size_t(i)]);
        node_ids.push_back(i);
    }
    auto scene = std::make_shared<RenderScene>(*bundle.ground_truth, bundle.class_vocabulary);
    SynthViewProvider provider(scene, bundle, node_positions);
    const FusionResult fusion = fuse_scene(provider, node_ids, bundle.num_classes(), cfg.fusion);

    TripletContext ctx;
    ctx.scene_id = bundle.scene_id;
    ctx.graph = &gb.graph;
    ctx.provider = &provider;
    ctx.fusion = &fusion;
    ctx.truth = bundle.ground_truth ? &*bundle.ground_truth : nullptr;
    ctx.voxel_size = cfg.fusion.voxel_size;
    const auto triplets = generate_triplets(ctx, cfg.triplets, seed);
    const auto prompts =
        export_prompts(triplets, fusion, gb.graph, bundle.class_vocabulary, cfg.triplets);

    Json out;
    out["scene_id"] = bundle.scene_id;
    out["coverage"] = gb.coverage;
    out["graph"] = nav_graph_to_json(gb.graph);
    out["objects"] = objects_to_json(fusion, bundle.class_vocabulary);
    Json tj = Json::array();
    for (const auto& t : triplets) tj.push_back(triplet_to_json(t));
    out["triplets"] = tj;
    Json pj = Json::array();
    for (const auto& p : prompts) pj.push_back(prompt_to_json(p));
    out["prompts"] = pj;
    if (bundle.ground_truth) {
        const auto acc = label_accuracy(fusion.objects, *bundle.ground_truth);
        out["label_accuracy"] = acc.undefined ? Json() : Json(acc.accuracy);
        out["truth_object_count"] = bundle.ground_truth->objects.size();
    }
    out["stats"] = stats_to_json(dataset_stats(triplets));
    return json_to_py(out).cast<py::dict>();
}

py::dict evaluate(const py::dict& graph, const py::list& triplets, const std::string& agent,
                  uint64_t seed, double success_radius) {
    const NavGraph g = graph_from(graph);
    MetricOptions opts;
    opts.success_radius = success_radius;
    std::vector<EpisodeResult> results;
    size_t index = 0;
    for (const auto& item : triplets) {
        const VlnTriplet t = triplet_from(item.cast<py::dict>());
        if (agent == "oracle") {
            results.push_back(run_oracle_agent(g, t, opts));
        } else if (agent == "random") {
            Rng rng(mix_seed({seed, seed_tag::kEval, index}));
            results.push_back(run_random_agent(g, t, rng, opts));
        } else {
            throw InvalidArgument("agent must be 'oracle' or 'random'");
        }
        ++index;
    }
    const AggregateMetrics agg = aggregate(results);
    py::dict out;
    out["SR"] = agg.sr;
    out["OSR"] = agg.osr;
    out["SPL"] = agg.spl;
    out["RGS"] = agg.rgs;
    out["RGSPL"] = agg.rgspl;
    out["n"] = agg.n;
    return out;
}

}  // namespace

PYBIND11_MODULE(_vlnforge, m) {
    m.doc() = "Synthetic indoor scenes to navigation training data";

    m.def(
        "default_config", [] { return json_to_py(PipelineConfig{}.to_json()); },
        "The pinned default pipeline configuration as a dict.");

    m.def("process_scene", &process_scene, py::arg("seed"), py::arg("config") = py::none(),
          py::arg("scene_id") = "",
          "Generate one scene and run graph construction, semantic fusion and\n"
          "triplet generation; returns graph/objects/triplets/prompts/stats.");

    m.def("evaluate", &evaluate, py::arg("graph"), py::arg("triplets"),
          py::arg("agent") = "oracle", py::arg("seed") = 1, py::arg("success_radius") = 3.0,
          "Run an agent over every triplet and aggregate SR/OSR/SPL/RGS/RGSPL.");

    m.def(
        "run_pipeline",
        [](const py::object& config, const std::string& out_dir) {
            const RunManifest manifest = run_pipeline(config_from(config), out_dir);
            return json_to_py(manifest.to_json());
        },
        py::arg("config"), py::arg("out_dir"),
        "End-to-end dataset generation into a directory; returns the run manifest.");

    m.def(
        "validate",
        [](const std::string& dir) { return json_to_py(validate_dataset(dir).to_json()); },
        py::arg("dataset_dir"), "Recheck every invariant of a dataset directory.");

    m.def(
        "dataset_stats",
        [](const py::list& triplets) {
            std::vector<VlnTriplet> ts;
            for (const auto& item : triplets) ts.push_back(triplet_from(item.cast<py::dict>()));
            return json_to_py(stats_to_json(dataset_stats(ts)));
        },
        py::arg("triplets"));

    m.def(
        "make_instruction",
        [](const std::string& mode, const std::string& class_name, const std::string& room,
           uint32_t variant) {
            return make_instruction(instruction_mode_from_string(mode), class_name, room, variant);
        },
        py::arg("mode"), py::arg("class_name"), py::arg("room") = "room", py::arg("variant") = 0);

    m.def(
        "mlm_mask",
        [](const std::vector<std::string>& tokens, uint64_t seed, double mask_prob) {
            Rng rng(seed);
            return mlm_mask(tokens, rng, mask_prob).masked;
        },
        py::arg("tokens"), py::arg("seed") = 1, py::arg("mask_prob") = 0.15);

    m.def(
        "sap_samples",
        [](const py::dict& triplet, const py::dict& graph, uint64_t seed, int anchors) {
            const NavGraph g = graph_from(graph);
            Rng rng(mix_seed({seed, seed_tag::kProxy}));
            py::list out;
            SapOptions opts;
            opts.random_anchors = anchors;
            for (const auto& s : sap_samples(triplet_from(triplet), g, rng, opts)) {
                py::dict d;
                d["case"] = s.kase;
                d["history"] = s.history;
                d["target"] = s.target;
                out.append(d);
            }
            return out;
        },
        py::arg("triplet"), py::arg("graph"), py::arg("seed") = 1, py::arg("anchors") = 1);

    m.def(
        "pixel_to_point",
        [](double u, double v, double depth, int width, int height, double hfov,
           std::tuple<double, double, double> position, double heading, double elevation) {
            const CameraIntrinsics intr(width, height, hfov);
            const Pose pose =
                Pose::at({std::get<0>(position), std::get<1>(position), std::get<2>(position)},
                         heading, elevation);
            const Vec3 p = pixel_to_point(u, v, depth, intr, pose);
            return std::make_tuple(p.x, p.y, p.z);
        },
        py::arg("u"), py::arg("v"), py::arg("depth"), py::arg("width"), py::arg("height"),
        py::arg("hfov"), py::arg("position") = std::make_tuple(0.0, 0.0, 0.0),
        py::arg("heading") = 0.0, py::arg("elevation") = 0.0);

    py::register_exception<Error>(m, "VlnforgeError");
}

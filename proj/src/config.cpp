#include "vlnforge/config.hpp"

#include <cmath>
#include <set>

#include "vlnforge/hash.hpp"

namespace vlnforge {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("config: unknown key " + where + "." + key);
}

template <typename T>
void get_if(const Json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

Json d_o_to_json(double d_o) {
    if (std::isinf(d_o)) return "inf";
    return d_o;
}

double d_o_from_json(const Json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw ConfigError("config: d_o must be a number or \"inf\"");
    }
    return j.get<double>();
}

}  // namespace

void PipelineConfig::check() const {
    if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
    if (scenes < 1) throw ConfigError("config: scenes must be >= 1");
    synth.check();
    graph.check();
    fusion.check();
    triplets.check();
    eval.check();
}

Json PipelineConfig::to_json() const {
    Json j;
    j["seed"] = seed;
    j["jobs"] = jobs;
    j["scenes"] = scenes;
    j["write_views"] = write_views;
    j["synth"] = {{"floors", {synth.min_floors, synth.max_floors}},
                  {"rooms", {synth.min_rooms, synth.max_rooms}},
                  {"objects_per_room", {synth.min_objects_per_room, synth.max_objects_per_room}},
                  {"min_room_dim", synth.min_room_dim},
                  {"max_building_dim", synth.max_building_dim},
                  {"wall_thickness", synth.wall_thickness},
                  {"wall_height", synth.wall_height},
                  {"door_width", synth.door_width},
                  {"door_height", synth.door_height},
                  {"extra_door_prob", synth.extra_door_prob},
                  {"object_gap", synth.object_gap},
                  {"cell", synth.cell},
                  {"camera_height", synth.camera_height},
                  {"agent_radius", synth.agent_radius},
                  {"view_width", synth.view.width},
                  {"view_height", synth.view.height},
                  {"hfov", synth.view.hfov},
                  {"max_depth", synth.max_depth},
                  {"topk", synth.topk},
                  {"noise", synth.noise_profile}};
    j["graph"] = {{"samples", graph.sample_count},
                  {"spacing", graph.min_node_spacing},
                  {"edge", graph.max_edge_geodesic},
                  {"visdepth", graph.min_visibility_depth},
                  {"coverage_radius", graph.coverage_radius},
                  {"visibility_window", graph.visibility_window},
                  {"visibility_patch", graph.visibility_patch},
                  {"symmetric_visibility", graph.symmetric_visibility}};
    j["fusion"] = {{"voxel", fusion.voxel_size},
                   {"connectivity", fusion.connectivity},
                   {"min_voxels", fusion.min_voxels},
                   {"stride", fusion.stride},
                   {"map_overlap", fusion.map_overlap},
                   {"stuff_classes", fusion.stuff_classes}};
    j["triplets"] = {{"d_o", d_o_to_json(triplets.d_o)},
                     {"min_hops", triplets.min_hops},
                     {"max_hops", triplets.max_hops},
                     {"per_object", triplets.per_object},
                     {"occlusion_factor", triplets.occlusion_factor},
                     {"bbox_min_frac", triplets.bbox_min_frac},
                     {"mode", to_string(triplets.mode)},
                     {"max_other_tokens", triplets.max_other_tokens},
                     {"goal_distance_to_box", triplets.goal_distance_to_box}};
    j["eval"] = {{"success_radius", eval.success_radius},
                 {"strict_goal", eval.strict_goal_membership}};
    return j;
}

PipelineConfig PipelineConfig::from_json(const Json& j) {
    PipelineConfig c;
    try {
        check_keys(j, {"seed", "jobs", "scenes", "write_views", "synth", "graph", "fusion",
                       "triplets", "eval"},
                   "<root>");
        get_if(j, "seed", c.seed);
        get_if(j, "jobs", c.jobs);
        get_if(j, "scenes", c.scenes);
        get_if(j, "write_views", c.write_views);
        if (j.contains("synth")) {
            const Json& s = j.at("synth");
            check_keys(s,
                       {"floors", "rooms", "objects_per_room", "min_room_dim", "max_building_dim",
                        "wall_thickness", "wall_height", "door_width", "door_height",
                        "extra_door_prob", "object_gap", "cell", "camera_height", "agent_radius",
                        "view_width", "view_height", "hfov", "max_depth", "topk", "noise"},
                       "synth");
            auto range = [&](const char* key, int& lo, int& hi) {
                if (!s.contains(key)) return;
                lo = s.at(key).at(0).get<int>();
                hi = s.at(key).at(1).get<int>();
            };
            range("floors", c.synth.min_floors, c.synth.max_floors);
            range("rooms", c.synth.min_rooms, c.synth.max_rooms);
            range("objects_per_room", c.synth.min_objects_per_room, c.synth.max_objects_per_room);
            get_if(s, "min_room_dim", c.synth.min_room_dim);
            get_if(s, "max_building_dim", c.synth.max_building_dim);
            get_if(s, "wall_thickness", c.synth.wall_thickness);
            get_if(s, "wall_height", c.synth.wall_height);
            get_if(s, "door_width", c.synth.door_width);
            get_if(s, "door_height", c.synth.door_height);
            get_if(s, "extra_door_prob", c.synth.extra_door_prob);
            get_if(s, "object_gap", c.synth.object_gap);
            get_if(s, "cell", c.synth.cell);
            get_if(s, "camera_height", c.synth.camera_height);
            get_if(s, "agent_radius", c.synth.agent_radius);
            get_if(s, "view_width", c.synth.view.width);
            get_if(s, "view_height", c.synth.view.height);
            get_if(s, "hfov", c.synth.view.hfov);
            get_if(s, "max_depth", c.synth.max_depth);
            get_if(s, "topk", c.synth.topk);
            get_if(s, "noise", c.synth.noise_profile);
        }
        if (j.contains("graph")) {
            const Json& g = j.at("graph");
            check_keys(g,
                       {"samples", "spacing", "edge", "visdepth", "coverage_radius",
                        "visibility_window", "visibility_patch", "symmetric_visibility"},
                       "graph");
            get_if(g, "samples", c.graph.sample_count);
            get_if(g, "spacing", c.graph.min_node_spacing);
            get_if(g, "edge", c.graph.max_edge_geodesic);
            get_if(g, "visdepth", c.graph.min_visibility_depth);
            get_if(g, "coverage_radius", c.graph.coverage_radius);
            get_if(g, "visibility_window", c.graph.visibility_window);
            get_if(g, "visibility_patch", c.graph.visibility_patch);
            get_if(g, "symmetric_visibility", c.graph.symmetric_visibility);
        }
        if (j.contains("fusion")) {
            const Json& f = j.at("fusion");
            check_keys(f, {"voxel", "connectivity", "min_voxels", "stride", "map_overlap",
                           "stuff_classes"},
                       "fusion");
            get_if(f, "voxel", c.fusion.voxel_size);
            get_if(f, "connectivity", c.fusion.connectivity);
            get_if(f, "min_voxels", c.fusion.min_voxels);
            get_if(f, "stride", c.fusion.stride);
            get_if(f, "map_overlap", c.fusion.map_overlap);
            get_if(f, "stuff_classes", c.fusion.stuff_classes);
        }
        if (j.contains("triplets")) {
            const Json& t = j.at("triplets");
            check_keys(t,
                       {"d_o", "min_hops", "max_hops", "per_object", "occlusion_factor",
                        "bbox_min_frac", "mode", "max_other_tokens", "goal_distance_to_box"},
                       "triplets");
            if (t.contains("d_o")) c.triplets.d_o = d_o_from_json(t.at("d_o"));
            get_if(t, "min_hops", c.triplets.min_hops);
            get_if(t, "max_hops", c.triplets.max_hops);
            get_if(t, "per_object", c.triplets.per_object);
            get_if(t, "occlusion_factor", c.triplets.occlusion_factor);
            get_if(t, "bbox_min_frac", c.triplets.bbox_min_frac);
            if (t.contains("mode"))
                c.triplets.mode = instruction_mode_from_string(t.at("mode").get<std::string>());
            get_if(t, "max_other_tokens", c.triplets.max_other_tokens);
            get_if(t, "goal_distance_to_box", c.triplets.goal_distance_to_box);
        }
        if (j.contains("eval")) {
            const Json& e = j.at("eval");
            check_keys(e, {"success_radius", "strict_goal"}, "eval");
            get_if(e, "success_radius", c.eval.success_radius);
            get_if(e, "strict_goal", c.eval.strict_goal_membership);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    try {
        c.check();
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path));
}

std::string PipelineConfig::sha256() const { return Sha256::of_string(canonical()); }

}  // namespace vlnforge

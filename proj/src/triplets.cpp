#include "vlnforge/triplets.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace vlnforge {

void TripletParams::check() const {
    if (!(d_o > 0)) throw InvalidArgument("triplets: d_o must be positive");
    if (min_hops < 1 || max_hops < min_hops) throw InvalidArgument("triplets: bad hop range");
    if (per_object < 1) throw InvalidArgument("triplets: per_object must be >= 1");
    if (occlusion_factor <= 0 || occlusion_factor > 1)
        throw InvalidArgument("triplets: bad occlusion factor");
    if (bbox_min_frac < 0 || bbox_min_frac > 1) throw InvalidArgument("triplets: bad bbox_min_frac");
}

Json triplet_to_json(const VlnTriplet& t) {
    Json j;
    j["scene_id"] = t.scene_id;
    j["instruction"] = t.instruction;
    j["start_node"] = t.start_node;
    j["start_heading"] = t.start_heading;
    j["expert_path"] = t.expert_path;
    j["goal_nodes"] = t.goal_nodes;
    j["target_object"] = t.target_object;
    Json boxes = Json::array();
    for (const auto& b : t.target_bbox_2d)
        boxes.push_back({{"node", b.node},
                         {"view", b.view},
                         {"box", {b.box[0], b.box[1], b.box[2], b.box[3]}}});
    j["target_bbox_2d"] = boxes;
    return j;
}

VlnTriplet triplet_from_json(const Json& j) {
    VlnTriplet t;
    t.scene_id = j.at("scene_id").get<std::string>();
    t.instruction = j.at("instruction").get<std::string>();
    t.start_node = j.at("start_node").get<int>();
    t.start_heading = j.at("start_heading").get<double>();
    t.expert_path = j.at("expert_path").get<std::vector<int>>();
    t.goal_nodes = j.at("goal_nodes").get<std::vector<int>>();
    t.target_object = j.at("target_object").get<int>();
    for (const auto& b : j.at("target_bbox_2d")) {
        GoalBox box;
        box.node = b.at("node").get<int>();
        box.view = b.at("view").get<int>();
        for (int i = 0; i < 4; ++i) box.box[i] = b.at("box").at(size_t(i)).get<int>();
        t.target_bbox_2d.push_back(box);
    }
    return t;
}

void write_triplets_jsonl(const std::filesystem::path& path,
                          const std::vector<VlnTriplet>& triplets) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& t : triplets) out << triplet_to_json(t).dump() << "\n";
    if (!out) throw Error("short write to " + path.string());
}

std::vector<VlnTriplet> read_triplets_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    std::vector<VlnTriplet> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(triplet_from_json(Json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error("malformed triplet line in " + path.string() + ": " + e.what());
        }
    }
    return out;
}

std::vector<int> hop_distances(const NavGraph& graph, const std::vector<int>& sources) {
    std::vector<int> dist(graph.positions.size(), INT_MAX);
    const auto adj = graph.adjacency();
    std::deque<int> frontier;
    for (int s : sources) {
        if (s < 0 || s >= graph.size()) throw InvalidArgument("hop_distances: bad source node");
        dist[size_t(s)] = 0;
        frontier.push_back(s);
    }
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop_front();
        for (const auto& [v, w] : adj[size_t(u)]) {
            if (dist[size_t(v)] != INT_MAX) continue;
            dist[size_t(v)] = dist[size_t(u)] + 1;
            frontier.push_back(v);
        }
    }
    return dist;
}

namespace {

double goal_distance(const Object3D& object, const Vec3& node_pos, const TripletParams& params) {
    if (!params.goal_distance_to_box) return distance(node_pos, object.centroid);
    const Aabb b = object.box();
    const Vec3 clamped{std::clamp(node_pos.x, b.lo.x, b.hi.x),
                       std::clamp(node_pos.y, b.lo.y, b.hi.y),
                       std::clamp(node_pos.z, b.lo.z, b.hi.z)};
    return distance(node_pos, clamped);
}

bool centroid_visible(const Object3D& object, int node, const Vec3& node_pos,
                      ViewProvider& provider, double factor) {
    for (int k = 0; k < kViewsPerNode; ++k) {
        const Pose pose = Pose::at(node_pos, view_heading(k), view_elevation(k));
        const ViewObservation& view = provider.view(node, k);
        const PixelProjection proj = project_point(object.centroid, view.intrinsics, pose);
        if (!proj.in_image || proj.depth <= 0.0) continue;
        const int u = std::clamp(int(std::lround(proj.u)), 0, view.intrinsics.width - 1);
        const int v = std::clamp(int(std::lround(proj.v)), 0, view.intrinsics.height - 1);
        const double stored = view.depth_at(u, v);
        if (stored > 0.0 && stored >= factor * proj.depth) return true;
    }
    return false;
}

}  // namespace

std::vector<int> goal_nodes(const Object3D& object, const NavGraph& graph, ViewProvider& provider,
                            double d_o, const TripletParams& params) {
    std::vector<int> out;
    for (int i = 0; i < graph.size(); ++i) {
        const Vec3& pos = graph.positions[size_t(i)];
        if (goal_distance(object, pos, params) > d_o) continue;
        if (!centroid_visible(object, i, pos, provider, params.occlusion_factor)) continue;
        out.push_back(i);
    }
    return out;
}

std::optional<int> sample_start(const NavGraph& graph, const std::vector<int>& goals, Rng& rng,
                                const TripletParams& params) {
    if (goals.empty()) throw InvalidArgument("sample_start: empty goal set");
    const auto dist = hop_distances(graph, goals);
    std::vector<int> eligible;
    for (int i = 0; i < graph.size(); ++i)
        if (dist[size_t(i)] >= params.min_hops && dist[size_t(i)] <= params.max_hops)
            eligible.push_back(i);
    if (eligible.empty()) return std::nullopt;
    return eligible[rng.uniform_u64(eligible.size())];
}

std::vector<int> expert_path(const NavGraph& graph, int start, const std::vector<int>& goals) {
    if (goals.empty()) throw InvalidArgument("expert_path: empty goal set");
    if (start < 0 || start >= graph.size()) throw InvalidArgument("expert_path: bad start");
    const auto adj = graph.adjacency();
    const auto hops_from_start = hop_distances(graph, {start});

    int best_hops = INT_MAX;
    for (int g : goals) best_hops = std::min(best_hops, hops_from_start[size_t(g)]);
    if (best_hops == INT_MAX) throw Error("expert_path: goals unreachable from start");
    if (best_hops == 0) return {start};

    constexpr double kInf = std::numeric_limits<double>::infinity();
    const size_t n = graph.positions.size();

    // layered DP: cheapest weight from start using exactly k hops
    std::vector<std::vector<double>> from_start(size_t(best_hops) + 1,
                                                std::vector<double>(n, kInf));
    from_start[0][size_t(start)] = 0.0;
    for (int k = 1; k <= best_hops; ++k)
        for (size_t u = 0; u < n; ++u) {
            if (from_start[size_t(k) - 1][u] == kInf) continue;
            for (const auto& [v, w] : adj[u]) {
                const double cand = from_start[size_t(k) - 1][u] + w;
                if (cand < from_start[size_t(k)][size_t(v)])
                    from_start[size_t(k)][size_t(v)] = cand;
            }
        }

    int goal = -1;
    double goal_weight = kInf;
    for (int g : goals) {
        if (hops_from_start[size_t(g)] != best_hops) continue;
        const double w = from_start[size_t(best_hops)][size_t(g)];
        if (w < goal_weight || (w == goal_weight && (goal == -1 || g < goal))) {
            goal = g;
            goal_weight = w;
        }
    }

    // cheapest weight from each node to the goal in exactly k hops,
    // for the forward lexicographic reconstruction
    std::vector<std::vector<double>> to_goal(size_t(best_hops) + 1, std::vector<double>(n, kInf));
    to_goal[0][size_t(goal)] = 0.0;
    for (int k = 1; k <= best_hops; ++k)
        for (size_t u = 0; u < n; ++u)
            for (const auto& [v, w] : adj[u]) {
                const double cand = w + to_goal[size_t(k) - 1][size_t(v)];
                if (cand < to_goal[size_t(k)][u]) to_goal[size_t(k)][u] = cand;
            }

    std::vector<int> path{start};
    int u = start;
    for (int remaining = best_hops; remaining > 0; --remaining) {
        int next = -1;
        for (const auto& [v, w] : adj[size_t(u)]) {  // adjacency is id-sorted
            if (w + to_goal[size_t(remaining) - 1][size_t(v)] == to_goal[size_t(remaining)][size_t(u)]) {
                next = v;
                break;
            }
        }
        if (next < 0) throw Error("expert_path: reconstruction failed");
        path.push_back(next);
        u = next;
    }
    return path;
}

namespace {

/// Best view and pixel box of an object's visible voxels at a node;
/// nullopt when no view passes the back-projection soundness check.
std::optional<GoalBox> goal_box(const Object3D& object, int node, const Vec3& node_pos,
                                ViewProvider& provider, double voxel_size,
                                const TripletParams& params) {
    SemanticVoxelGrid ref_grid;  // key geometry only
    ref_grid.voxel_size = voxel_size;

    struct Candidate {
        int view;
        int visible;
        int box[4];
    };
    std::vector<Candidate> candidates;
    for (int k = 0; k < kViewsPerNode; ++k) {
        const ViewObservation& view = provider.view(node, k);
        const Pose pose = Pose::at(node_pos, view_heading(k), view_elevation(k));
        int u0 = INT_MAX, v0 = INT_MAX, u1 = INT_MIN, v1 = INT_MIN, visible = 0;
        for (int64_t key : object.voxels) {
            const Vec3 c = ref_grid.center_of(key);
            const PixelProjection proj = project_point(c, view.intrinsics, pose);
            if (!proj.in_image || proj.depth <= 0.0) continue;
            const int u = std::clamp(int(std::lround(proj.u)), 0, view.intrinsics.width - 1);
            const int v = std::clamp(int(std::lround(proj.v)), 0, view.intrinsics.height - 1);
            const double stored = view.depth_at(u, v);
            if (stored <= 0.0 || stored + 2.0 * voxel_size < proj.depth) continue;
            ++visible;
            u0 = std::min(u0, u);
            v0 = std::min(v0, v);
            u1 = std::max(u1, u);
            v1 = std::max(v1, v);
        }
        if (visible > 0) candidates.push_back({k, visible, {u0, v0, u1, v1}});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.visible != b.visible) return a.visible > b.visible;
        return a.view < b.view;
    });

    for (const auto& cand : candidates) {
        const ViewObservation& view = provider.view(node, cand.view);
        const Pose pose = Pose::at(node_pos, view_heading(cand.view), view_elevation(cand.view));
        int hits = 0, total = 0;
        for (int v = cand.box[1]; v <= cand.box[3]; ++v) {
            for (int u = cand.box[0]; u <= cand.box[2]; ++u) {
                ++total;
                const double stored = view.depth_at(u, v);
                if (stored <= 0.0 || stored >= view.max_depth) continue;
                const Vec3 p = pixel_to_point(u, v, stored, view.intrinsics, pose);
                const int64_t key = ref_grid.key_of(p);
                if (std::binary_search(object.voxels.begin(), object.voxels.end(), key)) ++hits;
            }
        }
        if (total > 0 && double(hits) / double(total) >= params.bbox_min_frac) {
            GoalBox out;
            out.node = node;
            out.view = cand.view;
            for (int i = 0; i < 4; ++i) out.box[i] = cand.box[i];
            return out;
        }
    }
    return std::nullopt;
}

std::string room_label_for(const Object3D& object, const SceneTruth* truth) {
    if (truth) {
        for (const auto& room : truth->rooms) {
            const double fz = truth->floor_heights[size_t(room.floor)];
            if (object.centroid.z >= fz && object.centroid.z <= fz + truth->wall_height &&
                room.contains_xy(object.centroid.x, object.centroid.y))
                return room.type;
        }
    }
    return "room";
}

}  // namespace

std::vector<VlnTriplet> generate_triplets(const TripletContext& ctx, const TripletParams& params,
                                          uint64_t seed) {
    params.check();
    if (!ctx.graph || !ctx.provider || !ctx.fusion)
        throw InvalidArgument("generate_triplets: incomplete context");
    const NavGraph& graph = *ctx.graph;
    const FusionResult& fusion = *ctx.fusion;
    Rng rng(stage_seed(seed, seed_tag::kTriplets));
    const auto& vocab = default_class_vocabulary();

    std::vector<VlnTriplet> out;
    for (const auto& object : fusion.objects) {
        // nodes whose 2D instances actually map to this object
        std::set<int> covisible;
        for (const auto& [ref, n] : object.support) covisible.insert(ref.node);

        std::vector<int> goals;
        std::vector<GoalBox> boxes;
        for (int node : goal_nodes(object, graph, *ctx.provider, params.d_o, params)) {
            if (!covisible.count(node)) continue;
            const auto box = goal_box(object, node, graph.positions[size_t(node)], *ctx.provider,
                                      ctx.voxel_size, params);
            if (!box) continue;
            goals.push_back(node);
            boxes.push_back(*box);
        }
        if (goals.empty()) continue;

        for (int rep = 0; rep < params.per_object; ++rep) {
            const auto start = sample_start(graph, goals, rng, params);
            if (!start) break;
            VlnTriplet t;
            t.scene_id = ctx.scene_id;
            t.target_object = object.id;
            t.start_node = *start;
            t.start_heading = view_heading(int(rng.uniform_u64(kHeadingsPerRing)));
            t.expert_path = expert_path(graph, *start, goals);
            t.goal_nodes = goals;
            t.target_bbox_2d = boxes;
            const std::string cls = vocab[object.cls];
            t.instruction = make_instruction(params.mode, cls, room_label_for(object, ctx.truth),
                                             uint32_t(rng.next_u64() & 0xFFFFFFFFu));
            out.push_back(std::move(t));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<SpeakerPrompt> export_prompts(const std::vector<VlnTriplet>& triplets,
                                          const FusionResult& fusion, const NavGraph& graph,
                                          const std::vector<std::string>& vocab,
                                          const TripletParams& params) {
    // objects covisible per node, from the 2D->3D association
    std::unordered_map<int, std::set<int>> objects_at_node;
    for (const auto& [ref, obj] : fusion.view_map) objects_at_node[ref.node].insert(obj);

    std::vector<SpeakerPrompt> out;
    for (size_t ti = 0; ti < triplets.size(); ++ti) {
        const VlnTriplet& t = triplets[ti];
        const int goal = t.expert_path.back();
        const Vec3 goal_pos = graph.positions[size_t(goal)];

        int prompt_view = 0;
        for (const auto& b : t.target_bbox_2d)
            if (b.node == goal) prompt_view = b.view;
        const double frame_heading = view_heading(prompt_view);
        auto to_frame = [&](const Vec3& p) {
            const Vec3 d = p - goal_pos;
            const double c = std::cos(-frame_heading), s = std::sin(-frame_heading);
            return Vec3{c * d.x - s * d.y, s * d.x + c * d.y, d.z};
        };

        SpeakerPrompt prompt;
        prompt.scene_id = t.scene_id;
        prompt.triplet_index = int(ti);
        prompt.view = prompt_view;

        const Object3D& target = fusion.objects[size_t(t.target_object)];
        prompt.target = {vocab[target.cls], to_frame(target.centroid), target.extent,
                         t.scene_id + "/n" + std::to_string(goal) + "/v" +
                             std::to_string(prompt_view) + "/obj" + std::to_string(target.id)};

        std::vector<int> others(objects_at_node[goal].begin(), objects_at_node[goal].end());
        others.erase(std::remove(others.begin(), others.end(), target.id), others.end());
        std::sort(others.begin(), others.end(), [&](int a, int b) {
            const double da = distance(fusion.objects[size_t(a)].centroid, goal_pos);
            const double db = distance(fusion.objects[size_t(b)].centroid, goal_pos);
            if (da != db) return da < db;
            return a < b;
        });
        if (int(others.size()) > params.max_other_tokens) others.resize(size_t(params.max_other_tokens));
        for (int oid : others) {
            const Object3D& o = fusion.objects[size_t(oid)];
            prompt.others.push_back({vocab[o.cls], to_frame(o.centroid), o.extent,
                                     t.scene_id + "/n" + std::to_string(goal) + "/obj" +
                                         std::to_string(o.id)});
        }
        for (int k = 0; k < kViewsPerNode; ++k)
            prompt.views.push_back({view_heading(k), view_elevation(k),
                                    t.scene_id + "/n" + std::to_string(goal) + "/v" +
                                        std::to_string(k)});
        out.push_back(std::move(prompt));
    }
    return out;
}

Json prompt_to_json(const SpeakerPrompt& p) {
    auto token = [](const PromptToken& t) {
        return Json{{"class", t.class_name},
                    {"location", vec3_to_json(t.location)},
                    {"size", vec3_to_json(t.size)},
                    {"feature", t.feature}};
    };
    Json j;
    j["scene_id"] = p.scene_id;
    j["triplet"] = p.triplet_index;
    j["view"] = p.view;
    j["target"] = token(p.target);
    Json others = Json::array();
    for (const auto& o : p.others) others.push_back(token(o));
    j["others"] = others;
    Json views = Json::array();
    for (const auto& v : p.views)
        views.push_back(
            {{"heading", v.heading}, {"elevation", v.elevation}, {"feature", v.feature}});
    j["views"] = views;
    return j;
}

SpeakerPrompt prompt_from_json(const Json& j) {
    auto token = [](const Json& t) {
        return PromptToken{t.at("class").get<std::string>(), vec3_from_json(t.at("location")),
                           vec3_from_json(t.at("size")), t.at("feature").get<std::string>()};
    };
    SpeakerPrompt p;
    p.scene_id = j.at("scene_id").get<std::string>();
    p.triplet_index = j.at("triplet").get<int>();
    p.view = j.at("view").get<int>();
    p.target = token(j.at("target"));
    for (const auto& o : j.at("others")) p.others.push_back(token(o));
    for (const auto& v : j.at("views"))
        p.views.push_back({v.at("heading").get<double>(), v.at("elevation").get<double>(),
                           v.at("feature").get<std::string>()});
    return p;
}

void write_prompts_jsonl(const std::filesystem::path& path,
                         const std::vector<SpeakerPrompt>& prompts) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& p : prompts) out << prompt_to_json(p).dump() << "\n";
}

std::vector<SpeakerPrompt> read_prompts_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    std::vector<SpeakerPrompt> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(prompt_from_json(Json::parse(line)));
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> tokenize_lower(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream iss(text);
    std::string tok;
    while (iss >> tok) {
        std::transform(tok.begin(), tok.end(), tok.begin(),
                       [](unsigned char c) { return char(std::tolower(c)); });
        tokens.push_back(tok);
    }
    return tokens;
}

std::vector<std::string> sorted_env_ids(const std::vector<VlnTriplet>& triplets) {
    std::set<std::string> ids;
    for (const auto& t : triplets) ids.insert(t.scene_id);
    return {ids.begin(), ids.end()};
}

}  // namespace

DatasetStats dataset_stats(const std::vector<VlnTriplet>& triplets) {
    DatasetStats s;
    s.n_instructions = triplets.size();
    std::set<std::string> envs;
    std::set<std::pair<std::string, int>> objects;
    std::unordered_map<std::string, size_t> counts;
    size_t total_tokens = 0;
    for (const auto& t : triplets) {
        envs.insert(t.scene_id);
        objects.emplace(t.scene_id, t.target_object);
        const auto tokens = tokenize_lower(t.instruction);
        total_tokens += tokens.size();
        for (const auto& tok : tokens) counts[tok] += 1;
    }
    s.n_env = envs.size();
    s.n_objects = objects.size();
    for (const auto& [tok, n] : counts)
        if (n > 5) ++s.vocab_size;
    s.mean_instruction_length =
        triplets.empty() ? 0.0 : double(total_tokens) / double(triplets.size());
    return s;
}

Json stats_to_json(const DatasetStats& s) {
    return Json{{"n_env", s.n_env},
                {"n_objects", s.n_objects},
                {"n_instructions", s.n_instructions},
                {"vocab_size", s.vocab_size},
                {"mean_instruction_length", s.mean_instruction_length}};
}

std::vector<VlnTriplet> subset_by_environments(const std::vector<VlnTriplet>& triplets, size_t k,
                                               Rng& rng) {
    auto envs = sorted_env_ids(triplets);
    if (k > envs.size()) throw InvalidArgument("subset: k exceeds the environment count");
    std::vector<std::string> chosen;
    for (size_t i = 0; i < k; ++i) {
        const size_t pick = rng.uniform_u64(envs.size());
        chosen.push_back(envs[pick]);
        envs.erase(envs.begin() + long(pick));
    }
    return subset_by_environments(triplets, chosen);
}

std::vector<VlnTriplet> subset_by_environments(const std::vector<VlnTriplet>& triplets,
                                               const std::vector<std::string>& env_ids) {
    const std::set<std::string> keep(env_ids.begin(), env_ids.end());
    std::vector<VlnTriplet> out;
    for (const auto& t : triplets)
        if (keep.count(t.scene_id)) out.push_back(t);
    return out;
}

std::vector<VlnTriplet> subset_matched_count(const std::vector<VlnTriplet>& triplets, size_t cap,
                                             Rng& rng) {
    if (cap > triplets.size())
        throw InvalidArgument("subset: cap exceeds the instruction count");
    const auto envs = sorted_env_ids(triplets);
    std::unordered_map<std::string, std::vector<size_t>> by_env;
    for (size_t i = 0; i < triplets.size(); ++i) by_env[triplets[i].scene_id].push_back(i);
    for (const auto& env : envs) rng.shuffle(by_env[env]);

    std::vector<VlnTriplet> out;
    out.reserve(cap);
    size_t round = 0;
    while (out.size() < cap) {
        bool any = false;
        for (const auto& env : envs) {
            const auto& pool = by_env[env];
            if (round < pool.size()) {
                any = true;
                out.push_back(triplets[pool[round]]);
                if (out.size() == cap) return out;
            }
        }
        if (!any) break;
        ++round;
    }
    return out;
}

std::vector<VlnTriplet> mix_balanced(const std::vector<VlnTriplet>& a,
                                     const std::vector<VlnTriplet>& b, Rng& rng) {
    if (a.empty() || b.empty()) throw InvalidArgument("mix_balanced: both inputs must be non-empty");
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    std::vector<VlnTriplet> out;
    out.reserve(large.size() * 2);
    out.insert(out.end(), large.begin(), large.end());
    for (size_t i = 0; i < large.size(); ++i)
        out.push_back(small[rng.uniform_u64(small.size())]);
    rng.shuffle(out);
    return out;
}

}  // namespace vlnforge

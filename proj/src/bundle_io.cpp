#include "vlnforge/bundle_io.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include "vlnforge/hash.hpp"
#include "vlnforge/json_util.hpp"
#include "vlnforge/png_io.hpp"

namespace vlnforge {

namespace fs = std::filesystem;

namespace {

constexpr char kProbsMagic[4] = {'V', 'F', 'P', 'B'};

void append_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(uint8_t(v));
    out.push_back(uint8_t(v >> 8));
}

void append_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

uint16_t read_u16(const uint8_t* p) { return uint16_t(p[0]) | (uint16_t(p[1]) << 8); }
uint32_t read_u32(const uint8_t* p) {
    return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) | (uint32_t(p[3]) << 24);
}

void write_bytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw Error("short write to " + path.string());
}

std::vector<uint8_t> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BundleError(BundleError::Kind::MissingFile, "missing file: " + path.string());
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
}

std::string sha_of_bytes(const std::vector<uint8_t>& bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::vector<uint8_t> encode_depth(const ViewObservation& view) {
    std::vector<uint8_t> out(view.depth.size() * 4);
    static_assert(sizeof(float) == 4);
    std::memcpy(out.data(), view.depth.data(), out.size());
    return out;
}

std::vector<uint8_t> encode_probs(const ViewObservation& view) {
    std::vector<uint8_t> out;
    out.reserve(16 + view.prob_class.size() * 4);
    out.insert(out.end(), kProbsMagic, kProbsMagic + 4);
    append_u16(out, 1);
    append_u16(out, uint16_t(view.topk));
    append_u32(out, uint32_t(view.width()));
    append_u32(out, uint32_t(view.height()));
    for (size_t i = 0; i < view.prob_class.size(); ++i) {
        append_u16(out, view.prob_class[i]);
        append_u16(out, view.prob_q[i]);
    }
    return out;
}

std::vector<uint8_t> encode_instances(const ViewObservation& view) {
    std::vector<uint8_t> out;
    out.reserve(view.instances.size() * 2);
    for (uint16_t v : view.instances) append_u16(out, v);
    return out;
}

std::string depth_rel(int node, int k) {
    return "nodes/" + std::to_string(node) + "/view" + std::to_string(k) + ".depth";
}
std::string probs_rel(int node, int k) {
    return "nodes/" + std::to_string(node) + "/view" + std::to_string(k) + ".probs";
}
std::string inst_rel(int node, int k) {
    return "nodes/" + std::to_string(node) + "/view" + std::to_string(k) + ".inst";
}

Json truth_to_json(const SceneTruth& t) {
    Json j;
    j["building"] = {t.building_x0, t.building_y0, t.building_x1, t.building_y1};
    j["floors"] = t.floor_heights;
    j["wall_height"] = t.wall_height;
    Json rooms = Json::array();
    for (const auto& r : t.rooms)
        rooms.push_back({{"id", r.id},
                         {"floor", r.floor},
                         {"rect", {r.x0, r.y0, r.x1, r.y1}},
                         {"type", r.type}});
    j["rooms"] = rooms;
    Json walls = Json::array();
    for (const auto& w : t.walls)
        walls.push_back({{"lo", vec3_to_json(w.lo)}, {"hi", vec3_to_json(w.hi)}});
    j["walls"] = walls;
    Json objects = Json::array();
    for (const auto& o : t.objects)
        objects.push_back({{"id", o.id},
                           {"class", o.cls},
                           {"room", o.room},
                           {"center", vec3_to_json(o.center)},
                           {"extent", vec3_to_json(o.extent)}});
    j["objects"] = objects;
    return j;
}

SceneTruth truth_from_json(const Json& j) {
    SceneTruth t;
    const auto& b = j.at("building");
    t.building_x0 = b.at(0).get<double>();
    t.building_y0 = b.at(1).get<double>();
    t.building_x1 = b.at(2).get<double>();
    t.building_y1 = b.at(3).get<double>();
    t.floor_heights = j.at("floors").get<std::vector<double>>();
    t.wall_height = j.at("wall_height").get<double>();
    for (const auto& r : j.at("rooms")) {
        RoomTruth room;
        room.id = r.at("id").get<int>();
        room.floor = r.at("floor").get<int>();
        room.x0 = r.at("rect").at(0).get<double>();
        room.y0 = r.at("rect").at(1).get<double>();
        room.x1 = r.at("rect").at(2).get<double>();
        room.y1 = r.at("rect").at(3).get<double>();
        room.type = r.at("type").get<std::string>();
        t.rooms.push_back(room);
    }
    for (const auto& w : j.at("walls"))
        t.walls.push_back({vec3_from_json(w.at("lo")), vec3_from_json(w.at("hi"))});
    for (const auto& o : j.at("objects")) {
        ObjectTruth obj;
        obj.id = o.at("id").get<int>();
        obj.cls = o.at("class").get<uint16_t>();
        obj.room = o.at("room").get<int>();
        obj.center = vec3_from_json(o.at("center"));
        obj.extent = vec3_from_json(o.at("extent"));
        t.objects.push_back(obj);
    }
    return t;
}

GrayImage floor_to_image(const FloorGrid& g) {
    GrayImage img;
    img.width = g.nx;
    img.height = g.ny;
    img.pixels.resize(size_t(g.nx) * g.ny);
    for (int iy = 0; iy < g.ny; ++iy)
        for (int ix = 0; ix < g.nx; ++ix)
            img.set(ix, iy, g.is_navigable(ix, iy) ? 255 : 0);
    return img;
}

void verify_file(const fs::path& dir, const std::string& rel,
                 const std::map<std::string, std::string>& digests,
                 const std::vector<uint8_t>& bytes) {
    const auto it = digests.find(rel);
    if (it == digests.end()) return;  // unlisted, nothing to check
    if (sha_of_bytes(bytes) != it->second)
        throw BundleError(BundleError::Kind::ChecksumMismatch,
                          "checksum mismatch for " + (dir / rel).string());
}

ViewObservation decode_view(const SceneBundle& bundle, const Vec3& position, int view_index,
                            const std::vector<uint8_t>& depth_bytes,
                            const std::vector<uint8_t>& probs_bytes,
                            const std::vector<uint8_t>* inst_bytes) {
    ViewObservation view;
    view.pose = Pose::at(position, view_heading(view_index), view_elevation(view_index));
    view.intrinsics = bundle.view.intrinsics();
    view.num_classes = bundle.num_classes();
    view.max_depth = float(bundle.max_depth);

    const size_t npix = view.pixel_count();
    if (depth_bytes.size() != npix * 4)
        throw BundleError(BundleError::Kind::Parse, "depth file has wrong size");
    view.depth.resize(npix);
    std::memcpy(view.depth.data(), depth_bytes.data(), depth_bytes.size());

    if (probs_bytes.size() < 16 || std::memcmp(probs_bytes.data(), kProbsMagic, 4) != 0)
        throw BundleError(BundleError::Kind::Parse, "probs file has a bad header");
    if (read_u16(probs_bytes.data() + 4) != 1)
        throw BundleError(BundleError::Kind::VersionMismatch, "unsupported probs version");
    const int k = read_u16(probs_bytes.data() + 6);
    const uint32_t w = read_u32(probs_bytes.data() + 8);
    const uint32_t h = read_u32(probs_bytes.data() + 12);
    if (int(w) != view.width() || int(h) != view.height())
        throw BundleError(BundleError::Kind::Parse, "probs dimensions disagree with manifest");
    if (probs_bytes.size() != 16 + npix * size_t(k) * 4)
        throw BundleError(BundleError::Kind::Parse, "probs file has wrong size");
    view.topk = k;
    view.prob_class.resize(npix * size_t(k));
    view.prob_q.resize(npix * size_t(k));
    const uint8_t* p = probs_bytes.data() + 16;
    for (size_t i = 0; i < npix * size_t(k); ++i) {
        view.prob_class[i] = read_u16(p);
        view.prob_q[i] = read_u16(p + 2);
        p += 4;
    }

    if (inst_bytes) {
        if (inst_bytes->size() != npix * 2)
            throw BundleError(BundleError::Kind::Parse, "instance file has wrong size");
        view.instances.resize(npix);
        for (size_t i = 0; i < npix; ++i) view.instances[i] = read_u16(inst_bytes->data() + 2 * i);
    }
    return view;
}

}  // namespace

const PanoramaNode* SceneBundle::find_node(int id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

void SceneBundle::check() const {
    std::set<int> ids;
    for (const auto& n : nodes) {
        if (!ids.insert(n.id).second) throw InvalidArgument("duplicate node id in bundle");
        for (const auto& v : n.views)
            if (v.num_classes != num_classes())
                throw InvalidArgument("view vocabulary size disagrees with bundle");
    }
    for (const auto& g : field.floors) {
        if (!(g.cell > 0)) throw InvalidArgument("field cell size must be positive");
        if (g.navigable_count() == 0)
            throw InvalidArgument("every floor needs at least one navigable cell");
    }
    if (ground_truth) ground_truth->check();
}

void save_bundle(const SceneBundle& bundle, const fs::path& dir, const SaveOptions& opts) {
    fs::create_directories(dir / "field");
    std::map<std::string, std::string> files;

    for (size_t f = 0; f < bundle.field.floors.size(); ++f) {
        const auto& g = bundle.field.floors[f];
        const std::string png_rel = "field/floor" + std::to_string(f) + ".png";
        const auto png = encode_gray_png(floor_to_image(g));
        write_bytes(dir / png_rel, png);
        files[png_rel] = sha_of_bytes(png);

        Json meta;
        meta["height"] = g.height;
        meta["origin"] = {g.origin_x, g.origin_y};
        meta["cell"] = g.cell;
        meta["nx"] = g.nx;
        meta["ny"] = g.ny;
        const std::string meta_rel = "field/floor" + std::to_string(f) + ".meta.json";
        const std::string meta_text = meta.dump(2) + "\n";
        write_text_file(dir / meta_rel, meta_text);
        files[meta_rel] = Sha256::of_string(meta_text);
    }

    if (bundle.ground_truth) {
        const std::string text = truth_to_json(*bundle.ground_truth).dump(2) + "\n";
        write_text_file(dir / "truth.json", text);
        files["truth.json"] = Sha256::of_string(text);
    }

    if (opts.write_views) {
        for (const auto& node : bundle.nodes) {
            if (node.views.empty()) continue;
            node.check();
            fs::create_directories(dir / "nodes" / std::to_string(node.id));
            for (int k = 0; k < kViewsPerNode; ++k) {
                const auto& view = node.views[size_t(k)];
                const auto depth = encode_depth(view);
                write_bytes(dir / depth_rel(node.id, k), depth);
                files[depth_rel(node.id, k)] = sha_of_bytes(depth);
                const auto probs = encode_probs(view);
                write_bytes(dir / probs_rel(node.id, k), probs);
                files[probs_rel(node.id, k)] = sha_of_bytes(probs);
                if (view.has_instances()) {
                    const auto inst = encode_instances(view);
                    write_bytes(dir / inst_rel(node.id, k), inst);
                    files[inst_rel(node.id, k)] = sha_of_bytes(inst);
                }
            }
        }
    }

    Json manifest;
    manifest["format_version"] = kBundleFormatVersion;
    manifest["scene_id"] = bundle.scene_id;
    manifest["class_vocabulary"] = bundle.class_vocabulary;
    manifest["camera_height"] = bundle.field.camera_height;
    manifest["agent_radius"] = bundle.agent_radius;
    manifest["max_depth"] = bundle.max_depth;
    manifest["topk"] = bundle.topk;
    manifest["view"] = {{"width", bundle.view.width},
                        {"height", bundle.view.height},
                        {"hfov", bundle.view.hfov}};
    manifest["noise_profile"] = bundle.noise_profile;
    manifest["render_seed"] = bundle.render_seed;

    Json field;
    field["cell"] = bundle.field.floors.empty() ? 0.1 : bundle.field.floors[0].cell;
    Json floors = Json::array();
    for (size_t f = 0; f < bundle.field.floors.size(); ++f) {
        const auto& g = bundle.field.floors[f];
        floors.push_back({{"height", g.height},
                          {"origin", {g.origin_x, g.origin_y}},
                          {"cell", g.cell},
                          {"nx", g.nx},
                          {"ny", g.ny},
                          {"png", "field/floor" + std::to_string(f) + ".png"}});
    }
    field["floors"] = floors;
    Json stairs = Json::array();
    for (const auto& s : bundle.field.stairs)
        stairs.push_back({{"floor_a", s.floor_a},
                          {"cell_a", {s.cell_a_x, s.cell_a_y}},
                          {"floor_b", s.floor_b},
                          {"cell_b", {s.cell_b_x, s.cell_b_y}},
                          {"length", s.length}});
    field["stairs"] = stairs;
    manifest["field"] = field;

    Json nodes = Json::array();
    for (const auto& n : bundle.nodes)
        nodes.push_back({{"id", n.id}, {"position", vec3_to_json(n.position)}});
    manifest["nodes"] = nodes;
    manifest["files"] = files;
    write_json_file(dir / "manifest.json", manifest);
}

SceneBundle load_bundle(const fs::path& dir, const LoadOptions& opts) {
    const fs::path mpath = dir / "manifest.json";
    if (!fs::exists(mpath))
        throw BundleError(BundleError::Kind::MissingFile, "missing manifest: " + mpath.string());
    Json manifest;
    try {
        manifest = read_json_file(mpath);
    } catch (const Error& e) {
        throw BundleError(BundleError::Kind::Parse, e.what());
    }

    SceneBundle bundle;
    try {
        const int version = manifest.at("format_version").get<int>();
        if (version != kBundleFormatVersion)
            throw BundleError(BundleError::Kind::VersionMismatch,
                              "unsupported bundle format_version " + std::to_string(version));
        bundle.scene_id = manifest.at("scene_id").get<std::string>();
        bundle.class_vocabulary = manifest.at("class_vocabulary").get<std::vector<std::string>>();
        bundle.field.camera_height = manifest.at("camera_height").get<double>();
        bundle.agent_radius = manifest.at("agent_radius").get<double>();
        bundle.max_depth = manifest.at("max_depth").get<double>();
        bundle.topk = manifest.at("topk").get<int>();
        bundle.view.width = manifest.at("view").at("width").get<int>();
        bundle.view.height = manifest.at("view").at("height").get<int>();
        bundle.view.hfov = manifest.at("view").at("hfov").get<double>();
        bundle.noise_profile = manifest.at("noise_profile").get<std::string>();
        bundle.render_seed = manifest.at("render_seed").get<uint64_t>();

        std::map<std::string, std::string> digests;
        for (const auto& [rel, sha] : manifest.at("files").items())
            digests[rel] = sha.get<std::string>();

        for (const auto& fj : manifest.at("field").at("floors")) {
            FloorGrid g;
            g.height = fj.at("height").get<double>();
            g.origin_x = fj.at("origin").at(0).get<double>();
            g.origin_y = fj.at("origin").at(1).get<double>();
            g.cell = fj.at("cell").get<double>();
            g.nx = fj.at("nx").get<int>();
            g.ny = fj.at("ny").get<int>();
            const std::string rel = fj.at("png").get<std::string>();
            const auto png = read_bytes(dir / rel);
            if (opts.verify) verify_file(dir, rel, digests, png);
            const GrayImage img = decode_gray_png(png.data(), png.size());
            if (img.width != g.nx || img.height != g.ny)
                throw BundleError(BundleError::Kind::Parse,
                                  "field PNG dimensions disagree with sidecar");
            g.navigable.resize(size_t(g.nx) * g.ny);
            for (size_t i = 0; i < g.navigable.size(); ++i)
                g.navigable[i] = img.pixels[i] >= 128 ? 1 : 0;
            bundle.field.floors.push_back(std::move(g));
        }
        for (const auto& sj : manifest.at("field").at("stairs")) {
            StairLink s;
            s.floor_a = sj.at("floor_a").get<int>();
            s.cell_a_x = sj.at("cell_a").at(0).get<int>();
            s.cell_a_y = sj.at("cell_a").at(1).get<int>();
            s.floor_b = sj.at("floor_b").get<int>();
            s.cell_b_x = sj.at("cell_b").at(0).get<int>();
            s.cell_b_y = sj.at("cell_b").at(1).get<int>();
            s.length = sj.at("length").get<double>();
            bundle.field.stairs.push_back(s);
        }

        if (digests.count("truth.json")) {
            const auto bytes = read_bytes(dir / "truth.json");
            if (opts.verify) verify_file(dir, "truth.json", digests, bytes);
            bundle.ground_truth = truth_from_json(
                Json::parse(std::string(bytes.begin(), bytes.end())));
        }

        for (const auto& nj : manifest.at("nodes")) {
            PanoramaNode node;
            node.id = nj.at("id").get<int>();
            node.position = vec3_from_json(nj.at("position"));
            if (opts.load_views && digests.count(depth_rel(node.id, 0))) {
                node.views.reserve(kViewsPerNode);
                for (int k = 0; k < kViewsPerNode; ++k) {
                    const auto depth_bytes = read_bytes(dir / depth_rel(node.id, k));
                    const auto probs_bytes = read_bytes(dir / probs_rel(node.id, k));
                    if (opts.verify) {
                        verify_file(dir, depth_rel(node.id, k), digests, depth_bytes);
                        verify_file(dir, probs_rel(node.id, k), digests, probs_bytes);
                    }
                    std::vector<uint8_t> inst_bytes;
                    const bool has_inst = digests.count(inst_rel(node.id, k)) ||
                                          fs::exists(dir / inst_rel(node.id, k));
                    if (has_inst) {
                        inst_bytes = read_bytes(dir / inst_rel(node.id, k));
                        if (opts.verify) verify_file(dir, inst_rel(node.id, k), digests, inst_bytes);
                    }
                    node.views.push_back(decode_view(bundle, node.position, k, depth_bytes,
                                                     probs_bytes,
                                                     has_inst ? &inst_bytes : nullptr));
                }
            }
            bundle.nodes.push_back(std::move(node));
        }
    } catch (const BundleError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw BundleError(BundleError::Kind::Parse,
                          "malformed manifest " + mpath.string() + ": " + e.what());
    }
    return bundle;
}

ViewObservation load_view(const fs::path& bundle_dir, const SceneBundle& bundle, int node_id,
                          int view_index, bool verify) {
    const PanoramaNode* node = bundle.find_node(node_id);
    if (!node) throw InvalidArgument("load_view: unknown node id");
    const auto depth_bytes = read_bytes(bundle_dir / depth_rel(node_id, view_index));
    const auto probs_bytes = read_bytes(bundle_dir / probs_rel(node_id, view_index));
    std::vector<uint8_t> inst_bytes;
    const bool has_inst = fs::exists(bundle_dir / inst_rel(node_id, view_index));
    if (has_inst) inst_bytes = read_bytes(bundle_dir / inst_rel(node_id, view_index));
    if (verify) {
        const Json manifest = read_json_file(bundle_dir / "manifest.json");
        std::map<std::string, std::string> digests;
        for (const auto& [rel, sha] : manifest.at("files").items())
            digests[rel] = sha.get<std::string>();
        verify_file(bundle_dir, depth_rel(node_id, view_index), digests, depth_bytes);
        verify_file(bundle_dir, probs_rel(node_id, view_index), digests, probs_bytes);
        if (has_inst) verify_file(bundle_dir, inst_rel(node_id, view_index), digests, inst_bytes);
    }
    return decode_view(bundle, node->position, view_index, depth_bytes, probs_bytes,
                       has_inst ? &inst_bytes : nullptr);
}

}  // namespace vlnforge

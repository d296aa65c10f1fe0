#include "vlnforge/render.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "vlnforge/bundle_io.hpp"
#include "vlnforge/vocab.hpp"

namespace vlnforge {

namespace {

constexpr double kPlateThickness = 0.1;
constexpr double kRayEps = 1e-9;

}  // namespace

RenderScene::RenderScene(const SceneTruth& truth, const std::vector<std::string>& vocabulary) {
    num_classes_ = int(vocabulary.size());
    const int wall_cls = class_index(vocabulary, "wall");
    const int floor_cls = class_index(vocabulary, "floor");
    const int ceiling_cls = class_index(vocabulary, "ceiling");
    if (wall_cls < 0 || floor_cls < 0 || ceiling_cls < 0)
        throw InvalidArgument("vocabulary lacks structural classes");

    for (double h : truth.floor_heights) {
        RenderEntity floor;
        floor.box = {{truth.building_x0, truth.building_y0, h - kPlateThickness},
                     {truth.building_x1, truth.building_y1, h}};
        floor.cls = uint16_t(floor_cls);
        entities_.push_back(floor);
        RenderEntity ceiling;
        ceiling.box = {{truth.building_x0, truth.building_y0, h + truth.wall_height},
                       {truth.building_x1, truth.building_y1,
                        h + truth.wall_height + kPlateThickness}};
        ceiling.cls = uint16_t(ceiling_cls);
        entities_.push_back(ceiling);
    }
    for (const auto& w : truth.walls) {
        RenderEntity e;
        e.box = w;
        e.cls = uint16_t(wall_cls);
        entities_.push_back(e);
    }
    for (const auto& o : truth.objects) {
        RenderEntity e;
        e.box = o.box();
        e.cls = o.cls;
        e.truth_object = o.id;
        entities_.push_back(e);
    }
}

RayHit RenderScene::cast_ray(const Vec3& origin, const Vec3& dir, double t_max) const {
    RayHit best{t_max, -1};
    for (size_t i = 0; i < entities_.size(); ++i) {
        const Aabb& b = entities_[i].box;
        double t0 = kRayEps;
        double t1 = best.t;
        bool miss = false;
        const double o[3] = {origin.x, origin.y, origin.z};
        const double d[3] = {dir.x, dir.y, dir.z};
        const double lo[3] = {b.lo.x, b.lo.y, b.lo.z};
        const double hi[3] = {b.hi.x, b.hi.y, b.hi.z};
        for (int a = 0; a < 3 && !miss; ++a) {
            if (d[a] == 0.0) {
                if (o[a] < lo[a] || o[a] > hi[a]) miss = true;
            } else {
                const double inv = 1.0 / d[a];
                double ta = (lo[a] - o[a]) * inv;
                double tb = (hi[a] - o[a]) * inv;
                if (ta > tb) std::swap(ta, tb);
                t0 = std::max(t0, ta);
                t1 = std::min(t1, tb);
                if (t0 > t1) miss = true;
            }
        }
        if (miss) continue;
        // entered the box at t0; a camera inside sees the exit face
        const double t_hit = t0 > kRayEps ? t0 : t1;
        if (t_hit > kRayEps && t_hit < best.t) {
            best.t = t_hit;
            best.entity = int(i);
        }
    }
    if (best.entity < 0) best.t = t_max;
    return best;
}

RenderedView render_view(const RenderScene& scene, const Pose& pose,
                         const CameraIntrinsics& intrinsics, double max_depth, int topk,
                         const NoiseSpec& noise, Rng& rng) {
    noise.check(scene.num_classes());
    RenderedView out;
    ViewObservation& view = out.view;
    view.pose = pose;
    view.intrinsics = intrinsics;
    view.num_classes = scene.num_classes();
    view.topk = topk;
    view.max_depth = float(max_depth);

    const int w = intrinsics.width;
    const int h = intrinsics.height;
    const size_t npix = size_t(w) * h;
    view.depth.resize(npix);
    view.prob_class.assign(npix * size_t(topk), 0);
    view.prob_q.assign(npix * size_t(topk), 0);
    view.instances.assign(npix, kNoInstance);

    std::vector<int> entity_at(npix, -1);
    for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
            const size_t pix = size_t(v) * w + u;
            const Vec3 dir = pixel_ray(u, v, intrinsics, pose);
            const RayHit hit = scene.cast_ray(pose.position, dir, max_depth);
            view.depth[pix] = float(hit.t);
            entity_at[pix] = hit.entity;
        }
    }

    // local 2D instance ids for thing surfaces, in first-pixel order
    std::map<int, uint16_t> entity_local;
    out.instance_to_object.push_back(-1);  // local id 0 unused
    for (size_t pix = 0; pix < npix; ++pix) {
        const int e = entity_at[pix];
        if (e < 0) continue;
        const RenderEntity& ent = scene.entities()[size_t(e)];
        if (ent.truth_object < 0) continue;
        auto it = entity_local.find(e);
        if (it == entity_local.end()) {
            const uint16_t local = uint16_t(out.instance_to_object.size());
            it = entity_local.emplace(e, local).first;
            out.instance_to_object.push_back(ent.truth_object);
        }
        view.instances[pix] = it->second;
    }

    // entity-level label corruption, one draw per visible entity
    std::vector<int> visible;
    for (size_t pix = 0; pix < npix; ++pix)
        if (entity_at[pix] >= 0) visible.push_back(entity_at[pix]);
    std::sort(visible.begin(), visible.end());
    visible.erase(std::unique(visible.begin(), visible.end()), visible.end());
    std::map<int, uint16_t> corrupted;
    for (int e : visible) {
        const uint16_t cls = scene.entities()[size_t(e)].cls;
        corrupted[e] = noise.corrupt_class(cls, rng);
    }

    std::vector<uint16_t> label(npix, uint16_t(kVoidClass));
    for (size_t pix = 0; pix < npix; ++pix)
        if (entity_at[pix] >= 0) label[pix] = corrupted[entity_at[pix]];

    if (noise.boundary_jitter > 0) {
        const int j = noise.boundary_jitter;
        std::vector<uint16_t> jl(label);
        std::vector<uint16_t> ji(view.instances);
        for (int v = 0; v < h; ++v) {
            for (int u = 0; u < w; ++u) {
                const int du = rng.uniform_int(-j, j);
                const int dv = rng.uniform_int(-j, j);
                const int su = std::clamp(u + du, 0, w - 1);
                const int sv = std::clamp(v + dv, 0, h - 1);
                const size_t src = size_t(sv) * w + su;
                const size_t pix = size_t(v) * w + u;
                jl[pix] = label[src];
                ji[pix] = view.instances[src];
            }
        }
        label.swap(jl);
        view.instances.swap(ji);
    }

    const double uniform_p = 1.0 / double(scene.num_classes());
    for (size_t pix = 0; pix < npix; ++pix) {
        if (noise.dropout > 0.0 && rng.bernoulli(noise.dropout)) {
            std::vector<std::pair<uint16_t, double>> probs;
            probs.reserve(size_t(scene.num_classes()));
            for (int c = 0; c < scene.num_classes(); ++c)
                probs.emplace_back(uint16_t(c), uniform_p);
            view.set_probs(pix, quantize_probs(std::move(probs), topk));
        } else {
            view.prob_class[pix * size_t(topk)] = label[pix];
            view.prob_q[pix * size_t(topk)] = 65535;
        }
    }
    return out;
}

PanoramaNode build_panorama(const RenderScene& scene, int node_id, const Vec3& position,
                            const ViewConfig& cfg, double max_depth, int topk,
                            const NoiseSpec& noise, uint64_t render_seed) {
    PanoramaNode node;
    node.id = node_id;
    node.position = position;
    node.views.reserve(kViewsPerNode);
    const CameraIntrinsics intr = cfg.intrinsics();
    for (int k = 0; k < kViewsPerNode; ++k) {
        Rng rng(view_seed(render_seed, uint64_t(node_id), uint64_t(k)));
        const Pose pose = Pose::at(position, view_heading(k), view_elevation(k));
        node.views.push_back(render_view(scene, pose, intr, max_depth, topk, noise, rng).view);
    }
    return node;
}

std::vector<PanoramaNode> build_panoramas(const RenderScene& scene,
                                          const NavigabilityField& field,
                                          const std::vector<Vec3>& positions,
                                          const ViewConfig& cfg, double max_depth, int topk,
                                          const NoiseSpec& noise, uint64_t render_seed) {
    for (size_t i = 0; i < positions.size(); ++i) {
        const CellRef cell = field.locate(positions[i]);
        if (!field.floors[size_t(cell.floor)].is_navigable(cell.ix, cell.iy))
            throw PlacementError("panorama position " + std::to_string(i) +
                                 " is not on a navigable cell");
    }
    std::vector<PanoramaNode> nodes;
    nodes.reserve(positions.size());
    for (size_t i = 0; i < positions.size(); ++i)
        nodes.push_back(
            build_panorama(scene, int(i), positions[i], cfg, max_depth, topk, noise, render_seed));
    return nodes;
}

const PanoramaNode& ViewProvider::panorama(int node_id) {
    auto it = cache_.find(node_id);
    if (it != cache_.end() && !it->second.stripped) return it->second.node;
    Entry entry{materialize(node_id), false};
    return cache_.insert_or_assign(node_id, std::move(entry)).first->second.node;
}

const PanoramaNode& ViewProvider::depth_panorama(int node_id) {
    auto it = cache_.find(node_id);
    if (it != cache_.end()) return it->second.node;
    return panorama(node_id);
}

void ViewProvider::release_probs(int node_id) {
    auto it = cache_.find(node_id);
    if (it == cache_.end()) return;
    for (auto& v : it->second.node.views) {
        v.prob_class.clear();
        v.prob_class.shrink_to_fit();
        v.prob_q.clear();
        v.prob_q.shrink_to_fit();
    }
    it->second.stripped = true;
}

SynthViewProvider::SynthViewProvider(std::shared_ptr<const RenderScene> scene,
                                     const SceneBundle& bundle,
                                     std::vector<std::pair<int, Vec3>> node_positions)
    : scene_(std::move(scene)),
      cfg_(bundle.view),
      max_depth_(bundle.max_depth),
      topk_(bundle.topk),
      noise_(noise_profile(bundle.noise_profile, bundle.num_classes())),
      render_seed_(bundle.render_seed) {
    for (const auto& [id, pos] : node_positions) positions_[id] = pos;
}

PanoramaNode SynthViewProvider::materialize(int node_id) {
    const auto pit = positions_.find(node_id);
    if (pit == positions_.end()) throw InvalidArgument("unknown node id in view provider");

    PanoramaNode node;
    node.id = node_id;
    node.position = pit->second;
    node.views.reserve(kViewsPerNode);
    const CameraIntrinsics intr = cfg_.intrinsics();
    auto& tables = instance_objects_[node_id];
    tables.assign(kViewsPerNode, {});
    for (int k = 0; k < kViewsPerNode; ++k) {
        Rng rng(view_seed(render_seed_, uint64_t(node_id), uint64_t(k)));
        const Pose pose = Pose::at(node.position, view_heading(k), view_elevation(k));
        RenderedView rendered = render_view(*scene_, pose, intr, max_depth_, topk_, noise_, rng);
        tables[size_t(k)] = std::move(rendered.instance_to_object);
        node.views.push_back(std::move(rendered.view));
    }
    return node;
}

const std::vector<int>* SynthViewProvider::instance_objects(int node_id, int view_index) const {
    const auto it = instance_objects_.find(node_id);
    if (it == instance_objects_.end()) return nullptr;
    return &it->second[size_t(view_index)];
}

StoredViewProvider::StoredViewProvider(std::filesystem::path bundle_dir, const SceneBundle& bundle)
    : dir_(std::move(bundle_dir)), bundle_(bundle) {}

PanoramaNode StoredViewProvider::materialize(int node_id) {
    const PanoramaNode* meta = bundle_.find_node(node_id);
    if (!meta) throw InvalidArgument("unknown node id in stored view provider");
    PanoramaNode node;
    node.id = node_id;
    node.position = meta->position;
    if (!meta->views.empty()) {
        node.views = meta->views;
    } else {
        node.views.reserve(kViewsPerNode);
        for (int k = 0; k < kViewsPerNode; ++k)
            node.views.push_back(load_view(dir_, bundle_, node_id, k));
    }
    return node;
}

std::unique_ptr<ViewProvider> make_view_provider(
    const std::filesystem::path& bundle_dir, const SceneBundle& bundle,
    const std::vector<std::pair<int, Vec3>>& node_positions) {
    bool stored = !bundle.nodes.empty();
    for (const auto& [id, pos] : node_positions) {
        const PanoramaNode* n = bundle.find_node(id);
        if (!n || (n->views.empty() &&
                   !std::filesystem::exists(bundle_dir / "nodes" / std::to_string(id) /
                                            "view0.depth"))) {
            stored = false;
            break;
        }
    }
    if (stored) return std::make_unique<StoredViewProvider>(bundle_dir, bundle);
    if (!bundle.ground_truth)
        throw Error("bundle has neither stored views nor ground truth to render from");
    auto scene = std::make_shared<RenderScene>(*bundle.ground_truth, bundle.class_vocabulary);
    return std::make_unique<SynthViewProvider>(std::move(scene), bundle, node_positions);
}

}  // namespace vlnforge

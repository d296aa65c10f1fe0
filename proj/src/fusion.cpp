#include "vlnforge/fusion.hpp"

#include <algorithm>
#include <deque>

#include "vlnforge/json_util.hpp"

namespace vlnforge {

void FusionParams::check() const {
    if (voxel_size <= 0) throw InvalidArgument("fusion: voxel_size must be positive");
    if (connectivity != 6 && connectivity != 18 && connectivity != 26)
        throw InvalidArgument("fusion: connectivity must be 6, 18 or 26");
    if (min_voxels < 1 || stride < 1) throw InvalidArgument("fusion: bad min_voxels/stride");
    if (map_overlap < 0 || map_overlap > 1) throw InvalidArgument("fusion: bad map_overlap");
}

namespace {
constexpr int kBias = 1 << 20;
}

int64_t voxel_key(int ix, int iy, int iz) {
    return (int64_t(ix + kBias) << 42) | (int64_t(iy + kBias) << 21) | int64_t(iz + kBias);
}

void voxel_unpack(int64_t key, int& ix, int& iy, int& iz) {
    ix = int((key >> 42) & 0x1FFFFF) - kBias;
    iy = int((key >> 21) & 0x1FFFFF) - kBias;
    iz = int(key & 0x1FFFFF) - kBias;
}

void SemanticVoxelGrid::Cell::add(uint16_t cls, double mass) {
    for (auto& [c, s] : sums) {
        if (c == cls) {
            s += mass;
            return;
        }
    }
    sums.emplace_back(cls, mass);
}

double SemanticVoxelGrid::Cell::sum_of(uint16_t cls) const {
    for (const auto& [c, s] : sums)
        if (c == cls) return s;
    return 0.0;
}

double SemanticVoxelGrid::Cell::total() const {
    double t = 0.0;
    for (const auto& [c, s] : sums) t += s;
    return t;
}

int64_t SemanticVoxelGrid::key_of(const Vec3& p) const {
    return voxel_key(int(std::floor((p.x - origin.x) / voxel_size)),
                     int(std::floor((p.y - origin.y) / voxel_size)),
                     int(std::floor((p.z - origin.z) / voxel_size)));
}

Vec3 SemanticVoxelGrid::center_of(int64_t key) const {
    int ix, iy, iz;
    voxel_unpack(key, ix, iy, iz);
    return {origin.x + (ix + 0.5) * voxel_size, origin.y + (iy + 0.5) * voxel_size,
            origin.z + (iz + 0.5) * voxel_size};
}

Aabb SemanticVoxelGrid::voxel_box(int64_t key) const {
    int ix, iy, iz;
    voxel_unpack(key, ix, iy, iz);
    return {{origin.x + ix * voxel_size, origin.y + iy * voxel_size,
             origin.z + iz * voxel_size},
            {origin.x + (ix + 1) * voxel_size, origin.y + (iy + 1) * voxel_size,
             origin.z + (iz + 1) * voxel_size}};
}

void accumulate(SemanticVoxelGrid& grid, const LabeledCloud& cloud) {
    if (grid.num_classes == 0) grid.num_classes = cloud.num_classes;
    for (size_t i = 0; i < cloud.size(); ++i) {
        auto& cell = grid.cells[grid.key_of(cloud.points[i])];
        uint32_t qsum = 0;
        const size_t base = i * size_t(cloud.topk);
        for (int k = 0; k < cloud.topk; ++k) {
            const uint16_t q = cloud.prob_q[base + k];
            if (q == 0) continue;
            qsum += q;
            cell.add(cloud.prob_class[base + k], q / 65535.0);
        }
        if (qsum < 65535) cell.add(kVoidClass, (65535 - qsum) / 65535.0);
        cell.count += 1;
    }
}

std::map<int64_t, uint16_t> finalize_labels(const SemanticVoxelGrid& grid) {
    if (grid.cells.empty()) throw InvalidArgument("finalize_labels: empty grid");
    std::map<int64_t, uint16_t> labels;
    for (const auto& [key, cell] : grid.cells) {
        uint16_t best = kVoidClass;
        double best_s = cell.sum_of(kVoidClass);
        for (const auto& [c, s] : cell.sums)
            if (s > best_s || (s == best_s && c < best)) {
                best = c;
                best_s = s;
            }
        if (best != kVoidClass) labels[key] = best;
    }
    return labels;
}

std::string ViewInstanceRef::str() const {
    return std::to_string(node) + "/" + std::to_string(view) + "/" + std::to_string(instance);
}

namespace {

std::vector<int64_t> neighbor_keys(int64_t key, int connectivity) {
    int ix, iy, iz;
    voxel_unpack(key, ix, iy, iz);
    std::vector<int64_t> out;
    out.reserve(size_t(connectivity));
    for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
                if (manhattan == 0) continue;
                if (connectivity == 6 && manhattan > 1) continue;
                if (connectivity == 18 && manhattan > 2) continue;
                out.push_back(voxel_key(ix + dx, iy + dy, iz + dz));
            }
        }
    }
    return out;
}

Object3D make_object(int id, uint16_t cls, std::vector<int64_t> voxels,
                     const SemanticVoxelGrid& grid) {
    std::sort(voxels.begin(), voxels.end());
    Object3D obj;
    obj.id = id;
    obj.cls = cls;
    obj.voxels = std::move(voxels);
    Vec3 lo = grid.voxel_box(obj.voxels.front()).lo;
    Vec3 hi = grid.voxel_box(obj.voxels.front()).hi;
    Vec3 csum{0, 0, 0};
    for (int64_t key : obj.voxels) {
        const Aabb b = grid.voxel_box(key);
        lo = {std::min(lo.x, b.lo.x), std::min(lo.y, b.lo.y), std::min(lo.z, b.lo.z)};
        hi = {std::max(hi.x, b.hi.x), std::max(hi.y, b.hi.y), std::max(hi.z, b.hi.z)};
        csum += grid.center_of(key);
    }
    obj.center = (lo + hi) * 0.5;
    obj.extent = hi - lo;
    obj.centroid = csum * (1.0 / double(obj.voxels.size()));
    return obj;
}

}  // namespace

std::vector<Object3D> extract_instances(const std::map<int64_t, uint16_t>& labels,
                                        const SemanticVoxelGrid& grid,
                                        const FusionParams& params) {
    params.check();
    std::vector<Object3D> objects;
    std::unordered_map<int64_t, bool> visited;
    visited.reserve(labels.size());
    for (const auto& [seed_key, cls] : labels) {
        if (visited[seed_key]) continue;
        visited[seed_key] = true;
        if (std::find(params.stuff_classes.begin(), params.stuff_classes.end(), cls) !=
            params.stuff_classes.end())
            continue;
        std::vector<int64_t> component{seed_key};
        std::deque<int64_t> frontier{seed_key};
        while (!frontier.empty()) {
            const int64_t key = frontier.front();
            frontier.pop_front();
            for (int64_t nk : neighbor_keys(key, params.connectivity)) {
                const auto it = labels.find(nk);
                if (it == labels.end() || it->second != cls) continue;
                if (visited[nk]) continue;
                visited[nk] = true;
                component.push_back(nk);
                frontier.push_back(nk);
            }
        }
        if (int(component.size()) < params.min_voxels) continue;
        objects.push_back(make_object(int(objects.size()), cls, std::move(component), grid));
    }
    return objects;
}

std::vector<Object3D> single_view_objects(const ViewObservation& view, int node_id, int view_index,
                                          const FusionParams& params) {
    params.check();
    std::vector<Object3D> out;
    if (!view.has_instances()) return out;
    const LabeledCloud cloud = lift_view(view, params.stride);
    SemanticVoxelGrid grid;
    grid.voxel_size = params.voxel_size;
    grid.num_classes = view.num_classes;

    // group lifted points by 2D instance
    std::map<uint16_t, std::vector<size_t>> by_instance;
    for (size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.instance[i] == kNoInstance) continue;
        by_instance[cloud.instance[i]].push_back(i);
    }
    for (const auto& [inst, points] : by_instance) {
        std::vector<int64_t> voxels;
        std::vector<double> class_mass(size_t(view.num_classes), 0.0);
        for (size_t i : points) {
            voxels.push_back(grid.key_of(cloud.points[i]));
            const size_t base = i * size_t(cloud.topk);
            uint32_t qsum = 0;
            for (int k = 0; k < cloud.topk; ++k) {
                const uint16_t q = cloud.prob_q[base + k];
                if (q == 0) continue;
                qsum += q;
                class_mass[cloud.prob_class[base + k]] += q / 65535.0;
            }
            class_mass[kVoidClass] += (65535 - qsum) / 65535.0;
        }
        std::sort(voxels.begin(), voxels.end());
        voxels.erase(std::unique(voxels.begin(), voxels.end()), voxels.end());
        if (int(voxels.size()) < params.min_voxels) continue;
        uint16_t best = 0;
        for (uint16_t c = 1; c < uint16_t(view.num_classes); ++c)
            if (class_mass[c] > class_mass[best]) best = c;
        if (best == kVoidClass) continue;
        if (std::find(params.stuff_classes.begin(), params.stuff_classes.end(), best) !=
            params.stuff_classes.end())
            continue;
        Object3D obj = make_object(int(out.size()), best, std::move(voxels), grid);
        obj.support[{node_id, view_index, inst}] = int(points.size());
        out.push_back(std::move(obj));
    }
    return out;
}

FusionResult fuse_scene(ViewProvider& provider, const std::vector<int>& node_ids, int num_classes,
                        const FusionParams& params, bool release_probs) {
    params.check();
    FusionResult result;
    SemanticVoxelGrid grid;
    grid.voxel_size = params.voxel_size;
    grid.num_classes = num_classes;

    // voxel point-counts per 2D instance, needed for the association pass
    std::map<ViewInstanceRef, std::unordered_map<int64_t, int>> instance_voxels;
    for (int node : node_ids) {
        const PanoramaNode& pano = provider.panorama(node);
        for (int k = 0; k < int(pano.views.size()); ++k) {
            const LabeledCloud cloud = lift_view(pano.views[size_t(k)], params.stride);
            accumulate(grid, cloud);
            for (size_t i = 0; i < cloud.size(); ++i) {
                if (cloud.instance[i] == kNoInstance) continue;
                instance_voxels[{node, k, cloud.instance[i]}][grid.key_of(cloud.points[i])] += 1;
            }
        }
        if (release_probs) provider.release_probs(node);
    }
    if (grid.cells.empty()) return result;

    result.voxel_labels = finalize_labels(grid);
    result.objects = extract_instances(result.voxel_labels, grid, params);
    for (const auto& obj : result.objects)
        for (int64_t key : obj.voxels) result.voxel_owner[key] = obj.id;

    for (const auto& [ref, voxel_counts] : instance_voxels) {
        std::map<int, int> owner_counts;
        int total = 0;
        for (const auto& [key, n] : voxel_counts) {
            total += n;
            const auto it = result.voxel_owner.find(key);
            if (it != result.voxel_owner.end()) owner_counts[it->second] += n;
        }
        if (total == 0) continue;
        int best_owner = -1, best_count = 0;
        for (const auto& [owner, n] : owner_counts)
            if (n > best_count) {
                best_owner = owner;
                best_count = n;
            }
        if (best_owner < 0) continue;
        if (double(best_count) / double(total) < params.map_overlap) continue;
        result.view_map[ref] = best_owner;
        result.objects[size_t(best_owner)].support[ref] = best_count;
    }
    return result;
}

std::vector<Object3D> single_view_scene(ViewProvider& provider, const std::vector<int>& node_ids,
                                        const FusionParams& params, bool release_probs) {
    std::vector<Object3D> all;
    for (int node : node_ids) {
        const PanoramaNode& pano = provider.panorama(node);
        for (int k = 0; k < int(pano.views.size()); ++k) {
            auto objs = single_view_objects(pano.views[size_t(k)], node, k, params);
            for (auto& o : objs) {
                o.id = int(all.size());
                all.push_back(std::move(o));
            }
        }
        if (release_probs) provider.release_probs(node);
    }
    return all;
}

LabelAccuracy label_accuracy(const std::vector<Object3D>& objects, const SceneTruth& truth) {
    LabelAccuracy out;
    out.total = int(objects.size());
    if (objects.empty()) {
        out.undefined = true;
        return out;
    }
    int correct = 0;
    for (const auto& obj : objects) {
        double best_iou = 0.0;
        const ObjectTruth* best = nullptr;
        for (const auto& t : truth.objects) {
            const double v = iou(obj.box(), t.box());
            if (v > best_iou) {
                best_iou = v;
                best = &t;
            }
        }
        if (!best || best_iou < 0.1) continue;
        ++out.matched;
        if (best->cls == obj.cls) ++correct;
    }
    if (out.matched == 0) {
        out.undefined = true;
        return out;
    }
    out.accuracy = double(correct) / double(out.matched);
    return out;
}

Json objects_to_json(const FusionResult& result, const std::vector<std::string>& vocab) {
    Json j;
    Json objs = Json::array();
    for (const auto& o : result.objects)
        objs.push_back({{"id", o.id},
                        {"class", o.cls},
                        {"class_name", vocab[o.cls]},
                        {"center", vec3_to_json(o.center)},
                        {"extent", vec3_to_json(o.extent)},
                        {"centroid", vec3_to_json(o.centroid)},
                        {"n_voxels", o.voxels.size()}});
    j["objects"] = objs;
    Json vm = Json::object();
    for (const auto& [ref, id] : result.view_map) vm[ref.str()] = id;
    j["view_map"] = vm;
    return j;
}

}  // namespace vlnforge

#include "vlnforge/synth.hpp"

#include <algorithm>
#include <cmath>

#include "vlnforge/rng.hpp"
#include "vlnforge/vocab.hpp"

namespace vlnforge {

namespace {

struct DoorCut {
    int wall_index;   // index into wall segment list
    double lo, hi;    // interval along the wall's long axis
};

struct WallSegment {
    bool vertical;           // boundary along x = pos (vertical) or y = pos
    double pos;              // boundary coordinate
    double lo, hi;           // extent along the boundary
    int room_a, room_b;      // adjacent rooms (-1 for outer)
    std::vector<std::pair<double, double>> doors;
};

struct RectXY {
    double x0, y0, x1, y1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
};

std::vector<double> jittered_boundaries(double lo, double hi, int n, double jitter_frac,
                                        Rng& rng) {
    std::vector<double> b(size_t(n) + 1);
    const double pitch = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
        b[size_t(i)] = lo + i * pitch;
        if (i > 0 && i < n) b[size_t(i)] += rng.uniform_double(-jitter_frac, jitter_frac) * pitch;
    }
    return b;
}

bool footprint_intersects(const Aabb& a, const Aabb& b, double gap) {
    return a.lo.x - gap < b.hi.x && a.hi.x + gap > b.lo.x && a.lo.y - gap < b.hi.y &&
           a.hi.y + gap > b.lo.y && a.lo.z - gap < b.hi.z && a.hi.z + gap > b.lo.z;
}

}  // namespace

void SynthParams::check() const {
    auto range_ok = [](int lo, int hi) { return lo >= 0 && lo <= hi; };
    if (!range_ok(min_floors, max_floors) || min_floors < 1)
        throw InvalidArgument("synth: bad floor range");
    if (!range_ok(min_rooms, max_rooms) || min_rooms < 1)
        throw InvalidArgument("synth: bad room range");
    if (!range_ok(min_objects_per_room, max_objects_per_room))
        throw InvalidArgument("synth: bad object range");
    if (min_room_dim < 1.5) throw InvalidArgument("synth: min_room_dim too small");
    if (cell <= 0 || camera_height <= 0 || agent_radius < 0)
        throw InvalidArgument("synth: bad grid parameters");
    if (door_width <= 2 * agent_radius) throw InvalidArgument("synth: door narrower than agent");
}

SceneBundle generate_scene(uint64_t seed, const SynthParams& params, const std::string& scene_id) {
    params.check();
    Rng rng(stage_seed(seed, seed_tag::kSynth));

    SceneBundle bundle;
    bundle.scene_id = scene_id.empty() ? "scene_" + std::to_string(seed) : scene_id;
    bundle.class_vocabulary = default_class_vocabulary();
    bundle.view = params.view;
    bundle.max_depth = params.max_depth;
    bundle.topk = params.topk;
    bundle.agent_radius = params.agent_radius;
    bundle.noise_profile = params.noise_profile;
    bundle.render_seed = stage_seed(seed, seed_tag::kRender);
    bundle.field.camera_height = params.camera_height;

    SceneTruth truth;
    truth.wall_height = params.wall_height;

    const int n_floors = rng.uniform_int(params.min_floors, params.max_floors);
    const double story = params.wall_height + 0.4;

    // identical room-count target on every floor keeps the layout pass simple
    const int n_rooms = rng.uniform_int(params.min_rooms, params.max_rooms);
    const int cols = int(std::ceil(std::sqrt(double(n_rooms))));
    const int rows = (n_rooms + cols - 1) / cols;
    const double pitch = rng.uniform_double(params.min_room_dim + 1.2, params.min_room_dim + 2.2);
    const double bw = cols * pitch;
    const double bh = rows * pitch;
    if (bw > params.max_building_dim || bh > params.max_building_dim)
        throw GenerationError("rooms cannot fit within the building size limit");

    truth.building_x0 = 0.0;
    truth.building_y0 = 0.0;
    truth.building_x1 = bw;
    truth.building_y1 = bh;

    const auto& vocab = bundle.class_vocabulary;
    const auto& stuff = default_stuff_classes();
    std::vector<uint16_t> thing_classes;
    for (uint16_t c = 0; c < uint16_t(vocab.size()); ++c) {
        if (std::find(stuff.begin(), stuff.end(), c) != stuff.end()) continue;
        if (vocab[c] == "door") continue;  // doors are wall openings here
        thing_classes.push_back(c);
        // wall-mounted things stay visible from farther away; bias toward them
        if (size_prior(vocab[c]).mount == SizePrior::Mount::Wall) thing_classes.push_back(c);
    }

    int next_object_id = 0;
    for (int floor = 0; floor < n_floors; ++floor) {
        const double fz = floor * story;
        truth.floor_heights.push_back(fz);

        // room grid with jittered boundaries; the last row may have
        // fewer, wider rooms
        const auto ys = jittered_boundaries(0.0, bh, rows, 0.1, rng);
        std::vector<std::vector<double>> row_xs;
        std::vector<RectXY> rects;
        std::vector<int> room_of_rect;
        for (int r = 0; r < rows; ++r) {
            const int row_cols = (r == rows - 1) ? n_rooms - cols * (rows - 1) : cols;
            row_xs.push_back(jittered_boundaries(0.0, bw, row_cols, 0.1, rng));
            for (int c = 0; c < row_cols; ++c) {
                RoomTruth room;
                room.id = int(truth.rooms.size());
                room.floor = floor;
                room.x0 = row_xs[size_t(r)][size_t(c)];
                room.x1 = row_xs[size_t(r)][size_t(c) + 1];
                room.y0 = ys[size_t(r)];
                room.y1 = ys[size_t(r) + 1];
                room.type = room_types()[rng.uniform_u64(room_types().size())];
                truth.rooms.push_back(room);
                rects.push_back({room.x0, room.y0, room.x1, room.y1});
                room_of_rect.push_back(room.id);
            }
        }
        const int first_room = room_of_rect.front();

        // boundary segments between adjacent rooms, plus outer walls
        std::vector<WallSegment> segments;
        const double t2 = params.wall_thickness / 2.0;
        segments.push_back({true, 0.0, 0.0, bh, -1, -1, {}});
        segments.push_back({true, bw, 0.0, bh, -1, -1, {}});
        segments.push_back({false, 0.0, 0.0, bw, -1, -1, {}});
        segments.push_back({false, bh, 0.0, bw, -1, -1, {}});
        for (size_t a = 0; a < rects.size(); ++a) {
            for (size_t b = a + 1; b < rects.size(); ++b) {
                const RectXY& ra = rects[a];
                const RectXY& rb = rects[b];
                if (std::abs(ra.x1 - rb.x0) < 1e-9) {  // b right of a
                    const double lo = std::max(ra.y0, rb.y0);
                    const double hi = std::min(ra.y1, rb.y1);
                    if (hi - lo > 0.3)
                        segments.push_back({true, ra.x1, lo, hi, room_of_rect[a], room_of_rect[b], {}});
                } else if (std::abs(ra.y1 - rb.y0) < 1e-9) {  // b above a
                    const double lo = std::max(ra.x0, rb.x0);
                    const double hi = std::min(ra.x1, rb.x1);
                    if (hi - lo > 0.3)
                        segments.push_back({false, ra.y1, lo, hi, room_of_rect[a], room_of_rect[b], {}});
                }
            }
        }

        // some boundaries are fully open (no wall), the rest get doors:
        // a spanning tree over room adjacency plus extras at random
        std::vector<bool> reached(rects.size(), false);
        reached[0] = true;
        size_t n_reached = 1;
        std::vector<size_t> door_feasible;
        std::vector<bool> open_segment(segments.size(), false);
        for (size_t s = 4; s < segments.size(); ++s) {
            if (rng.bernoulli(params.open_boundary_prob)) {
                open_segment[s] = true;
                continue;
            }
            if (segments[s].hi - segments[s].lo >= params.door_width + 0.4)
                door_feasible.push_back(s);
        }
        // open boundaries connect their rooms outright
        for (bool changed = true; changed;) {
            changed = false;
            for (size_t s = 4; s < segments.size(); ++s) {
                if (!open_segment[s]) continue;
                const size_t ia = size_t(segments[s].room_a - first_room);
                const size_t ib = size_t(segments[s].room_b - first_room);
                if (reached[ia] != reached[ib]) {
                    reached[ia] = reached[ib] = true;
                    ++n_reached;
                    changed = true;
                }
            }
        }
        while (n_reached < rects.size()) {
            bool progress = false;
            for (size_t s : door_feasible) {
                auto& seg = segments[s];
                const size_t ia = size_t(seg.room_a - first_room);
                const size_t ib = size_t(seg.room_b - first_room);
                if (reached[ia] == reached[ib]) continue;
                const double margin = params.door_width / 2.0 + 0.2;
                const double center = rng.uniform_double(seg.lo + margin, seg.hi - margin);
                seg.doors.emplace_back(center - params.door_width / 2.0,
                                       center + params.door_width / 2.0);
                reached[ia] = reached[ib] = true;
                ++n_reached;
                progress = true;
            }
            if (!progress) {
                // no door fits on any frontier boundary; open one instead
                bool opened = false;
                for (size_t s = 4; s < segments.size() && !opened; ++s) {
                    const auto& seg = segments[s];
                    const size_t ia = size_t(seg.room_a - first_room);
                    const size_t ib = size_t(seg.room_b - first_room);
                    if (reached[ia] == reached[ib]) continue;
                    open_segment[s] = true;
                    reached[ia] = reached[ib] = true;
                    ++n_reached;
                    opened = true;
                }
                if (!opened) throw GenerationError("room adjacency graph is not connectable");
            }
        }
        for (size_t s : door_feasible) {
            auto& seg = segments[s];
            if (!seg.doors.empty() || !rng.bernoulli(params.extra_door_prob)) continue;
            const double margin = params.door_width / 2.0 + 0.2;
            const double center = rng.uniform_double(seg.lo + margin, seg.hi - margin);
            seg.doors.emplace_back(center - params.door_width / 2.0,
                                   center + params.door_width / 2.0);
        }

        // emit wall slabs with door gaps and lintels
        std::vector<Aabb> door_zones;  // keep-clear rectangles on the floor
        for (size_t si = 0; si < segments.size(); ++si) {
            if (open_segment[si]) continue;
            const auto& seg = segments[si];
            auto emit = [&](double lo, double hi, double z0, double z1) {
                if (hi - lo < 1e-6) return;
                if (seg.vertical)
                    truth.walls.push_back({{seg.pos - t2, lo, z0}, {seg.pos + t2, hi, z1}});
                else
                    truth.walls.push_back({{lo, seg.pos - t2, z0}, {hi, seg.pos + t2, z1}});
            };
            std::vector<std::pair<double, double>> doors = seg.doors;
            std::sort(doors.begin(), doors.end());
            double cursor = seg.lo;
            for (const auto& [dlo, dhi] : doors) {
                emit(cursor, dlo, fz, fz + params.wall_height);
                emit(dlo, dhi, fz + params.door_height, fz + params.wall_height);  // lintel
                if (seg.vertical)
                    door_zones.push_back({{seg.pos - 0.7, dlo - 0.2, fz},
                                          {seg.pos + 0.7, dhi + 0.2, fz + 1.0}});
                else
                    door_zones.push_back({{dlo - 0.2, seg.pos - 0.7, fz},
                                          {dhi + 0.2, seg.pos + 0.7, fz + 1.0}});
                cursor = dhi;
            }
            emit(cursor, seg.hi, fz, fz + params.wall_height);
        }

        // objects
        std::vector<Aabb> placed_boxes;
        for (size_t rect_i = 0; rect_i < rects.size(); ++rect_i) {
            const RoomTruth& room = truth.rooms[size_t(room_of_rect[rect_i])];
            const int target =
                rng.uniform_int(params.min_objects_per_room, params.max_objects_per_room);
            int placed = 0;
            int attempts = 0;
            while (placed < target && attempts < 60 * std::max(target, 1)) {
                ++attempts;
                const uint16_t cls = thing_classes[rng.uniform_u64(thing_classes.size())];
                const SizePrior& prior = size_prior(vocab[cls]);
                Vec3 extent;
                Vec3 center;
                const double inner_margin = t2 + 0.05;
                if (prior.mount == SizePrior::Mount::Wall) {
                    const double width = rng.uniform_double(prior.min_xy, prior.max_xy);
                    const double height = rng.uniform_double(prior.min_z, prior.max_z);
                    const double depth = rng.uniform_double(0.12, 0.2);
                    const double zc = fz + rng.uniform_double(
                        1.0, std::min(1.6, params.wall_height - 0.2 - height / 2.0));
                    const int side = rng.uniform_int(0, 3);
                    if (side == 0 || side == 1) {  // west/east wall
                        const double y =
                            rng.uniform_double(room.y0 + 0.3 + width / 2.0,
                                               room.y1 - 0.3 - width / 2.0);
                        const double x = side == 0 ? room.x0 + inner_margin + depth / 2.0
                                                   : room.x1 - inner_margin - depth / 2.0;
                        extent = {depth, width, height};
                        center = {x, y, zc};
                    } else {  // south/north wall
                        const double x =
                            rng.uniform_double(room.x0 + 0.3 + width / 2.0,
                                               room.x1 - 0.3 - width / 2.0);
                        const double y = side == 2 ? room.y0 + inner_margin + depth / 2.0
                                                   : room.y1 - inner_margin - depth / 2.0;
                        extent = {width, depth, height};
                        center = {x, y, zc};
                    }
                } else if (prior.mount == SizePrior::Mount::Ceiling) {
                    const double ex = rng.uniform_double(prior.min_xy, prior.max_xy);
                    const double ey = rng.uniform_double(prior.min_xy, prior.max_xy);
                    const double ez = rng.uniform_double(prior.min_z, prior.max_z);
                    extent = {ex, ey, ez};
                    center = {rng.uniform_double(room.x0 + 0.5 + ex / 2.0, room.x1 - 0.5 - ex / 2.0),
                              rng.uniform_double(room.y0 + 0.5 + ey / 2.0, room.y1 - 0.5 - ey / 2.0),
                              fz + params.wall_height - 0.05 - ez / 2.0};
                } else {
                    const double ex = rng.uniform_double(prior.min_xy, prior.max_xy);
                    const double ey = rng.uniform_double(prior.min_xy, prior.max_xy);
                    const double ez = rng.uniform_double(prior.min_z, prior.max_z);
                    const double mx = inner_margin + 0.15 + ex / 2.0;
                    const double my = inner_margin + 0.15 + ey / 2.0;
                    if (room.x1 - room.x0 < 2 * mx + 0.2 || room.y1 - room.y0 < 2 * my + 0.2)
                        continue;
                    extent = {ex, ey, ez};
                    center = {rng.uniform_double(room.x0 + mx, room.x1 - mx),
                              rng.uniform_double(room.y0 + my, room.y1 - my), fz + ez / 2.0};
                }
                const Aabb box = Aabb::from_center_extent(center, extent);
                bool ok = center.x >= room.x0 && center.x <= room.x1 && center.y >= room.y0 &&
                          center.y <= room.y1;
                for (const auto& other : placed_boxes)
                    if (footprint_intersects(box, other, params.object_gap)) ok = false;
                if (ok) {
                    for (const auto& z : door_zones)
                        if (footprint_intersects(box, z, 0.0)) ok = false;
                }
                if (!ok) continue;
                placed_boxes.push_back(box);
                ObjectTruth obj;
                obj.id = next_object_id++;
                obj.cls = cls;
                obj.room = room.id;
                obj.center = center;
                obj.extent = extent;
                truth.objects.push_back(obj);
                ++placed;
            }
            if (placed < params.min_objects_per_room)
                throw GenerationError("could not place the requested objects in room " +
                                      std::to_string(room.id));
        }
    }

    // navigability: room interiors minus inflated walls and blocking objects
    const double inflate = params.agent_radius;
    for (int floor = 0; floor < n_floors; ++floor) {
        const double fz = truth.floor_heights[size_t(floor)];
        FloorGrid grid;
        grid.height = fz;
        grid.cell = params.cell;
        grid.origin_x = truth.building_x0;
        grid.origin_y = truth.building_y0;
        grid.nx = int(std::ceil((truth.building_x1 - truth.building_x0) / params.cell));
        grid.ny = int(std::ceil((truth.building_y1 - truth.building_y0) / params.cell));
        grid.navigable.assign(size_t(grid.nx) * grid.ny, 0);
        const double z_lo = fz;
        const double z_hi = fz + 1.5;  // anything below head height blocks
        for (int iy = 0; iy < grid.ny; ++iy) {
            for (int ix = 0; ix < grid.nx; ++ix) {
                const double x = grid.cell_x(ix);
                const double y = grid.cell_y(iy);
                bool inside = false;
                for (const auto& room : truth.rooms)
                    if (room.floor == floor && room.contains_xy(x, y)) inside = true;
                if (!inside) continue;
                bool blocked = false;
                for (const auto& w : truth.walls) {
                    if (w.lo.z >= z_hi || w.hi.z <= z_lo) continue;
                    if (x > w.lo.x - inflate && x < w.hi.x + inflate && y > w.lo.y - inflate &&
                        y < w.hi.y + inflate) {
                        blocked = true;
                        break;
                    }
                }
                if (!blocked) {
                    for (const auto& o : truth.objects) {
                        const Aabb b = o.box();
                        if (b.lo.z >= z_hi || b.hi.z <= z_lo) continue;
                        if (x > b.lo.x - inflate && x < b.hi.x + inflate &&
                            y > b.lo.y - inflate && y < b.hi.y + inflate) {
                            blocked = true;
                            break;
                        }
                    }
                }
                if (!blocked) grid.set_navigable(ix, iy, true);
            }
        }
        if (grid.navigable_count() == 0)
            throw GenerationError("floor has no navigable cells");
        bundle.field.floors.push_back(std::move(grid));
    }

    truth.check();
    bundle.ground_truth = std::move(truth);
    bundle.check();
    return bundle;
}

}  // namespace vlnforge

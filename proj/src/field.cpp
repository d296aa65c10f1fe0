#include "vlnforge/field.hpp"

#include <algorithm>
#include <limits>

namespace vlnforge {

size_t FloorGrid::navigable_count() const {
    size_t n = 0;
    for (uint8_t v : navigable) n += v != 0;
    return n;
}

size_t NavigabilityField::navigable_count() const {
    size_t n = 0;
    for (const auto& f : floors) n += f.navigable_count();
    return n;
}

int NavigabilityField::floor_of(double z) const {
    if (floors.empty()) throw DomainError("field has no floors");
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < floors.size(); ++i) {
        const double d = std::abs(z - (floors[i].height + camera_height));
        if (d < best_d) {
            best_d = d;
            best = int(i);
        }
    }
    return best;
}

CellRef NavigabilityField::locate(const Vec3& position) const {
    const int f = floor_of(position.z);
    const FloorGrid& g = floors[f];
    const int ix = g.index_x(position.x);
    const int iy = g.index_y(position.y);
    if (!g.in_bounds(ix, iy)) throw DomainError("position outside field bounds");
    return {f, ix, iy};
}

std::optional<CellRef> NavigabilityField::snap(const Vec3& position) const {
    const CellRef at = locate(position);
    const FloorGrid& g = floors[at.floor];
    if (g.is_navigable(at.ix, at.iy)) return at;
    double best_d2 = std::numeric_limits<double>::infinity();
    CellRef best = at;
    bool found = false;
    for (int iy = 0; iy < g.ny; ++iy) {
        for (int ix = 0; ix < g.nx; ++ix) {
            if (!g.is_navigable(ix, iy)) continue;
            const double dx = g.cell_x(ix) - position.x;
            const double dy = g.cell_y(iy) - position.y;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best_d2) {
                best_d2 = d2;
                best = {at.floor, ix, iy};
                found = true;
            }
        }
    }
    if (!found) return std::nullopt;
    return best;
}

Vec3 NavigabilityField::cell_position(const CellRef& c) const {
    const FloorGrid& g = floors[c.floor];
    return {g.cell_x(c.ix), g.cell_y(c.iy), g.height + camera_height};
}

Vec3 NavigabilityField::navigable_centroid() const {
    double sx = 0, sy = 0, sz = 0;
    size_t n = 0;
    for (const auto& g : floors) {
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix)
                if (g.is_navigable(ix, iy)) {
                    sx += g.cell_x(ix);
                    sy += g.cell_y(iy);
                    sz += g.height + camera_height;
                    ++n;
                }
    }
    if (n == 0) throw DomainError("field has no navigable cells");
    return {sx / double(n), sy / double(n), sz / double(n)};
}

}  // namespace vlnforge

#pragma once

#include <optional>
#include <vector>

#include "vlnforge/core.hpp"

namespace vlnforge {

/// One floor's navigability grid. Cell (ix, iy) covers
/// [origin + i*cell, origin + (i+1)*cell) in x/y; its center sits at
/// origin + (i + 0.5) * cell. `height` is the walking surface height.
struct FloorGrid {
    double height = 0.0;
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell = 0.1;
    int nx = 0;
    int ny = 0;
    std::vector<uint8_t> navigable;  // nx*ny, row-major by iy

    bool in_bounds(int ix, int iy) const { return ix >= 0 && ix < nx && iy >= 0 && iy < ny; }
    bool is_navigable(int ix, int iy) const {
        return in_bounds(ix, iy) && navigable[size_t(iy) * nx + ix] != 0;
    }
    void set_navigable(int ix, int iy, bool v) { navigable[size_t(iy) * nx + ix] = v ? 1 : 0; }

    double cell_x(int ix) const { return origin_x + (ix + 0.5) * cell; }
    double cell_y(int iy) const { return origin_y + (iy + 0.5) * cell; }
    int index_x(double x) const { return int(std::floor((x - origin_x) / cell)); }
    int index_y(double y) const { return int(std::floor((y - origin_y) / cell)); }

    size_t navigable_count() const;
};

/// Link between two cells on different floors (stairs, ramps). The
/// synthetic generator does not emit these; the format supports them.
struct StairLink {
    int floor_a = 0;
    int cell_a_x = 0, cell_a_y = 0;
    int floor_b = 0;
    int cell_b_x = 0, cell_b_y = 0;
    double length = 0.0;
};

struct CellRef {
    int floor = -1;
    int ix = 0;
    int iy = 0;
};

struct NavigabilityField {
    std::vector<FloorGrid> floors;
    std::vector<StairLink> stairs;
    double camera_height = 1.2;  // eye level above the walking surface

    size_t navigable_count() const;

    /// Floor whose eye-level height is nearest to z. Throws DomainError
    /// when the field has no floors.
    int floor_of(double z) const;

    /// Cell containing the position on its floor, navigable or not.
    /// Throws DomainError when the position lies outside the grid.
    CellRef locate(const Vec3& position) const;

    /// Nearest navigable cell to the position on its floor; nullopt when
    /// that floor has no navigable cell.
    std::optional<CellRef> snap(const Vec3& position) const;

    /// Eye-level position of a cell center.
    Vec3 cell_position(const CellRef& c) const;

    /// Mean of all navigable cell centers at eye level.
    Vec3 navigable_centroid() const;
};

}  // namespace vlnforge

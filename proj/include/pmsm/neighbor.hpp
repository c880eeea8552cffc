/**
 * @file neighbor.hpp
 * @brief Link-cell binning and Verlet neighbor lists with a skin distance.
 *
 * Boundaries are open: the 27-cell stencil never wraps.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "core.hpp"

namespace pmsm {

inline constexpr double DEFAULT_SKIN = 2.0;

struct CellGrid {
    double cell_edge = 0;
    Vec3 origin{};
    std::array<std::size_t, 3> dims{1, 1, 1};
    std::vector<std::vector<std::size_t>> bins;

    std::size_t flat(std::size_t cx, std::size_t cy, std::size_t cz) const {
        return (cx * dims[1] + cy) * dims[2] + cz;
    }
    std::array<std::size_t, 3> cell_of(const Vec3& r) const {
        std::array<std::size_t, 3> c{};
        for (std::size_t d = 0; d < 3; ++d) {
            const double f = std::floor((r[d] - origin[d]) / cell_edge);
            const double clamped = std::clamp(f, 0.0, double(dims[d] - 1));
            c[d] = static_cast<std::size_t>(clamped);
        }
        return c;
    }
};

inline CellGrid build_cell_grid(const ParticleSystem& system, double cell_edge) {
    if (!(cell_edge > 0) || !std::isfinite(cell_edge)) throw ConfigError("cell_edge must be positive");
    if (system.size() == 0) throw InputError("empty system");
    CellGrid g;
    g.cell_edge = cell_edge;
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const auto& r : system.positions) {
        if (!isfinite(r)) throw InputError("non-finite position in cell binning");
        for (std::size_t d = 0; d < 3; ++d) {
            lo[d] = std::min(lo[d], r[d]);
            hi[d] = std::max(hi[d], r[d]);
        }
    }
    g.origin = lo;
    for (std::size_t d = 0; d < 3; ++d) {
        const double cells = std::floor((hi[d] - lo[d]) / cell_edge) + 1.0;
        // very sparse systems would otherwise allocate huge empty grids
        g.dims[d] = static_cast<std::size_t>(std::min(cells, 1024.0));
    }
    g.bins.resize(g.dims[0] * g.dims[1] * g.dims[2]);
    for (std::size_t i = 0; i < system.size(); ++i) {
        const auto c = g.cell_of(system.positions[i]);
        g.bins[g.flat(c[0], c[1], c[2])].push_back(i);
    }
    return g;
}

struct NeighborList {
    double cutoff = 0;
    double skin = 0;
    /// pairs[i] holds sorted neighbor indices j > i
    std::vector<std::vector<std::size_t>> pairs;
    std::vector<Vec3> build_positions;

    std::size_t pair_count() const {
        std::size_t c = 0;
        for (const auto& p : pairs) c += p.size();
        return c;
    }
};

/// All pairs i < j with distance <= cutoff + skin, found via the cell grid.
inline NeighborList build_neighbor_list(const ParticleSystem& system, double cutoff, double skin = DEFAULT_SKIN) {
    if (!(cutoff > 0)) throw ConfigError("cutoff must be positive");
    if (!(skin >= 0)) throw ConfigError("skin must be non-negative");
    const double reach = cutoff + skin;
    const double reach2 = reach * reach;
    const auto grid = build_cell_grid(system, reach);
    const auto n = system.size();

    NeighborList list;
    list.cutoff = cutoff;
    list.skin = skin;
    list.pairs.resize(n);
    list.build_positions = system.positions;

    // dims are capped, so a clamped cell may be wider than reach; widen the
    // stencil accordingly
    std::array<long, 3> span{1, 1, 1};
    for (std::size_t d = 0; d < 3; ++d) {
        double extent = 0;
        for (const auto& r : system.positions) extent = std::max(extent, r[d] - grid.origin[d]);
        if (grid.dims[d] > 1 && extent >= double(grid.dims[d]) * reach) span[d] = long(grid.dims[d]);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const auto c = grid.cell_of(system.positions[i]);
        auto& out = list.pairs[i];
        for (long dx = -span[0]; dx <= span[0]; ++dx)
            for (long dy = -span[1]; dy <= span[1]; ++dy)
                for (long dz = -span[2]; dz <= span[2]; ++dz) {
                    const long x = long(c[0]) + dx, y = long(c[1]) + dy, z = long(c[2]) + dz;
                    if (x < 0 || y < 0 || z < 0 || x >= long(grid.dims[0]) || y >= long(grid.dims[1]) ||
                        z >= long(grid.dims[2]))
                        continue;
                    for (const auto j : grid.bins[grid.flat(x, y, z)]) {
                        if (j <= i) continue;
                        const auto d = system.positions[j] - system.positions[i];
                        const double d2 = dot(d, d);
                        if (d2 <= reach2 || std::sqrt(d2) <= reach) out.push_back(j);
                    }
                }
        std::sort(out.begin(), out.end());
    }
    return list;
}

/// True while every atom has moved less than skin/2 since the list was built.
inline bool list_valid(const NeighborList& list, const ParticleSystem& system) {
    if (list.build_positions.size() != system.size()) return false;
    const double limit = 0.5 * list.skin;
    for (std::size_t i = 0; i < system.size(); ++i) {
        const double moved = norm(system.positions[i] - list.build_positions[i]);
        if (moved > 0 && !(moved < limit)) return false;
    }
    return true;
}

}  // namespace pmsm

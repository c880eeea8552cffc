/**
 * @file msm.hpp
 * @brief Multilevel summation for non-periodic Coulomb interactions.
 *
 * The kernel 1/r is split into a short-range part g* (zero beyond the
 * cutoff a) and a telescoping sequence of smooth kernels g^k, the last of
 * which is evaluated densely on the coarsest grid. Level k has spacing
 * 2^k h; all levels share one origin, so every coarse node coincides with a
 * fine node.
 *
 * Pipeline for one evaluation:
 *   anterpolate -> restrict (k = 0..l-2) -> lattice_cutoff (k = 0..l-2)
 *   -> top_level -> prolongate (k = l-2..0) -> interpolate.
 *
 * Forces are the analytic gradient of the interpolated energy. Because
 * prolongation is the transpose of restriction, the long-range energy is a
 * symmetric quadratic form in the charges and its gradient only involves
 * the derivative of the level-0 basis at each atom.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "core.hpp"
#include "neighbor.hpp"
#include "parallel.hpp"
#include "potentials.hpp"

namespace pmsm {

struct MsmParams {
    double a = 12.0;    ///< finest cutoff [A]
    double h = 2.0;     ///< finest grid spacing [A]
    int levels = 0;     ///< number of grid levels; 0 picks max(1, floor(log2(L/a)))
    int m = 2;          ///< gamma is an even polynomial of degree 2m
    int p = 3;          ///< basis polynomial degree

    void validate() const {
        if (!(a > 0)) throw ConfigError("msm: cutoff a must be positive");
        if (!(h > 0)) throw ConfigError("msm: grid spacing h must be positive");
        if (levels < 0) throw ConfigError("msm: levels must be >= 1 (or 0 for automatic)");
        if (m < 1) throw ConfigError("msm: smoothing degree m must be >= 1");
        if (p != 3) throw ConfigError("msm: only the cubic basis (p = 3) is supported");
    }
};

// ---------------------------------------------------------------------------
// smoothing and splitting
// ---------------------------------------------------------------------------

namespace detail {
/// Taylor coefficients of (1 + t)^(-1/2): c_k = binom(-1/2, k).
inline double taylor_coeff(int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c *= -(2.0 * i - 1.0) / (2.0 * i);
    return c;
}
}  // namespace detail

/// Taylor smoothing of 1/rho: sum_k c_k (rho^2 - 1)^k for rho < 1, 1/rho beyond.
/// For m = 2 this is 15/8 - 5/4 rho^2 + 3/8 rho^4.
inline double gamma(double rho, int m = 2) {
    if (rho >= 1.0) return 1.0 / rho;
    const double t = rho * rho - 1.0;
    double acc = 0.0;
    for (int k = m; k >= 0; --k) acc = acc * t + detail::taylor_coeff(k);
    return acc;
}

/// d gamma / d rho
inline double gamma_derivative(double rho, int m = 2) {
    if (rho >= 1.0) return -1.0 / (rho * rho);
    const double t = rho * rho - 1.0;
    double acc = 0.0;
    for (int k = m; k >= 1; --k) acc = acc * t + k * detail::taylor_coeff(k);
    return acc * 2.0 * rho;
}

/// Smoothed kernel of width w: (1/w) gamma(r/w).
inline double smooth_kernel(double r, double w, int m) { return gamma(r / w, m) / w; }
inline double smooth_kernel_derivative(double r, double w, int m) { return gamma_derivative(r / w, m) / (w * w); }

struct KernelSplit {
    double g_star = 0;
    std::vector<double> g_levels;
};

/// Splits 1/r into g* + sum_k g^k for a hierarchy of @p levels levels.
inline KernelSplit kernel_split(double r, const MsmParams& params, int levels) {
    if (!(r > 0)) throw SingularityError("kernel_split: r must be positive");
    if (levels < 1) throw ConfigError("kernel_split: need at least one level");
    KernelSplit out;
    out.g_star = 1.0 / r - smooth_kernel(r, params.a, params.m);
    out.g_levels.resize(levels);
    double width = params.a;
    for (int k = 0; k + 1 < levels; ++k, width *= 2)
        out.g_levels[k] = smooth_kernel(r, width, params.m) - smooth_kernel(r, 2 * width, params.m);
    out.g_levels[levels - 1] = smooth_kernel(r, width, params.m);
    return out;
}

/// Level-k kernel value g^k(r) of an l-level hierarchy (k = l-1 is the top).
inline double level_kernel(double r, const MsmParams& params, int k, int levels) {
    const double width = params.a * std::ldexp(1.0, k);
    if (k + 1 < levels) return smooth_kernel(r, width, params.m) - smooth_kernel(r, 2 * width, params.m);
    return smooth_kernel(r, width, params.m);
}

// ---------------------------------------------------------------------------
// nodal basis
// ---------------------------------------------------------------------------

/// Cubic cardinal basis with support [-2, 2].
inline double phi(double xi, int p = 3) {
    if (p != 3) throw ConfigError("phi: only p = 3 is supported");
    const double t = std::abs(xi);
    if (t <= 1.0) return (1 - t) * (1 + t - 1.5 * t * t);
    if (t <= 2.0) return -0.5 * (t - 1) * (2 - t) * (2 - t);
    return 0.0;
}

inline double phi_derivative(double xi, int p = 3) {
    if (p != 3) throw ConfigError("phi: only p = 3 is supported");
    const double t = std::abs(xi);
    const double sign = xi < 0 ? -1.0 : 1.0;
    if (t <= 1.0) return sign * (t * (4.5 * t - 5.0));
    if (t <= 2.0) return sign * (-0.5 * (2 - t) * (4 - 3 * t));
    return 0.0;
}

// ---------------------------------------------------------------------------
// grids
// ---------------------------------------------------------------------------

struct GridLevel {
    double spacing = 0;
    std::array<long, 3> lo{};           ///< index of the first node relative to the shared origin
    std::array<std::size_t, 3> dims{};
    std::vector<double> charge;
    std::vector<double> potential;
    std::vector<double> cutoff_potential;

    std::size_t node_count() const { return dims[0] * dims[1] * dims[2]; }
    std::size_t flat(std::size_t x, std::size_t y, std::size_t z) const { return (x * dims[1] + y) * dims[2] + z; }
};

struct GridHierarchy {
    Vec3 origin{};
    std::vector<GridLevel> levels;

    int level_count() const { return int(levels.size()); }
    Vec3 node_position(int k, std::size_t x, std::size_t y, std::size_t z) const {
        const auto& g = levels[k];
        return {origin.x + double(g.lo[0] + long(x)) * g.spacing, origin.y + double(g.lo[1] + long(y)) * g.spacing,
                origin.z + double(g.lo[2] + long(z)) * g.spacing};
    }
};

/// Number of levels used for a system of extent @p extent.
inline int msm_level_count(const MsmParams& params, double extent) {
    if (params.levels > 0) return params.levels;
    if (!(extent > params.a)) return 1;
    return std::max(1, int(std::floor(std::log2(extent / params.a))));
}

namespace detail {
inline long floor_div2(long v) { return v >= 0 ? v / 2 : -((-v + 1) / 2); }

/// 1-D weights of the 4 nodes base-1 .. base+2 around coordinate xi.
struct Stencil1D {
    long base;
    std::array<double, 4> w;
    std::array<double, 4> dw;
};

inline Stencil1D stencil_1d(double xi, bool with_derivative = false) {
    Stencil1D s{};
    s.base = long(std::floor(xi));
    for (int o = 0; o < 4; ++o) {
        const double t = xi - double(s.base - 1 + o);
        s.w[o] = phi(t);
        s.dw[o] = with_derivative ? phi_derivative(t) : 0.0;
    }
    return s;
}
}  // namespace detail

/// Allocates a hierarchy whose level-0 grid covers every atom of @p system
/// including the basis support, and whose level k+1 covers level k.
inline GridHierarchy make_hierarchy(const ParticleSystem& system, const MsmParams& params) {
    params.validate();
    if (system.size() == 0) throw InputError("msm: empty system");
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const auto& r : system.positions) {
        if (!isfinite(r)) throw InputError("msm: non-finite position");
        for (std::size_t d = 0; d < 3; ++d) {
            lo[d] = std::min(lo[d], r[d]);
            hi[d] = std::max(hi[d], r[d]);
        }
    }
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    const int l = msm_level_count(params, extent);

    // nodes sit on the absolute lattice h*Z^3, so results do not depend on
    // which atom happens to bound the system
    GridHierarchy g;
    g.origin = Vec3{};
    g.levels.resize(l);
    std::array<long, 3> ilo{}, ihi{};
    for (std::size_t d = 0; d < 3; ++d) {
        ilo[d] = long(std::floor(lo[d] / params.h)) - 1;
        ihi[d] = long(std::floor(hi[d] / params.h)) + 2;
    }
    for (int k = 0; k < l; ++k) {
        auto& lev = g.levels[k];
        lev.spacing = params.h * std::ldexp(1.0, k);
        if (k > 0)
            for (std::size_t d = 0; d < 3; ++d) {
                ilo[d] = detail::floor_div2(ilo[d]) - 1;
                ihi[d] = detail::floor_div2(ihi[d]) + 2;
            }
        for (std::size_t d = 0; d < 3; ++d) {
            lev.lo[d] = ilo[d];
            lev.dims[d] = std::size_t(ihi[d] - ilo[d] + 1);
        }
        lev.charge.assign(lev.node_count(), 0.0);
        lev.potential.assign(lev.node_count(), 0.0);
        lev.cutoff_potential.assign(lev.node_count(), 0.0);
    }
    return g;
}

// ---------------------------------------------------------------------------
// pipeline stages
// ---------------------------------------------------------------------------

/// Spreads the atomic charges onto level 0: q_mu = sum_j phi_mu(r_j) q_j.
inline void anterpolate(const ParticleSystem& system, GridHierarchy& g) {
    auto& lev = g.levels.at(0);
    std::fill(lev.charge.begin(), lev.charge.end(), 0.0);
    for (std::size_t i = 0; i < system.size(); ++i) {
        const double q = system.charges[i];
        std::array<detail::Stencil1D, 3> st;
        std::array<long, 3> first{};
        for (std::size_t d = 0; d < 3; ++d) {
            st[d] = detail::stencil_1d((system.positions[i][d] - g.origin[d]) / lev.spacing);
            first[d] = st[d].base - 1 - lev.lo[d];
            if (first[d] < 0 || first[d] + 3 >= long(lev.dims[d]))
                throw CoverageError("msm: atom " + std::to_string(i) + " outside the level-0 grid");
        }
        if (q == 0.0) continue;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const double wab = q * st[0].w[a] * st[1].w[b];
                if (wab == 0.0) continue;
                for (int c = 0; c < 4; ++c)
                    lev.charge[lev.flat(first[0] + a, first[1] + b, first[2] + c)] += wab * st[2].w[c];
            }
    }
}

namespace detail {
/// For a fine node at absolute index @p fine_abs, the 1-D coarse weights and
/// the offset of the first coarse node inside the coarse grid.
inline std::pair<long, std::array<double, 4>> coarse_weights(long fine_abs, long coarse_lo) {
    const long half = floor_div2(fine_abs);
    std::array<double, 4> w{};
    if (fine_abs - 2 * half == 0) {
        w = {0.0, 1.0, 0.0, 0.0};
    } else {
        w = {phi(1.5), phi(0.5), phi(-0.5), phi(-1.5)};
    }
    return {half - 1 - coarse_lo, w};
}

/// Calls fn(fine_flat, coarse_flat, weight) for every nonzero coupling
/// between level k and level k+1 nodes.
template <class Fn>
void for_each_transfer(const GridLevel& fine, const GridLevel& coarse, Fn&& fn) {
    for (std::size_t x = 0; x < fine.dims[0]; ++x) {
        const auto [cx, wx] = coarse_weights(fine.lo[0] + long(x), coarse.lo[0]);
        for (std::size_t y = 0; y < fine.dims[1]; ++y) {
            const auto [cy, wy] = coarse_weights(fine.lo[1] + long(y), coarse.lo[1]);
            for (std::size_t z = 0; z < fine.dims[2]; ++z) {
                const auto [cz, wz] = coarse_weights(fine.lo[2] + long(z), coarse.lo[2]);
                const std::size_t f = fine.flat(x, y, z);
                for (int a = 0; a < 4; ++a) {
                    if (wx[a] == 0.0) continue;
                    for (int b = 0; b < 4; ++b) {
                        const double wab = wx[a] * wy[b];
                        if (wab == 0.0) continue;
                        for (int c = 0; c < 4; ++c) {
                            if (wz[c] == 0.0) continue;
                            const long X = cx + a, Y = cy + b, Z = cz + c;
                            if (X < 0 || Y < 0 || Z < 0 || X >= long(coarse.dims[0]) || Y >= long(coarse.dims[1]) ||
                                Z >= long(coarse.dims[2]))
                                throw CoverageError("msm: fine node outside the coarser grid");
                            fn(f, coarse.flat(X, Y, Z), wab * wz[c]);
                        }
                    }
                }
            }
        }
    }
}
}  // namespace detail

/// q^{k+1}_mu = sum_nu phi^{k+1}_mu(r^k_nu) q^k_nu
inline void restrict_charges(GridHierarchy& g, int k) {
    auto& fine = g.levels.at(k);
    auto& coarse = g.levels.at(k + 1);
    std::fill(coarse.charge.begin(), coarse.charge.end(), 0.0);
    detail::for_each_transfer(fine, coarse, [&](std::size_t f, std::size_t c, double w) {
        coarse.charge[c] += w * fine.charge[f];
    });
}

/// u^k_mu = u^{k,cutoff}_mu + sum_nu phi^{k+1}_nu(r^k_mu) u^{k+1}_nu
inline void prolongate(GridHierarchy& g, int k) {
    auto& fine = g.levels.at(k);
    const auto& coarse = g.levels.at(k + 1);
    fine.potential = fine.cutoff_potential;
    detail::for_each_transfer(fine, coarse, [&](std::size_t f, std::size_t c, double w) {
        fine.potential[f] += w * coarse.potential[c];
    });
}

namespace detail {
/// out_mu = sum_nu w(mu - nu) in_nu with w given on a (2R+1)^3 table.
inline void grid_convolve(const GridLevel& lev, const std::vector<double>& in, std::vector<double>& out,
                          const std::array<long, 3>& radius, const std::vector<double>& table) {
    const long Rx = radius[0], Ry = radius[1], Rz = radius[2];
    const long Ty = 2 * Ry + 1, Tz = 2 * Rz + 1;
    const long nx = long(lev.dims[0]), ny = long(lev.dims[1]), nz = long(lev.dims[2]);
    out.assign(lev.node_count(), 0.0);
    parallel_for(0, std::size_t(nx), [&](std::size_t xs) {
        const long x = long(xs);
        for (long y = 0; y < ny; ++y)
            for (long z = 0; z < nz; ++z) {
                double acc = 0.0;
                const long x0 = std::max(-Rx, -x), x1 = std::min(Rx, nx - 1 - x);
                const long y0 = std::max(-Ry, -y), y1 = std::min(Ry, ny - 1 - y);
                const long z0 = std::max(-Rz, -z), z1 = std::min(Rz, nz - 1 - z);
                for (long dx = x0; dx <= x1; ++dx)
                    for (long dy = y0; dy <= y1; ++dy) {
                        const double* w = &table[((dx + Rx) * Ty + (dy + Ry)) * Tz + Rz];
                        const double* q = &in[((x + dx) * ny + (y + dy)) * nz + z];
                        for (long dz = z0; dz <= z1; ++dz) acc += w[dz] * q[dz];
                    }
                out[(x * ny + y) * nz + z] = acc;
            }
    });
}

inline std::vector<double> kernel_table(const std::array<long, 3>& radius, double spacing, double max_r,
                                        const MsmParams& params, int k, int levels) {
    const long Tx = 2 * radius[0] + 1, Ty = 2 * radius[1] + 1, Tz = 2 * radius[2] + 1;
    std::vector<double> table(std::size_t(Tx * Ty * Tz), 0.0);
    for (long dx = -radius[0]; dx <= radius[0]; ++dx)
        for (long dy = -radius[1]; dy <= radius[1]; ++dy)
            for (long dz = -radius[2]; dz <= radius[2]; ++dz) {
                const double r = spacing * std::sqrt(double(dx * dx + dy * dy + dz * dz));
                if (r >= max_r) continue;
                table[std::size_t(((dx + radius[0]) * Ty + (dy + radius[1])) * Tz + (dz + radius[2]))] =
                    level_kernel(r, params, k, levels);
            }
    return table;
}
}  // namespace detail

/// u^{k,cutoff}_mu = sum_nu g^k(r_mu, r_nu) q^k_nu over the 2a/h node stencil.
inline void lattice_cutoff(GridHierarchy& g, int k, const MsmParams& params) {
    auto& lev = g.levels.at(k);
    const int l = g.level_count();
    if (k + 1 >= l) throw ConfigError("lattice_cutoff: level has no coarser grid; use top_level");
    const double reach = 2.0 * params.a * std::ldexp(1.0, k);
    const long R = long(std::ceil(reach / lev.spacing));
    std::array<long, 3> radius{};
    for (std::size_t d = 0; d < 3; ++d) radius[d] = std::min(R, long(lev.dims[d]) - 1);
    const auto table = detail::kernel_table(radius, lev.spacing, reach, params, k, l);
    detail::grid_convolve(lev, lev.charge, lev.cutoff_potential, radius, table);
}

/// Dense all-pairs sum on the coarsest grid with the untruncated top kernel.
inline void top_level(GridHierarchy& g, const MsmParams& params) {
    const int k = g.level_count() - 1;
    auto& lev = g.levels.at(k);
    std::array<long, 3> radius{};
    for (std::size_t d = 0; d < 3; ++d) radius[d] = long(lev.dims[d]) - 1;
    const auto table = detail::kernel_table(radius, lev.spacing, INFINITY, params, k, g.level_count());
    detail::grid_convolve(lev, lev.charge, lev.potential, radius, table);
    lev.cutoff_potential = lev.potential;
}

struct Interpolated {
    std::vector<double> potential;   ///< u_i^long
    std::vector<Vec3> gradient;      ///< grad of u^long at r_i
};

/// u_i^long = sum_mu phi^0_mu(r_i) u^0_mu, with its spatial gradient.
inline Interpolated interpolate(const ParticleSystem& system, const GridHierarchy& g) {
    const auto& lev = g.levels.at(0);
    Interpolated out;
    out.potential.assign(system.size(), 0.0);
    out.gradient.assign(system.size(), Vec3{});
    const double inv_h = 1.0 / lev.spacing;
    for (std::size_t i = 0; i < system.size(); ++i) {
        std::array<detail::Stencil1D, 3> st;
        std::array<long, 3> first{};
        for (std::size_t d = 0; d < 3; ++d) {
            st[d] = detail::stencil_1d((system.positions[i][d] - g.origin[d]) * inv_h, true);
            first[d] = st[d].base - 1 - lev.lo[d];
            if (first[d] < 0 || first[d] + 3 >= long(lev.dims[d]))
                throw CoverageError("msm: atom " + std::to_string(i) + " outside the level-0 grid");
        }
        double u = 0;
        Vec3 grad{};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c) {
                    const double v = lev.potential[lev.flat(first[0] + a, first[1] + b, first[2] + c)];
                    u += st[0].w[a] * st[1].w[b] * st[2].w[c] * v;
                    grad.x += st[0].dw[a] * st[1].w[b] * st[2].w[c] * v;
                    grad.y += st[0].w[a] * st[1].dw[b] * st[2].w[c] * v;
                    grad.z += st[0].w[a] * st[1].w[b] * st[2].dw[c] * v;
                }
        out.potential[i] = u;
        out.gradient[i] = grad * inv_h;
    }
    return out;
}

/// Runs the grid part of the pipeline on an allocated hierarchy.
inline void run_grid_pipeline(const ParticleSystem& system, GridHierarchy& g, const MsmParams& params) {
    const int l = g.level_count();
    anterpolate(system, g);
    for (int k = 0; k + 1 < l; ++k) restrict_charges(g, k);
    for (int k = 0; k + 1 < l; ++k) lattice_cutoff(g, k, params);
    top_level(g, params);
    for (int k = l - 2; k >= 0; --k) prolongate(g, k);
}

// ---------------------------------------------------------------------------
// full evaluation
// ---------------------------------------------------------------------------

/// MSM Coulomb energy and forces. coulomb_short holds the g* pair sum,
/// coulomb_long the grid part with the self energy and bonded-pair
/// smooth parts removed. Total energy is (K/2) sum_i q_i U_i.
inline ForceReport msm_energy_forces(const ParticleSystem& s, const MsmParams& params,
                                     const NeighborList* list = nullptr, double coulomb_k = COULOMB_K) {
    params.validate();
    const auto n = s.size();
    auto out = ForceReport::zeros(n);
    const Exclusions excl(s);
    const double a = params.a;
    const int m = params.m;

    out.components["coulomb_short"] =
        detail::pair_sum(s, list, a, excl, out, [&](std::size_t i, std::size_t j, double r) {
            const double qq = coulomb_k * s.charges[i] * s.charges[j];
            const double g = 1.0 / r - smooth_kernel(r, a, m);
            const double dg = -1.0 / (r * r) - smooth_kernel_derivative(r, a, m);
            return detail::PairTerm{qq * g, qq * dg};
        });

    bool any_charge = false;
    for (const double q : s.charges) any_charge = any_charge || q != 0.0;
    if (!any_charge) {
        out.finalize();
        return out;
    }

    auto grid = make_hierarchy(s, params);
    run_grid_pipeline(s, grid, params);
    const auto longrange = interpolate(s, grid);

    const double self = smooth_kernel(0.0, a, m);
    double e_long = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double q = s.charges[i];
        const double u = 0.5 * coulomb_k * q * (longrange.potential[i] - q * self);
        out.per_atom_potential[i] += u;
        e_long += u;
        out.forces[i] -= longrange.gradient[i] * (coulomb_k * q);
    }
    // bonded pairs: remove the smooth part the grids still carry
    excl.for_each([&](std::size_t i, std::size_t j) {
        const Vec3 d = s.positions[j] - s.positions[i];
        const double r = detail::checked_distance(d, i, j);
        const double qq = coulomb_k * s.charges[i] * s.charges[j];
        detail::accumulate_pair(out, i, j, d, r, {-qq * smooth_kernel(r, a, m), -qq * smooth_kernel_derivative(r, a, m)},
                                e_long);
    });
    out.components["coulomb_long"] = e_long;
    out.finalize();
    return out;
}

}  // namespace pmsm

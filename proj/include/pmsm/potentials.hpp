/**
 * @file potentials.hpp
 * @brief Pairwise energy/force evaluators: Lennard-Jones, harmonic bonds and
 * the cheap electrostatics backends (direct sum, truncated, switched, Wolf).
 *
 * Every evaluator is a pure function of its arguments. Pair loops run over
 * i ascending and then j ascending so sums are reproducible bit for bit.
 * Coulomb pairs joined by a bond record are excluded.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "core.hpp"
#include "neighbor.hpp"

namespace pmsm {

// ---------------------------------------------------------------------------
// exclusions
// ---------------------------------------------------------------------------

/// Sorted set of bonded (i < j) pairs.
class Exclusions {
public:
    Exclusions() = default;
    explicit Exclusions(const ParticleSystem& s) {
        keys_.reserve(s.bonds.size());
        for (const auto& b : s.bonds) keys_.push_back(key(std::min(b.i, b.j), std::max(b.i, b.j)));
        std::sort(keys_.begin(), keys_.end());
        keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
    }
    bool contains(std::size_t i, std::size_t j) const {
        if (keys_.empty()) return false;
        return std::binary_search(keys_.begin(), keys_.end(), key(std::min(i, j), std::max(i, j)));
    }
    bool empty() const { return keys_.empty(); }
    std::size_t size() const { return keys_.size(); }

    /// Calls fn(i, j) once per excluded pair, i < j.
    template <class Fn>
    void for_each(Fn&& fn) const {
        for (const auto k : keys_) fn(std::size_t(k >> 32), std::size_t(k & 0xffffffffu));
    }

private:
    static std::uint64_t key(std::size_t i, std::size_t j) { return (std::uint64_t(i) << 32) | std::uint64_t(j); }
    std::vector<std::uint64_t> keys_;
};

namespace detail {

struct PairTerm {
    double energy;
    double dudr;  ///< dU/dr
};

/// Adds one pair contribution; d = r_j - r_i.
inline void accumulate_pair(ForceReport& out, std::size_t i, std::size_t j, const Vec3& d, double r,
                            const PairTerm& t, double& energy) {
    const Vec3 fi = d * (t.dudr / r);
    out.forces[i] += fi;
    out.forces[j] -= fi;
    out.per_atom_potential[i] += 0.5 * t.energy;
    out.per_atom_potential[j] += 0.5 * t.energy;
    energy += t.energy;
}

inline double checked_distance(const Vec3& d, std::size_t i, std::size_t j) {
    const double r = norm(d);
    if (r < COINCIDENCE_TOL)
        throw SingularityError("atoms " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
    return r;
}

/// Visits every non-excluded pair with r <= cutoff. With a list the pairs
/// come from it, otherwise from the full O(N^2) enumeration.
template <class Kernel>
double pair_sum(const ParticleSystem& s, const NeighborList* list, double cutoff, const Exclusions& excl,
                ForceReport& out, Kernel&& kernel) {
    const double cut2 = cutoff * cutoff;
    double energy = 0;
    const auto visit = [&](std::size_t i, std::size_t j) {
        const Vec3 d = s.positions[j] - s.positions[i];
        const double r2 = dot(d, d);
        if (r2 > cut2 && std::sqrt(r2) > cutoff) return;  // r <= cutoff exactly as norm() sees it
        if (excl.contains(i, j)) return;
        const double r = checked_distance(d, i, j);
        accumulate_pair(out, i, j, d, r, kernel(i, j, r), energy);
    };
    const auto n = s.size();
    if (list) {
        if (list->pairs.size() != n) throw DimensionError("neighbor list size mismatch");
        for (std::size_t i = 0; i < n; ++i)
            for (const auto j : list->pairs[i]) visit(i, j);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
    }
    return energy;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Lennard-Jones
// ---------------------------------------------------------------------------

/// Per-atom LJ parameters combined with Lorentz-Berthelot rules.
struct LjParams {
    std::vector<double> epsilon;
    std::vector<double> sigma;
    double cutoff = 10.0;

    static LjParams uniform(std::size_t n, double eps, double sig, double cutoff) {
        return {std::vector<double>(n, eps), std::vector<double>(n, sig), cutoff};
    }
    double pair_epsilon(std::size_t i, std::size_t j) const { return std::sqrt(epsilon[i] * epsilon[j]); }
    double pair_sigma(std::size_t i, std::size_t j) const { return 0.5 * (sigma[i] + sigma[j]); }

    void validate(std::size_t n) const {
        if (epsilon.size() != n || sigma.size() != n) throw DimensionError("LJ parameter arrays have wrong length");
        double max_sigma = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(epsilon[i] >= 0)) throw ConfigError("LJ epsilon must be non-negative");
            if (!(sigma[i] > 0)) throw ConfigError("LJ sigma must be positive");
            max_sigma = std::max(max_sigma, sigma[i]);
        }
        if (!(cutoff > max_sigma)) throw ConfigError("LJ cutoff must exceed sigma");
    }
};

inline ForceReport lj_energy_forces(const ParticleSystem& s, const LjParams& p, const NeighborList* list = nullptr) {
    p.validate(s.size());
    auto out = ForceReport::zeros(s.size());
    const Exclusions excl(s);
    out.components["lj"] = detail::pair_sum(s, list, p.cutoff, excl, out, [&](std::size_t i, std::size_t j, double r) {
        const double eps = p.pair_epsilon(i, j);
        const double sr = p.pair_sigma(i, j) / r;
        const double sr6 = sr * sr * sr * sr * sr * sr;
        const double sr12 = sr6 * sr6;
        return detail::PairTerm{4 * eps * (sr12 - sr6), -24 * eps * (2 * sr12 - sr6) / r};
    });
    out.finalize();
    return out;
}

// ---------------------------------------------------------------------------
// bonds
// ---------------------------------------------------------------------------

/// U = sum k (r - r0)^2 (no 1/2 factor).
inline ForceReport bond_energy_forces(const ParticleSystem& s) {
    auto out = ForceReport::zeros(s.size());
    double energy = 0;
    for (const auto& b : s.bonds) {
        if (b.i >= s.size() || b.j >= s.size() || b.i == b.j) throw InputError("invalid bond record");
        const Vec3 d = s.positions[b.j] - s.positions[b.i];
        const double r = detail::checked_distance(d, b.i, b.j);
        const double stretch = r - b.r0;
        detail::accumulate_pair(out, b.i, b.j, d, r, {b.k * stretch * stretch, 2 * b.k * stretch}, energy);
    }
    out.components["bonded"] = energy;
    out.finalize();
    return out;
}

// ---------------------------------------------------------------------------
// electrostatics
// ---------------------------------------------------------------------------

/// O(N^2) Coulomb sum over all non-bonded pairs; the reference every other
/// backend is checked against.
inline ForceReport coulomb_direct(const ParticleSystem& s, double coulomb_k = COULOMB_K) {
    auto out = ForceReport::zeros(s.size());
    const Exclusions excl(s);
    out.components["coulomb_short"] =
        detail::pair_sum(s, nullptr, INFINITY, excl, out, [&](std::size_t i, std::size_t j, double r) {
            const double u = coulomb_k * s.charges[i] * s.charges[j] / r;
            return detail::PairTerm{u, -u / r};
        });
    out.finalize();
    return out;
}

/// Coulomb restricted to pairs with r <= cutoff.
inline ForceReport coulomb_cutoff(const ParticleSystem& s, double cutoff, const NeighborList* list = nullptr,
                                  double coulomb_k = COULOMB_K) {
    if (!(cutoff > 0)) throw ConfigError("cutoff must be positive");
    auto out = ForceReport::zeros(s.size());
    const Exclusions excl(s);
    out.components["coulomb_short"] =
        detail::pair_sum(s, list, cutoff, excl, out, [&](std::size_t i, std::size_t j, double r) {
            const double u = coulomb_k * s.charges[i] * s.charges[j] / r;
            return detail::PairTerm{u, -u / r};
        });
    out.finalize();
    return out;
}

/// C1 switch in r^2: 1 below r_on, 0 above r_off. Returns {S, dS/dr}.
inline std::pair<double, double> switching(double r, double r_on, double r_off) {
    if (r <= r_on) return {1.0, 0.0};
    if (r >= r_off) return {0.0, 0.0};
    const double x = r * r, on2 = r_on * r_on, off2 = r_off * r_off;
    const double denom = (off2 - on2) * (off2 - on2) * (off2 - on2);
    const double s = (off2 - x) * (off2 - x) * (off2 + 2 * x - 3 * on2) / denom;
    const double ds = -12 * r * (off2 - x) * (x - on2) / denom;
    return {s, ds};
}

/// Coulomb pair energy multiplied by the switch S(r) between switch_on and cutoff.
inline ForceReport coulomb_smoothed_cutoff(const ParticleSystem& s, double switch_on, double cutoff,
                                           const NeighborList* list = nullptr, double coulomb_k = COULOMB_K) {
    if (!(switch_on > 0 && switch_on < cutoff)) throw ConfigError("need 0 < switch_on < cutoff");
    auto out = ForceReport::zeros(s.size());
    const Exclusions excl(s);
    out.components["coulomb_short"] =
        detail::pair_sum(s, list, cutoff, excl, out, [&](std::size_t i, std::size_t j, double r) {
            const double u = coulomb_k * s.charges[i] * s.charges[j] / r;
            const auto [sw, dsw] = switching(r, switch_on, cutoff);
            return detail::PairTerm{u * sw, -u / r * sw + u * dsw};
        });
    out.finalize();
    return out;
}

inline constexpr double DEFAULT_WOLF_ALPHA = 0.2;
inline constexpr double DEFAULT_WOLF_CUTOFF = 12.0;

/// Damped, shifted Wolf sum including the self term.
inline ForceReport coulomb_wolf(const ParticleSystem& s, double alpha, double cutoff,
                                const NeighborList* list = nullptr, double coulomb_k = COULOMB_K) {
    if (!(alpha > 0)) throw ConfigError("wolf_alpha must be positive");
    if (!(cutoff > 0)) throw ConfigError("cutoff must be positive");
    auto out = ForceReport::zeros(s.size());
    const Exclusions excl(s);
    const double shift = std::erfc(alpha * cutoff) / cutoff;
    const double gauss = 2 * alpha / std::sqrt(std::numbers::pi);
    double energy = detail::pair_sum(s, list, cutoff, excl, out, [&](std::size_t i, std::size_t j, double r) {
        const double qq = coulomb_k * s.charges[i] * s.charges[j];
        const double e = std::erfc(alpha * r);
        const double de = -e / (r * r) - gauss * std::exp(-alpha * alpha * r * r) / r;
        return detail::PairTerm{qq * (e / r - shift), qq * de};
    });
    const double self = 0.5 * shift + alpha / std::sqrt(std::numbers::pi);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double u = -coulomb_k * self * s.charges[i] * s.charges[i];
        out.per_atom_potential[i] += u;
        energy += u;
    }
    out.components["coulomb_short"] = energy;
    out.finalize();
    return out;
}

}  // namespace pmsm

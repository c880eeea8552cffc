/**
 * @file generate.hpp
 * @brief Seeded random test systems.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "core.hpp"

namespace pmsm {

struct ClusterSpec {
    std::size_t atoms = 20;
    double box = 10.0;          ///< edge of the cube atoms are placed in [A]
    bool sphere = false;        ///< place atoms in the ball of diameter box instead
    double min_separation = 1.0;
    double charge = 1.0;        ///< charges alternate +charge / -charge
    bool neutral = true;        ///< alternate signs (odd counts leave one net charge)
    double mass = 12.0;
    std::uint64_t seed = 1;
};

/// Rejection-samples positions uniformly in [0, box)^3 (or the inscribed
/// ball) with a minimum pair separation. Charges alternate in sign when @p spec.neutral is set and are
/// uniform in [-charge, charge] otherwise.
inline ParticleSystem random_cluster(const ClusterSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> coord(0.0, spec.box);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Vec3> pos;
    pos.reserve(spec.atoms);
    const double min2 = spec.min_separation * spec.min_separation;
    std::size_t attempts = 0;
    while (pos.size() < spec.atoms) {
        if (++attempts > 1000000 + 1000 * spec.atoms) throw ConfigError("random_cluster: box too dense");
        const Vec3 r{coord(rng), coord(rng), coord(rng)};
        const Vec3 centre{0.5 * spec.box, 0.5 * spec.box, 0.5 * spec.box};
        if (spec.sphere && norm(r - centre) > 0.5 * spec.box) continue;
        bool ok = true;
        for (const auto& o : pos)
            if (dot(r - o, r - o) < min2) {
                ok = false;
                break;
            }
        if (ok) pos.push_back(r);
    }
    std::vector<double> q(spec.atoms);
    for (std::size_t i = 0; i < spec.atoms; ++i)
        q[i] = spec.neutral ? (i % 2 == 0 ? spec.charge : -spec.charge) : spec.charge * unit(rng);
    auto s = make_system(std::move(pos), std::move(q), std::vector<double>(spec.atoms, spec.mass));
    s.box = {spec.box, spec.box, spec.box};
    return s;
}

/// Random velocity directions, uniform on the sphere, scaled so the total
/// kinetic energy equals @p kinetic (in the energy unit of @p units), with
/// the centre-of-mass momentum removed first.
inline void assign_velocities(ParticleSystem& s, double kinetic, std::uint64_t seed, const Units& units = {}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n = s.size();
    Vec3 momentum{};
    double mass = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 d{gauss(rng), gauss(rng), gauss(rng)};
        const double len = norm(d);
        s.velocities[i] = len > 0 ? d * (1.0 / len) : Vec3{1, 0, 0};
        momentum += s.velocities[i] * s.masses[i];
        mass += s.masses[i];
    }
    if (n > 1)
        for (auto& v : s.velocities) v -= momentum * (1.0 / mass);
    double ke = 0;
    for (std::size_t i = 0; i < n; ++i) ke += 0.5 * s.masses[i] * dot(s.velocities[i], s.velocities[i]);
    ke /= units.force_to_accel;
    const double scale = ke > 0 ? std::sqrt(kinetic / ke) : 0.0;
    for (auto& v : s.velocities) v *= scale;
}

}  // namespace pmsm

// Shared helpers for the test suites.
#pragma once

#include <cmath>
#include <functional>

#include "pmsm/core.hpp"
#include "pmsm/generate.hpp"
#include "pmsm/integrate.hpp"
#include "pmsm/potentials.hpp"

namespace pmsm::test {

using EnergyForces = std::function<ForceReport(const ParticleSystem&)>;

/// ||F - F_fd|| / ||F|| with central differences of step @p step on every coordinate.
inline double fd_relative_error(const ParticleSystem& s, const EnergyForces& eval, double step = 1e-5) {
    const auto ref = eval(s);
    double diff2 = 0, norm2 = 0;
    auto work = s;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t d = 0; d < 3; ++d) {
            const double x0 = s.positions[i][d];
            work.positions[i][d] = x0 + step;
            const double up = eval(work).total_energy;
            work.positions[i][d] = x0 - step;
            const double down = eval(work).total_energy;
            work.positions[i][d] = x0;
            const double fd = -(up - down) / (2 * step);
            diff2 += (fd - ref.forces[i][d]) * (fd - ref.forces[i][d]);
            norm2 += ref.forces[i][d] * ref.forces[i][d];
        }
    return norm2 > 0 ? std::sqrt(diff2 / norm2) : std::sqrt(diff2);
}

inline ParticleSystem cluster(std::size_t atoms, double box, std::uint64_t seed, double min_sep = 1.0,
                              bool neutral = true) {
    ClusterSpec spec;
    spec.atoms = atoms;
    spec.box = box;
    spec.min_separation = min_sep;
    spec.seed = seed;
    spec.neutral = neutral;
    return random_cluster(spec);
}

inline Vec3 net_force(const ForceReport& r) {
    Vec3 f{};
    for (const auto& x : r.forces) f += x;
    return f;
}

inline double mean_force_magnitude(const ForceReport& r) {
    double m = 0;
    for (const auto& x : r.forces) m += norm(x);
    return m / double(r.forces.size());
}

/// Mean over atoms of |F_i - F_ref,i| / |F_ref,i|.
inline double mean_relative_force_error(const ForceReport& f, const ForceReport& ref) {
    double acc = 0;
    for (std::size_t i = 0; i < f.forces.size(); ++i)
        acc += norm(f.forces[i] - ref.forces[i]) / norm(ref.forces[i]);
    return acc / double(f.forces.size());
}


/// Capped steepest descent on direct Coulomb + LJ so test clusters start
/// near a local minimum instead of collapsing violently.
inline void relax(ParticleSystem& s, const LjParams& lj, int iterations = 3000) {
    for (int it = 0; it < iterations; ++it) {
        auto f = coulomb_direct(s);
        f += lj_energy_forces(s, lj);
        for (std::size_t i = 0; i < s.size(); ++i) {
            Vec3 d = f.forces[i] * 1e-3;
            const double len = norm(d);
            if (len > 0.05) d *= 0.05 / len;
            s.positions[i] += d;
        }
    }
}

/// Compact charged Lennard-Jones cluster (ions of charge +-0.5 in a ball).
struct IonCluster {
    ParticleSystem system;
    LjParams lj;
};

inline IonCluster ion_cluster(std::size_t atoms, double diameter, std::uint64_t seed, double kinetic = 2.0) {
    ClusterSpec spec;
    spec.atoms = atoms;
    spec.box = diameter;
    spec.sphere = true;
    spec.min_separation = 2.4;
    spec.charge = 0.5;
    spec.mass = 20.0;
    spec.seed = seed;
    auto s = random_cluster(spec);
    auto lj = LjParams::uniform(atoms, 0.2, 2.6, 10.0);
    relax(s, lj);
    assign_velocities(s, kinetic, seed + 1000);
    return {s, lj};
}

}  // namespace pmsm::test

namespace pmsm::test {

/// Total energy after every velocity Verlet step (index 0 = initial state).
inline std::vector<double> energy_series(const ParticleSystem& s, const Propagator& p) {
    std::vector<double> e;
    e.reserve(std::size_t(p.steps) + 1);
    propagate(state_from_system(s), s, p, [&](long, const ParticleSystem& x, const ForceReport* f) {
        e.push_back(kinetic_energy(x, p.forcefield.units) + f->total_energy);
    });
    return e;
}

/// |<E>_last tenth - <E>_first tenth| / |E_0|: secular drift with the bounded
/// Verlet oscillation averaged out.
inline double relative_drift(const std::vector<double>& e) {
    const std::size_t w = std::max<std::size_t>(1, e.size() / 10);
    double first = 0, last = 0;
    for (std::size_t i = 0; i < w; ++i) {
        first += e[i] / double(w);
        last += e[e.size() - w + i] / double(w);
    }
    return std::abs(last - first) / std::abs(e.front());
}

/// max_t |E_t - E_0| / |E_0|
inline double relative_fluctuation(const std::vector<double>& e) {
    double m = 0;
    for (const double x : e) m = std::max(m, std::abs(x - e.front()));
    return m / std::abs(e.front());
}

}  // namespace pmsm::test

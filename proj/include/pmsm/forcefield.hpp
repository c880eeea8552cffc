/**
 * @file forcefield.hpp
 * @brief Selects an electrostatics backend and combines it with
 * Lennard-Jones, bonds and an optional constant external field.
 */
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"
#include "msm.hpp"
#include "neighbor.hpp"
#include "potentials.hpp"

namespace pmsm {

enum class ElectrostaticsKind { none, direct, cutoff, smoothed_cutoff, wolf, msm };

inline std::string_view to_string(ElectrostaticsKind k) {
    switch (k) {
        case ElectrostaticsKind::none: return "none";
        case ElectrostaticsKind::direct: return "direct";
        case ElectrostaticsKind::cutoff: return "cutoff";
        case ElectrostaticsKind::smoothed_cutoff: return "smoothed_cutoff";
        case ElectrostaticsKind::wolf: return "wolf";
        case ElectrostaticsKind::msm: return "msm";
    }
    return "?";
}

inline ElectrostaticsKind electrostatics_kind_from_string(std::string_view s) {
    for (auto k : {ElectrostaticsKind::none, ElectrostaticsKind::direct, ElectrostaticsKind::cutoff,
                   ElectrostaticsKind::smoothed_cutoff, ElectrostaticsKind::wolf, ElectrostaticsKind::msm})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown electrostatics backend '" + std::string(s) + "'");
}

struct ElectrostaticsBackend {
    ElectrostaticsKind kind = ElectrostaticsKind::direct;
    double cutoff = 12.0;                   ///< cutoff / smoothed / wolf R_c
    double wolf_alpha = DEFAULT_WOLF_ALPHA;
    double switch_on = 10.0;
    MsmParams msm{};

    /// Radius a neighbor list must cover for this backend; 0 when none is needed.
    double list_cutoff() const {
        switch (kind) {
            case ElectrostaticsKind::cutoff:
            case ElectrostaticsKind::smoothed_cutoff:
            case ElectrostaticsKind::wolf: return cutoff;
            case ElectrostaticsKind::msm: return msm.a;
            default: return 0.0;
        }
    }

    void validate() const {
        switch (kind) {
            case ElectrostaticsKind::cutoff:
                if (!(cutoff > 0)) throw ConfigError("cutoff must be positive");
                break;
            case ElectrostaticsKind::smoothed_cutoff:
                if (!(switch_on > 0 && switch_on < cutoff)) throw ConfigError("need 0 < switch_on < cutoff");
                break;
            case ElectrostaticsKind::wolf:
                if (!(wolf_alpha > 0)) throw ConfigError("wolf_alpha must be positive");
                if (!(cutoff > 0)) throw ConfigError("cutoff must be positive");
                break;
            case ElectrostaticsKind::msm: msm.validate(); break;
            default: break;
        }
    }
};

struct ForceField {
    ElectrostaticsBackend electrostatics{};
    std::optional<LjParams> lj;
    bool bonds = true;
    Units units{};
    double skin = DEFAULT_SKIN;
    /// Constant per-atom force with potential -f.r; empty means none.
    std::vector<Vec3> external_force;

    double list_cutoff() const {
        double c = electrostatics.list_cutoff();
        if (lj) c = std::max(c, lj->cutoff);
        return c;
    }
};

/// Keeps a neighbor list alive across evaluations and rebuilds it when an
/// atom has moved half the skin or the required cutoff changed.
class NeighborCache {
public:
    const NeighborList& get(const ParticleSystem& s, double cutoff, double skin) {
        if (!list_ || list_->cutoff != cutoff || list_->skin != skin || !list_valid(*list_, s)) {
            list_ = build_neighbor_list(s, cutoff, skin);
            ++rebuilds_;
        }
        return *list_;
    }
    std::size_t rebuilds() const { return rebuilds_; }
    void reset() { list_.reset(); }

private:
    std::optional<NeighborList> list_;
    std::size_t rebuilds_ = 0;
};

inline ForceReport electrostatics_energy_forces(const ParticleSystem& s, const ElectrostaticsBackend& b,
                                                const NeighborList* list, double coulomb_k) {
    switch (b.kind) {
        case ElectrostaticsKind::none: return ForceReport::zeros(s.size());
        case ElectrostaticsKind::direct: return coulomb_direct(s, coulomb_k);
        case ElectrostaticsKind::cutoff: return coulomb_cutoff(s, b.cutoff, list, coulomb_k);
        case ElectrostaticsKind::smoothed_cutoff:
            return coulomb_smoothed_cutoff(s, b.switch_on, b.cutoff, list, coulomb_k);
        case ElectrostaticsKind::wolf: return coulomb_wolf(s, b.wolf_alpha, b.cutoff, list, coulomb_k);
        case ElectrostaticsKind::msm: return msm_energy_forces(s, b.msm, list, coulomb_k);
    }
    throw ConfigError("unknown electrostatics backend");
}

/// Total energy and forces of @p s under @p ff.
inline ForceReport evaluate_forces(const ParticleSystem& s, const ForceField& ff, NeighborCache& cache) {
    const double cut = ff.list_cutoff();
    const NeighborList* list = cut > 0 ? &cache.get(s, cut, ff.skin) : nullptr;
    auto report = electrostatics_energy_forces(s, ff.electrostatics, list, ff.units.coulomb_k);
    if (ff.lj) report += lj_energy_forces(s, *ff.lj, list);
    if (ff.bonds && !s.bonds.empty()) report += bond_energy_forces(s);
    if (!ff.external_force.empty()) {
        if (ff.external_force.size() != s.size()) throw DimensionError("external force size mismatch");
        double e = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double u = -dot(ff.external_force[i], s.positions[i]);
            report.forces[i] += ff.external_force[i];
            report.per_atom_potential[i] += u;
            e += u;
        }
        report.components["external"] += e;
    }
    report.finalize();
    return report;
}

inline ForceReport evaluate_forces(const ParticleSystem& s, const ForceField& ff) {
    NeighborCache cache;
    return evaluate_forces(s, ff, cache);
}

/// Kinetic energy in the force field's energy unit.
inline double kinetic_energy(const ParticleSystem& s, const Units& units) {
    double ke = 0;
    for (std::size_t i = 0; i < s.size(); ++i) ke += 0.5 * s.masses[i] * dot(s.velocities[i], s.velocities[i]);
    return ke / units.force_to_accel;
}

}  // namespace pmsm

/**
 * @file core.hpp
 * @brief Domain types shared by every module: particle systems, the flat
 * state vector used by integrators and the parareal recurrence, force
 * reports and the unit conventions.
 *
 * Units: positions in Angstrom, time in fs, mass in amu, charge in e.
 * Energies are kcal/mol in the default profile; the reduced profile sets
 * the Coulomb prefactor and the force-to-acceleration factor to one.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pmsm {

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// Mismatched vector lengths.
struct DimensionError : Error { using Error::Error; };
/// Invalid or non-finite input data.
struct InputError : Error { using Error::Error; };
/// Two interacting atoms (nearly) coincide.
struct SingularityError : Error { using Error::Error; };
/// An atom or node lies outside the grid it is transferred to.
struct CoverageError : Error { using Error::Error; };
/// Parameters violate a documented range.
struct ConfigError : Error { using Error::Error; };
/// The integrator produced non-finite coordinates.
struct BlowUpError : Error {
    BlowUpError(const std::string& what, long step) : Error(what), step(step) {}
    long step;
};

// ---------------------------------------------------------------------------
// units
// ---------------------------------------------------------------------------

/// 1/(4 pi eps0) in kcal*A/(mol*e^2).
inline constexpr double COULOMB_K = 332.0636;
/// Converts kcal/(mol*A*amu) to A/fs^2.
inline constexpr double KCAL_PER_AMU_TO_A_PER_FS2 = 4.184e-4;
/// Minimum separation accepted between two atoms [A].
inline constexpr double COINCIDENCE_TOL = 1e-6;

struct Units {
    double coulomb_k = COULOMB_K;
    double force_to_accel = KCAL_PER_AMU_TO_A_PER_FS2;

    static constexpr Units real() { return {}; }
    static constexpr Units reduced() { return {1.0, 1.0}; }
};

// ---------------------------------------------------------------------------
// 3-vectors
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0, y = 0, z = 0;

    constexpr double& operator[](std::size_t d) { return d == 0 ? x : (d == 1 ? y : z); }
    constexpr double operator[](std::size_t d) const { return d == 0 ? x : (d == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline bool isfinite(const Vec3& a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

// ---------------------------------------------------------------------------
// particle system
// ---------------------------------------------------------------------------

/// Harmonic bond U = k (r - r0)^2 between atoms i and j.
struct Bond {
    std::size_t i = 0, j = 0;
    double k = 0;   ///< kcal/(mol*A^2)
    double r0 = 0;  ///< A
    friend bool operator==(const Bond&, const Bond&) = default;
};

struct ParticleSystem {
    std::vector<std::string> elements;
    std::vector<Vec3> positions;
    std::vector<Vec3> velocities;
    std::vector<double> charges;
    std::vector<double> masses;
    std::vector<Bond> bonds;
    Vec3 box{};  ///< open boundary; only used for grid extents and binning

    std::size_t size() const { return positions.size(); }
};

/// Builds a system with n atoms of unit mass, zero charge and zero velocity.
inline ParticleSystem make_system(std::vector<Vec3> positions, std::vector<double> charges = {},
                                  std::vector<double> masses = {}) {
    ParticleSystem s;
    const auto n = positions.size();
    s.positions = std::move(positions);
    s.velocities.assign(n, Vec3{});
    s.charges = charges.empty() ? std::vector<double>(n, 0.0) : std::move(charges);
    s.masses = masses.empty() ? std::vector<double>(n, 1.0) : std::move(masses);
    s.elements.assign(n, "X");
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const auto& r : s.positions)
        for (std::size_t d = 0; d < 3; ++d) {
            lo[d] = std::min(lo[d], r[d]);
            hi[d] = std::max(hi[d], r[d]);
        }
    if (n > 0) s.box = hi - lo;
    return s;
}

/// Throws InputError unless the system satisfies the structural invariants.
/// The O(N^2) coincidence scan is skipped when @p check_coincidence is false.
inline void validate_system(const ParticleSystem& s, bool check_coincidence = true) {
    const auto n = s.size();
    if (n == 0) throw InputError("system has no atoms");
    if (s.velocities.size() != n || s.charges.size() != n || s.masses.size() != n ||
        (!s.elements.empty() && s.elements.size() != n))
        throw InputError("per-atom arrays have inconsistent lengths");
    for (std::size_t i = 0; i < n; ++i) {
        if (!isfinite(s.positions[i]) || !isfinite(s.velocities[i]))
            throw InputError("atom " + std::to_string(i) + " has non-finite coordinates");
        if (!(s.masses[i] > 0)) throw InputError("atom " + std::to_string(i) + " has non-positive mass");
        if (!std::isfinite(s.charges[i])) throw InputError("atom " + std::to_string(i) + " has non-finite charge");
    }
    for (const auto& b : s.bonds)
        if (b.i == b.j || b.i >= n || b.j >= n) throw InputError("bond indices invalid");
    if (check_coincidence)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (norm(s.positions[i] - s.positions[j]) < COINCIDENCE_TOL)
                    throw InputError("atoms " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
}

// ---------------------------------------------------------------------------
// state vector
// ---------------------------------------------------------------------------

/// Flat 6n vector: 3n position components followed by 3n velocity components.
struct StateVector {
    std::vector<double> data;

    std::size_t size() const { return data.size(); }
    std::size_t atoms() const { return data.size() / 6; }

    Vec3 position(std::size_t i) const { return {data[3 * i], data[3 * i + 1], data[3 * i + 2]}; }
    Vec3 velocity(std::size_t i) const {
        const auto o = 3 * atoms() + 3 * i;
        return {data[o], data[o + 1], data[o + 2]};
    }
    void set_position(std::size_t i, const Vec3& r) {
        data[3 * i] = r.x; data[3 * i + 1] = r.y; data[3 * i + 2] = r.z;
    }
    void set_velocity(std::size_t i, const Vec3& v) {
        const auto o = 3 * atoms() + 3 * i;
        data[o] = v.x; data[o + 1] = v.y; data[o + 2] = v.z;
    }
    friend bool operator==(const StateVector&, const StateVector&) = default;
};

inline StateVector state_from_system(const ParticleSystem& s) {
    const auto n = s.size();
    StateVector v;
    v.data.resize(6 * n);
    for (std::size_t i = 0; i < n; ++i) {
        v.set_position(i, s.positions[i]);
        v.set_velocity(i, s.velocities[i]);
    }
    return v;
}

/// Copies positions and velocities from @p state into a copy of @p meta.
inline ParticleSystem system_from_state(const StateVector& state, ParticleSystem meta) {
    const auto n = meta.size();
    if (state.size() != 6 * n) throw DimensionError("state length does not match system size");
    for (std::size_t i = 0; i < n; ++i) {
        meta.positions[i] = state.position(i);
        meta.velocities[i] = state.velocity(i);
    }
    return meta;
}

/// alpha * x + y
inline StateVector state_axpy(double alpha, const StateVector& x, const StateVector& y) {
    if (x.size() != y.size()) throw DimensionError("state_axpy: length mismatch");
    StateVector out;
    out.data.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out.data[k] = alpha * x.data[k] + y.data[k];
    return out;
}

enum class DistanceMode { max_position, rms_position };

/// Distance over the position block only.
inline double state_distance(const StateVector& x, const StateVector& y,
                             DistanceMode mode = DistanceMode::max_position) {
    if (x.size() != y.size()) throw DimensionError("state_distance: length mismatch");
    const auto n = x.atoms();
    if (n == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d2 = dot(x.position(i) - y.position(i), x.position(i) - y.position(i));
        acc = mode == DistanceMode::max_position ? std::max(acc, d2) : acc + d2;
    }
    return mode == DistanceMode::max_position ? std::sqrt(acc) : std::sqrt(acc / double(n));
}

// ---------------------------------------------------------------------------
// force report
// ---------------------------------------------------------------------------

struct ForceReport {
    std::vector<Vec3> forces;
    std::vector<double> per_atom_potential;
    double total_energy = 0;
    std::map<std::string, double> components{
        {"bonded", 0.0}, {"lj", 0.0}, {"coulomb_short", 0.0}, {"coulomb_long", 0.0}};

    static ForceReport zeros(std::size_t n) {
        ForceReport r;
        r.forces.assign(n, Vec3{});
        r.per_atom_potential.assign(n, 0.0);
        return r;
    }

    /// Recomputes total_energy from the components.
    void finalize() {
        total_energy = 0;
        for (const auto& [_, e] : components) total_energy += e;
    }

    ForceReport& operator+=(const ForceReport& o) {
        if (o.forces.size() != forces.size()) throw DimensionError("ForceReport size mismatch");
        for (std::size_t i = 0; i < forces.size(); ++i) {
            forces[i] += o.forces[i];
            per_atom_potential[i] += o.per_atom_potential[i];
        }
        for (const auto& [k, e] : o.components) components[k] += e;
        finalize();
        return *this;
    }
};

}  // namespace pmsm

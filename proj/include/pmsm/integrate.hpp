/**
 * @file integrate.hpp
 * @brief Sequential propagators: velocity Verlet and leap-frog over any
 * ForceField.
 *
 * A propagation is a pure function of (state, system metadata, propagator).
 * The neighbor list is rebuilt whenever it stops being valid; because pair
 * lists are sorted and filtered by the interaction cutoff, the rebuild
 * schedule never changes a single bit of the result.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include "core.hpp"
#include "forcefield.hpp"

namespace pmsm {

inline constexpr double DEFAULT_DT = 2.0;  // fs

enum class Scheme { velocity_verlet, leapfrog };

struct Propagator {
    ForceField forcefield{};
    double dt = DEFAULT_DT;
    long steps = 1;  ///< integrator steps per propagation interval
    Scheme scheme = Scheme::velocity_verlet;

    double interval() const { return dt * double(steps); }
    void validate() const {
        if (!(dt > 0)) throw ConfigError("dt must be positive");
        if (steps < 1) throw ConfigError("steps per interval must be >= 1");
        forcefield.electrostatics.validate();
    }
};

namespace detail {

inline void check_finite(const ParticleSystem& s, long step) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!isfinite(s.positions[i]) || !isfinite(s.velocities[i]))
            throw BlowUpError("integration blew up at step " + std::to_string(step) + " (atom " +
                                  std::to_string(i) + ")",
                              step);
}

/// Force evaluation inside a run; atoms driven onto each other count as a blow-up.
inline ForceReport step_forces(const ParticleSystem& s, const Propagator& p, NeighborCache& cache, long step) {
    try {
        return evaluate_forces(s, p.forcefield, cache);
    } catch (const SingularityError& e) {
        throw BlowUpError("integration blew up at step " + std::to_string(step) + ": " + e.what(), step);
    }
}

inline void kick(ParticleSystem& s, const ForceReport& f, double dt, double force_to_accel) {
    for (std::size_t i = 0; i < s.size(); ++i)
        s.velocities[i] += f.forces[i] * (dt * force_to_accel / s.masses[i]);
}

inline void drift(ParticleSystem& s, double dt) {
    for (std::size_t i = 0; i < s.size(); ++i) s.positions[i] += s.velocities[i] * dt;
}

/// One velocity Verlet step; @p forces holds F(t) on entry and F(t + dt) on exit.
inline void verlet_step_inplace(ParticleSystem& s, ForceReport& forces, const Propagator& p, NeighborCache& cache,
                                long step) {
    const double c = p.forcefield.units.force_to_accel;
    kick(s, forces, 0.5 * p.dt, c);
    drift(s, p.dt);
    check_finite(s, step);
    forces = step_forces(s, p, cache, step);
    kick(s, forces, 0.5 * p.dt, c);
    check_finite(s, step);
}

/// One leap-frog step; velocities are staggered by half a step.
inline void leapfrog_step_inplace(ParticleSystem& s, const Propagator& p, NeighborCache& cache, long step) {
    drift(s, p.dt);
    check_finite(s, step);
    const auto forces = step_forces(s, p, cache, step);
    kick(s, forces, p.dt, p.forcefield.units.force_to_accel);
    check_finite(s, step);
}

}  // namespace detail

/// v(t+dt/2) = v + a dt/2; r += v(t+dt/2) dt; recompute a; v += a dt/2.
inline StateVector velocity_verlet_step(const StateVector& state, const ParticleSystem& meta, const Propagator& p) {
    p.validate();
    auto s = system_from_state(state, meta);
    NeighborCache cache;
    auto forces = evaluate_forces(s, p.forcefield, cache);
    detail::verlet_step_inplace(s, forces, p, cache, 1);
    return state_from_system(s);
}

/// Velocities in @p state are taken at t + dt/2: r += v dt; recompute a; v += a dt.
inline StateVector leapfrog_step(const StateVector& state, const ParticleSystem& meta, const Propagator& p) {
    p.validate();
    auto s = system_from_state(state, meta);
    NeighborCache cache;
    detail::leapfrog_step_inplace(s, p, cache, 1);
    return state_from_system(s);
}

/// Converts on-step velocities to the leap-frog half-step convention with
/// one half kick: v(dt/2) = v(0) + a(0) dt/2.
inline StateVector leapfrog_initialize(const StateVector& state, const ParticleSystem& meta, const Propagator& p) {
    auto s = system_from_state(state, meta);
    const auto forces = evaluate_forces(s, p.forcefield);
    detail::kick(s, forces, 0.5 * p.dt, p.forcefield.units.force_to_accel);
    return state_from_system(s);
}

/// Observer called after every step with (step index, system, forces at that
/// step). Forces are only passed for velocity Verlet.
using StepObserver = std::function<void(long, const ParticleSystem&, const ForceReport*)>;

/// Applies p.steps integrator steps.
inline StateVector propagate(const StateVector& state, const ParticleSystem& meta, const Propagator& p,
                             const StepObserver& observer = {}) {
    p.validate();
    auto s = system_from_state(state, meta);
    NeighborCache cache;
    if (p.scheme == Scheme::velocity_verlet) {
        auto forces = evaluate_forces(s, p.forcefield, cache);
        if (observer) observer(0, s, &forces);
        for (long step = 1; step <= p.steps; ++step) {
            detail::verlet_step_inplace(s, forces, p, cache, step);
            if (observer) observer(step, s, &forces);
        }
    } else {
        for (long step = 1; step <= p.steps; ++step) {
            detail::leapfrog_step_inplace(s, p, cache, step);
            if (observer) observer(step, s, nullptr);
        }
    }
    return state_from_system(s);
}

/// Type-erased propagation over one interval, as consumed by parareal.
using PropagateFn = std::function<StateVector(const StateVector&)>;

inline PropagateFn make_propagate_fn(ParticleSystem meta, Propagator p) {
    p.validate();
    return [meta = std::move(meta), p = std::move(p)](const StateVector& v) { return propagate(v, meta, p); };
}

}  // namespace pmsm

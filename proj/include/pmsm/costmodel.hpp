/**
 * @file costmodel.hpp
 * @brief Flop counts for MSM and the cutoff method, parareal speedup
 * formulas for the two task distribution plans, and a discrete-event
 * simulator that measures the makespan of those plans on a task DAG.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "core.hpp"

namespace pmsm {

struct CostModelParams {
    double h_star = 1.0;  ///< mean nearest-neighbor distance N^{-1/3} L [A]
    double h = 2.0;       ///< finest grid spacing [A]
    double a = 12.0;      ///< cutoff [A]
    int m = 2;
    int p = 3;
    double N = 1.0;       ///< atom count
    double L = 0.0;       ///< box edge [A]; 0 when h_star is given directly

    /// Builds parameters from N and L, deriving h* = N^{-1/3} L.
    static CostModelParams from_box(double N, double L, double h = 2.0, double a = 12.0, int m = 2, int p = 3) {
        return {L / std::cbrt(N), h, a, m, p, N, L};
    }

    void validate() const {
        if (!(h_star > 0 && h > 0 && a >= 0 && N > 0 && m > 0 && p > 0))
            throw ConfigError("cost model parameters must be positive");
        if (L > 0 && std::abs(h_star - L / std::cbrt(N)) > 1e-9 * h_star)
            throw ConfigError("h_star inconsistent with N and L");
    }
};

/// Full MSM operation count:
/// (4/3 pi m + 32/3 pi + 81/2)(a/h*)^3 N + (6p^3 + 31p^2 + 36p + 17) N
///   + ((4a/h)^3 + 14(p + 2)) (8/7)(h*/h)^3 N
inline double msm_flops(const CostModelParams& c) {
    c.validate();
    const double pi = std::numbers::pi;
    const double short_range = (4.0 / 3.0 * pi * c.m + 32.0 / 3.0 * pi + 81.0 / 2.0) * std::pow(c.a / c.h_star, 3);
    const double transfers = 6.0 * c.p * c.p * c.p + 31.0 * c.p * c.p + 36.0 * c.p + 17.0;
    const double grids = (std::pow(4.0 * c.a / c.h, 3) + 14.0 * (c.p + 2)) * (8.0 / 7.0) * std::pow(c.h_star / c.h, 3);
    return (short_range + transfers + grids) * c.N;
}

/// The closed form quoted for m = 2, p = 3, h* = 1:
/// 77.7 a^3 N + 566 N + 73 a^3/h^6 N + 80/h^3 N.
inline double msm_flops_simplified(double a, double h, double N) {
    if (!(h > 0) || a < 0 || !(N > 0)) throw ConfigError("msm_flops_simplified: invalid parameters");
    const double a3 = a * a * a;
    return 77.7 * a3 * N + 566.0 * N + 73.0 * a3 / std::pow(h, 6) * N + 80.0 / (h * h * h) * N;
}

/// Flops per interacting pair in the cutoff model. Reverse-engineered so
/// that a = 12 A, h* = 1 A gives the quoted 2311 N; no counting rule backs it.
inline constexpr double CUTOFF_FLOPS_PER_PAIR = 2311.0 / (2.0 / 3.0 * std::numbers::pi * 1728.0);

/// Pairs per atom (4/3) pi (a/h*)^3 / 2 times CUTOFF_FLOPS_PER_PAIR, times N.
inline double cutoff_flops(double cutoff, double h_star, double N) {
    if (cutoff < 0 || !(h_star > 0) || !(N > 0)) throw ConfigError("cutoff_flops: invalid parameters");
    const double pairs_per_atom = 4.0 / 3.0 * std::numbers::pi * std::pow(cutoff / h_star, 3) / 2.0;
    return pairs_per_atom * CUTOFF_FLOPS_PER_PAIR * N;
}

/// Plan 1 (blocked): Q_{F/G} / 2.
inline double plan1_speedup(double q_ratio) { return q_ratio / 2.0; }

/// Plan 2 (pipelined), the simplified closed form Q / (1 + K / (T Q)).
inline double plan2_speedup(double q_ratio, double T, double K) { return q_ratio / (1.0 + K / (T * q_ratio)); }

/// Plan 2 from the makespan model it is derived from: T R_F / ((T/Q + K) R_F).
/// Note this equals Q / (1 + K Q / T), which is not the simplified form above.
inline double plan2_speedup_makespan(double q_ratio, double T, double K) { return T / (T / q_ratio + K); }

// ---------------------------------------------------------------------------
// discrete-event simulation
// ---------------------------------------------------------------------------

struct SimTask {
    double duration = 0;
    std::vector<std::size_t> deps;
    int pool = 0;  ///< resource pool; tasks of zero duration never occupy a unit
};

struct SimPool {
    std::size_t capacity = 0;  ///< 0 = unlimited
};

struct SimOutcome {
    double makespan = 0;
    std::size_t peak_units = 0;
    std::vector<double> start, finish;
};

/// Event-driven list scheduling: a task becomes ready when its dependencies
/// finish and starts as soon as its pool has a free unit (FIFO by ready time,
/// then task index).
inline SimOutcome simulate_tasks(const std::vector<SimTask>& tasks, const std::vector<SimPool>& pools) {
    const std::size_t n = tasks.size();
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<std::size_t> pending(n, 0);
    for (std::size_t t = 0; t < n; ++t) {
        if (tasks[t].pool < 0 || std::size_t(tasks[t].pool) >= pools.size()) throw ConfigError("task pool out of range");
        for (const auto d : tasks[t].deps) {
            if (d >= n) throw ConfigError("task dependency out of range");
            succ[d].push_back(t);
            ++pending[t];
        }
    }

    using Entry = std::pair<double, std::size_t>;  // (time, task)
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> completions;
    std::vector<std::priority_queue<Entry, std::vector<Entry>, std::greater<>>> waiting(pools.size());
    std::vector<std::size_t> busy(pools.size(), 0);
    std::size_t busy_total = 0;

    SimOutcome out;
    out.start.assign(n, -1.0);
    out.finish.assign(n, -1.0);

    const auto dispatch = [&](double now) {
        for (std::size_t p = 0; p < pools.size(); ++p)
            while (!waiting[p].empty() && (pools[p].capacity == 0 || busy[p] < pools[p].capacity)) {
                const auto t = waiting[p].top().second;
                waiting[p].pop();
                out.start[t] = now;
                if (tasks[t].duration > 0) {
                    ++busy[p];
                    ++busy_total;
                    out.peak_units = std::max(out.peak_units, busy_total);
                }
                completions.push({now + tasks[t].duration, t});
            }
    };

    for (std::size_t t = 0; t < n; ++t)
        if (pending[t] == 0) waiting[tasks[t].pool].push({0.0, t});
    dispatch(0.0);

    std::size_t done = 0;
    while (!completions.empty()) {
        const double now = completions.top().first;
        while (!completions.empty() && completions.top().first == now) {
            const auto t = completions.top().second;
            completions.pop();
            out.finish[t] = now;
            ++done;
            if (tasks[t].duration > 0) {
                --busy[tasks[t].pool];
                --busy_total;
            }
            for (const auto s : succ[t])
                if (--pending[s] == 0) waiting[tasks[s].pool].push({now, s});
        }
        dispatch(now);
        out.makespan = std::max(out.makespan, now);
    }
    if (done != n) throw ConfigError("task graph has a cycle");
    return out;
}

struct ScheduleResult {
    double makespan = 0;
    std::size_t units_used = 0;
    double speedup = 0;  ///< T r_fine / makespan
    int plan = 0;
};

namespace detail {

/// Plan 1: one unit runs the coarse sweep of a window, then T_W units run the
/// fine evaluations of that window; each of the K iterations repeats this.
inline ScheduleResult simulate_plan1(std::size_t T, std::size_t TW, std::size_t K, double r_fine, double r_coarse) {
    enum { G = 0, F = 1 };
    std::vector<SimTask> tasks;
    std::vector<std::size_t> barrier;  // tasks the next coarse sweep waits for
    const std::size_t windows = T / TW;
    for (std::size_t w = 0; w < windows; ++w)
        for (std::size_t j = 0; j < std::max<std::size_t>(K, 1); ++j) {
            std::size_t last_g = 0;
            for (std::size_t n = 0; n < TW; ++n) {
                SimTask g{r_coarse, {}, G};
                if (n == 0) g.deps = barrier;
                else g.deps = {last_g};
                tasks.push_back(g);
                last_g = tasks.size() - 1;
            }
            barrier.clear();
            for (std::size_t n = 0; n < TW; ++n) {
                tasks.push_back({r_fine, {last_g}, F});
                barrier.push_back(tasks.size() - 1);
            }
        }
    const auto sim = simulate_tasks(tasks, {{1}, {TW}});
    return {sim.makespan, std::max<std::size_t>(sim.peak_units, 1), double(T) * r_fine / sim.makespan, 1};
}

/// Plan 2: pipelined. Every fine task starts as soon as its input state
/// exists; each correction sweep is a chain of coarse tasks; units unlimited.
inline ScheduleResult simulate_plan2(std::size_t T, std::size_t TW, std::size_t K, double r_fine, double r_coarse) {
    enum { G = 0, F = 1, JOIN = 2 };
    std::vector<SimTask> tasks;
    const auto add = [&](SimTask t) {
        tasks.push_back(std::move(t));
        return tasks.size() - 1;
    };
    const std::size_t windows = T / TW;
    constexpr std::size_t none = std::size_t(-1);
    std::size_t window_start = none;  // task producing the window's initial state
    for (std::size_t w = 0; w < windows; ++w) {
        // ready[n] = task after which point n of the current level exists;
        // point 0 is the previous window's end, points 1..TW are new
        std::vector<std::size_t> ready(TW + 1, none);
        ready[0] = window_start;
        const auto deps_of = [&](std::size_t t) { return t == none ? std::vector<std::size_t>{} : std::vector{t}; };
        for (std::size_t n = 1; n <= TW; ++n) ready[n] = add({r_coarse, deps_of(ready[n - 1]), G});
        for (std::size_t j = 0; j < K; ++j) {
            std::vector<std::size_t> fine(TW);
            for (std::size_t n = 0; n < TW; ++n) fine[n] = add({r_fine, deps_of(ready[n]), F});
            std::vector<std::size_t> next(TW + 1, none);
            next[0] = window_start;
            for (std::size_t n = 0; n < TW; ++n) {
                const auto g = add({r_coarse, deps_of(next[n]), G});
                next[n + 1] = add({0.0, {g, fine[n]}, JOIN});
            }
            ready = std::move(next);
        }
        window_start = ready[TW];
    }
    const auto sim = simulate_tasks(tasks, {{0}, {0}, {0}});
    return {sim.makespan, std::max<std::size_t>(sim.peak_units, 1), double(T) * r_fine / sim.makespan, 2};
}

}  // namespace detail

/// Simulates @p plan for T fine steps split into windows of T_W steps with
/// K iterations each. For plan 1, T_W = 0 selects floor(r_fine / r_coarse).
inline ScheduleResult simulate_schedule(int plan, std::size_t T, std::size_t TW, std::size_t K, double r_fine,
                                        double r_coarse) {
    if (!(r_fine > 0 && r_coarse > 0)) throw ConfigError("task costs must be positive");
    if (plan == 1 && TW == 0) TW = std::max<std::size_t>(1, std::size_t(std::floor(r_fine / r_coarse)));
    if (TW == 0 || T == 0 || T % TW != 0) throw ConfigError("T must be a positive multiple of T_W");
    switch (plan) {
        case 1: return detail::simulate_plan1(T, TW, K, r_fine, r_coarse);
        case 2: return detail::simulate_plan2(T, TW, K, r_fine, r_coarse);
        default: throw ConfigError("unknown distribution plan " + std::to_string(plan));
    }
}

}  // namespace pmsm

/**
 * @file parareal.hpp
 * @brief Parareal iteration over computational windows.
 *
 * A window holds T_W time points; point 1 is the window's initial state and
 * point n+1 is one propagation interval after point n. The init sweep runs
 * the coarse propagator G sequentially. Each iteration then evaluates the
 * fine propagator F on every point of the previous iterate concurrently and
 * applies the correction sweep
 *
 *     lambda^{k+1}_{n+1} = G(lambda^{k+1}_n) + F(lambda^k_n) - G(lambda^k_n)
 *
 * sequentially in n. G(lambda^k_n) is the value computed during the previous
 * sweep (or the init sweep), so every iteration costs T_W - 1 fine and
 * T_W - 1 coarse evaluations. After iteration k the first k + 2 points
 * coincide with the sequential fine solution up to rounding.
 */
#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "core.hpp"
#include "integrate.hpp"
#include "parallel.hpp"

namespace pmsm {

inline constexpr std::size_t DEFAULT_WINDOW = 16;
inline constexpr double DEFAULT_EPSILON = 1e-3;  // A

struct PararealConfig {
    PropagateFn fine;
    PropagateFn coarse;
    std::size_t window = DEFAULT_WINDOW;  ///< T_W, time points per window
    double epsilon = DEFAULT_EPSILON;     ///< stop once successive iterates differ by less [A]
    long k_max = -1;                      ///< iteration cap; negative means T_W - 1
    std::size_t total_points = 0;         ///< stitched trajectory length; 0 means one window
    unsigned threads = default_threads();  ///< workers for the fine evaluations

    long max_iterations() const { return k_max < 0 ? long(window) - 1 : k_max; }

    void validate() const {
        if (!fine || !coarse) throw ConfigError("parareal: fine and coarse propagators are required");
        if (window < 2) throw ConfigError("parareal: window must hold at least 2 time points");
        if (!(epsilon > 0)) throw ConfigError("parareal: epsilon must be positive");
        if (total_points != 0 && (total_points < window || (total_points - 1) % (window - 1) != 0))
            throw ConfigError("parareal: total_points must equal 1 + W (window - 1) for an integer W >= 1");
    }
    std::size_t window_count() const { return total_points == 0 ? 1 : (total_points - 1) / (window - 1); }
};

struct WindowTrace {
    std::vector<StateVector> init;                     ///< lambda'_n
    std::vector<std::vector<StateVector>> iterates;    ///< iterates[k][n-1] = lambda^k_n
    std::vector<std::vector<double>> increments;       ///< |lambda^k_n - lambda^{k-1}_n|, k = 0 compares to init
    std::vector<double> max_increment;                 ///< max over n of increments[k]
    long converged_at = -1;                            ///< K, the last iteration run
    bool converged = false;
    std::size_t fine_evaluations = 0;
    std::size_t coarse_evaluations = 0;
    double fine_seconds = 0;    ///< wall time of the concurrent fine phases
    double coarse_seconds = 0;  ///< wall time of the sequential coarse sweeps
    double total_seconds = 0;

    const std::vector<StateVector>& result() const { return iterates.empty() ? init : iterates.back(); }
};

namespace detail {
using Clock = std::chrono::steady_clock;
inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}
}  // namespace detail

/// lambda'_1 = v, lambda'_{n+1} = G(lambda'_n).
inline std::vector<StateVector> init_sweep(const StateVector& v, const PararealConfig& config) {
    config.validate();
    std::vector<StateVector> out;
    out.reserve(config.window);
    out.push_back(v);
    for (std::size_t n = 1; n < config.window; ++n) out.push_back(config.coarse(out.back()));
    return out;
}

/// G(new) + F(old) - G(old). Pass @p coarse_old to reuse a cached G(old).
inline StateVector parareal_update(const StateVector& lambda_new, const StateVector& lambda_old,
                                   const StateVector& fine_old, const PararealConfig& config,
                                   const StateVector* coarse_old = nullptr) {
    if (lambda_new.size() != lambda_old.size() || lambda_old.size() != fine_old.size())
        throw DimensionError("parareal_update: dimension mismatch");
    const StateVector g_old = coarse_old ? *coarse_old : config.coarse(lambda_old);
    const StateVector g_new = config.coarse(lambda_new);
    return state_axpy(1.0, g_new, state_axpy(-1.0, g_old, fine_old));
}

/// Iterates one window to convergence or to the iteration cap.
inline WindowTrace run_window(const StateVector& v, const PararealConfig& config) {
    config.validate();
    const auto t_start = detail::Clock::now();
    const std::size_t T = config.window;
    WindowTrace trace;

    auto t0 = detail::Clock::now();
    trace.init = init_sweep(v, config);
    trace.coarse_evaluations += T - 1;
    trace.coarse_seconds += detail::seconds_since(t0);

    // coarse_prev[n] = G(prev[n]) for n = 0..T-2 (0-based points)
    std::vector<StateVector> coarse_prev(trace.init.begin() + 1, trace.init.end());
    const std::vector<StateVector>* prev = &trace.init;
    std::vector<StateVector> fine(T - 1);

    for (long k = 0; k <= config.max_iterations(); ++k) {
        t0 = detail::Clock::now();
        parallel_for(0, T - 1, [&](std::size_t n) { fine[n] = config.fine((*prev)[n]); }, config.threads);
        trace.fine_evaluations += T - 1;
        trace.fine_seconds += detail::seconds_since(t0);

        t0 = detail::Clock::now();
        std::vector<StateVector> next(T);
        std::vector<StateVector> coarse_next(T - 1);
        next[0] = v;
        for (std::size_t n = 0; n + 1 < T; ++n) {
            coarse_next[n] = config.coarse(next[n]);
            next[n + 1] = state_axpy(1.0, coarse_next[n], state_axpy(-1.0, coarse_prev[n], fine[n]));
        }
        trace.coarse_evaluations += T - 1;
        trace.coarse_seconds += detail::seconds_since(t0);

        std::vector<double> inc(T);
        double max_inc = 0;
        for (std::size_t n = 0; n < T; ++n) {
            inc[n] = state_distance(next[n], (*prev)[n]);
            max_inc = std::max(max_inc, inc[n]);
        }
        trace.increments.push_back(std::move(inc));
        trace.max_increment.push_back(max_inc);
        trace.iterates.push_back(std::move(next));
        coarse_prev = std::move(coarse_next);
        prev = &trace.iterates.back();
        trace.converged_at = k;
        if (max_inc < config.epsilon) {
            trace.converged = true;
            break;
        }
    }
    trace.total_seconds = detail::seconds_since(t_start);
    return trace;
}

struct WindowStats {
    long converged_at = -1;
    bool converged = false;
    std::vector<double> max_increment;
    std::size_t fine_evaluations = 0;
    std::size_t coarse_evaluations = 0;
    double fine_seconds = 0;
    double coarse_seconds = 0;
    double total_seconds = 0;
};

struct SimulationResult {
    std::vector<StateVector> trajectory;  ///< 1 + W (T_W - 1) points
    std::vector<WindowStats> windows;

    bool all_converged() const {
        for (const auto& w : windows)
            if (!w.converged) return false;
        return true;
    }
    long max_iterations() const {
        long k = 0;
        for (const auto& w : windows) k = std::max(k, w.converged_at);
        return k;
    }
};

/// Runs consecutive windows; window w+1 starts from the last converged point
/// of window w. Shared boundary points appear once in the trajectory.
inline SimulationResult run_simulation(const StateVector& v, const PararealConfig& config,
                                       const std::function<void(std::size_t, const WindowTrace&)>& on_window = {}) {
    config.validate();
    SimulationResult out;
    StateVector start = v;
    out.trajectory.push_back(v);
    for (std::size_t w = 0; w < config.window_count(); ++w) {
        WindowTrace trace;
        try {
            trace = run_window(start, config);
        } catch (const BlowUpError& e) {
            throw BlowUpError("window " + std::to_string(w) + ": " + e.what(), e.step);
        }
        const auto& pts = trace.result();
        out.trajectory.insert(out.trajectory.end(), pts.begin() + 1, pts.end());
        start = pts.back();
        out.windows.push_back({trace.converged_at, trace.converged, trace.max_increment, trace.fine_evaluations,
                               trace.coarse_evaluations, trace.fine_seconds, trace.coarse_seconds,
                               trace.total_seconds});
        if (on_window) on_window(w, trace);
    }
    return out;
}

/// Sequential reference: point n+1 = F(point n).
inline std::vector<StateVector> sequential_trajectory(const StateVector& v, const PropagateFn& fine,
                                                      std::size_t points) {
    std::vector<StateVector> out{v};
    out.reserve(points);
    while (out.size() < points) out.push_back(fine(out.back()));
    return out;
}

// ---------------------------------------------------------------------------
// radial distribution diagnostic
// ---------------------------------------------------------------------------

/// Histogram of pair distances in [0, r_max), normalised to unit sum.
inline std::vector<double> pair_distance_histogram(const StateVector& s, std::size_t bins, double r_max) {
    if (bins == 0 || !(r_max > 0)) throw ConfigError("histogram needs bins > 0 and r_max > 0");
    std::vector<double> h(bins, 0.0);
    double count = 0;
    const auto n = s.atoms();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = norm(s.position(j) - s.position(i));
            if (r >= r_max) continue;
            h[std::size_t(r / r_max * double(bins))] += 1.0;
            count += 1.0;
        }
    if (count > 0)
        for (auto& x : h) x /= count;
    return h;
}

/// L1 distance between the pair-distance histograms of two states; two
/// configurations describing the same structure give a value near zero.
inline double rdf_distance(const StateVector& a, const StateVector& b, std::size_t bins = 50, double r_max = 20.0) {
    const auto ha = pair_distance_histogram(a, bins, r_max);
    const auto hb = pair_distance_histogram(b, bins, r_max);
    double d = 0;
    for (std::size_t i = 0; i < bins; ++i) d += std::abs(ha[i] - hb[i]);
    return d;
}

}  // namespace pmsm

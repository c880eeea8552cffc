/**
 * @file parallel.hpp
 * @brief Minimal fork-join helpers. Work is split into contiguous static
 * chunks so results never depend on the thread count.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pmsm {

/// Worker count: the THREADS environment variable if set, else the
/// hardware concurrency.
inline unsigned default_threads() {
    if (const char* env = std::getenv("THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// @p requested capped by THREADS when that is set.
inline unsigned capped_threads(unsigned requested) {
    if (requested == 0) return default_threads();
    return std::getenv("THREADS") ? std::min(requested, default_threads()) : requested;
}

namespace detail {
/// Set on worker threads; nested parallel_for calls then run serially.
inline thread_local bool in_parallel_region = false;
}  // namespace detail

/// Calls fn(i) for i in [begin, end) on up to @p threads workers. The first
/// exception thrown by any worker is rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, Fn&& fn, unsigned threads = default_threads()) {
    if (end <= begin) return;
    const std::size_t count = end - begin;
    std::size_t workers = std::min<std::size_t>(threads == 0 ? 1 : threads, count);
    if (detail::in_parallel_region) workers = 1;
    if (workers <= 1) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            detail::in_parallel_region = true;
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace pmsm

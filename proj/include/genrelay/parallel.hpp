#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace genrelay {

/// Runs f(i) for i in [0, n) across `workers` threads in static blocks.
/// Each index must use its own deterministically derived random stream, so
/// the outcome is identical for any worker count.
template <class F>
void parallel_for_index(std::int64_t n, int workers, F &&f) {
    if (workers < 1) workers = 1;
    if (workers == 1 || n <= 1) {
        for (std::int64_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f]() {
            for (std::int64_t i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto &t : pool) t.join();
}

} // namespace genrelay

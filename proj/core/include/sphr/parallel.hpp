#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace sphr {

/// Worker count: hardware concurrency capped by the SPHR_THREADS environment
/// variable (read once). Always at least 1.
int worker_count();

/// Runs `body(begin, end)` over a partition of [0, n) across the worker threads.
/// Each index belongs to exactly one range, so outputs indexed by i are written
/// once and results do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, const Body& body) {
    const std::size_t workers = static_cast<std::size_t>(worker_count());
    if (n == 0) return;
    if (workers <= 1 || n < 2 * workers) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) {
        const std::size_t begin = t * chunk;
        if (begin >= n) break;
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&body, begin, end] { body(begin, end); });
    }
    body(std::size_t{0}, std::min(n, chunk));
}

} // namespace sphr

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace mvedit {

inline int default_worker_count() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// Runs fn(i) for i in [0, n) on up to `workers` threads. Indices are handed out
// from a shared counter, so idle workers pick up whatever is left. `fn` must not
// throw; callers record per-item failures themselves.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    const auto count = static_cast<std::size_t>(std::max(1, workers));
    if (count == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::jthread> pool;
    pool.reserve(std::min(count, n) - 1);
    for (std::size_t t = 1; t < std::min(count, n); ++t) pool.emplace_back(loop);
    loop();
}

}  // namespace mvedit

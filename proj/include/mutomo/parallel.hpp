#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace mutomo {

// Global worker-count override for reproducibility experiments; 0 = hardware.
inline int& thread_count_override() {
    static int count = 0;
    return count;
}

inline int effective_threads(std::size_t n) {
    int t = thread_count_override();
    if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
    if (t <= 0) t = 1;
    return static_cast<int>(std::min<std::size_t>(t, n));
}

// Runs fn(i) for i in [0, n). fn must write only to per-index state; results
// are then independent of the schedule.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const int threads = effective_threads(n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

}  // namespace mutomo

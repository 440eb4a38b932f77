#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace netmatch {

// Worker cap: NETMATCH_THREADS if set (>= 1), else hardware concurrency.
inline unsigned max_workers() {
    static unsigned cached = [] {
        if (const char* env = std::getenv("NETMATCH_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<unsigned>(v);
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1u : hw;
    }();
    return cached;
}

// Runs f(i) for i in [0, n). Results must be written by index so the schedule
// cannot affect the outcome.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const unsigned workers = std::min<std::size_t>(max_workers(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) f(i);
        });
    }
    for (auto& t : threads) t.join();
}

}  // namespace netmatch

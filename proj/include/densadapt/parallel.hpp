#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace densadapt {

/// Effective worker count: DENSADAPT_THREADS env var wins over the requested
/// value; requested <= 0 means hardware concurrency.
inline int resolve_threads(int requested) {
    if (const char* env = std::getenv("DENSADAPT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Static-chunked parallel loop over [0, n). Each index is processed exactly
/// once; callers must write only to disjoint slots so results do not depend
/// on the thread count. Reductions belong in a sequential pass afterwards.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::min(threads, n);
    if (threads <= 1 || n < 256) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        int lo = t * chunk;
        int hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace densadapt

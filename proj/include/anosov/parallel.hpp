#pragma once
// Deterministic grid parallelism. Work is split into fixed chunks and the
// only cross-chunk reductions offered are max/min, which are insensitive to
// evaluation order, so results are bitwise-identical for any thread count.
// ANOSOV_LAB_THREADS caps the worker count (default 1).

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace anosov {

inline int thread_count() {
    if (const char* env = std::getenv("ANOSOV_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

// Applies fn(k) for k in [0, n); fn must write only outputs owned by k so
// the strided split stays deterministic.
inline void parallel_for(long n, const std::function<void(long)>& fn) {
    const int workers = std::min<long>(thread_count(), std::max(1L, n));
    if (workers <= 1) {
        for (long k = 0; k < n; ++k) fn(k);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (long k = w; k < n; k += workers) fn(k);
        });
    }
    for (auto& t : pool) t.join();
}

// Applies fn(k) for k in [0, n) and returns the max of the results.
// identity is returned for n == 0.
inline double parallel_max(long n, double identity,
                           const std::function<double(long)>& fn) {
    const int workers = std::min<long>(thread_count(), std::max(1L, n));
    if (workers <= 1) {
        double best = identity;
        for (long k = 0; k < n; ++k) best = std::max(best, fn(k));
        return best;
    }
    std::vector<double> partial(static_cast<std::size_t>(workers), identity);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            double best = identity;
            for (long k = w; k < n; k += workers) best = std::max(best, fn(k));
            partial[static_cast<std::size_t>(w)] = best;
        });
    }
    for (auto& t : pool) t.join();
    double best = identity;
    for (double v : partial) best = std::max(best, v);
    return best;
}

}  // namespace anosov

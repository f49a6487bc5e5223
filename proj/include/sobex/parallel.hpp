#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace sobex {

// worker cap from SOBEX_THREADS (>= 1), else hardware concurrency
inline int thread_count() {
    if (const char* e = std::getenv("SOBEX_THREADS")) {
        int v = std::atoi(e);
        if (v >= 1) return std::min(v, 256);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(std::min(hc, 64u)) : 1;
}

// Evaluates chunk(c) for c = 0..chunks-1 on up to thread_count() workers and
// sums the results in index order, so the total is bitwise identical for any
// thread count. chunk must not throw.
template <class F>
double ordered_chunk_sum(int chunks, F&& chunk) {
    std::vector<double> part(static_cast<std::size_t>(chunks), 0.0);
    int nt = std::min(thread_count(), chunks);
    if (nt <= 1) {
        for (int c = 0; c < chunks; ++c) part[static_cast<std::size_t>(c)] = chunk(c);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nt));
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&] {
                for (int c = next.fetch_add(1); c < chunks; c = next.fetch_add(1))
                    part[static_cast<std::size_t>(c)] = chunk(c);
            });
        for (auto& th : pool) th.join();
    }
    double s = 0;
    for (double v : part) s += v;
    return s;
}

}  // namespace sobex

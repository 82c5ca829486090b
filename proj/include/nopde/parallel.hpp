#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace nopde {

/// Runs fn(i) for i in [0, count) on up to n_threads threads. Each index is
/// processed exactly once; callers must write only to per-index slots so the
/// result is identical for any thread count.
template <typename Fn>
void parallel_for(std::size_t count, int n_threads, Fn&& fn) {
    if (count == 0) return;
    if (n_threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(n_threads), count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace nopde

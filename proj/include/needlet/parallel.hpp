#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace needlet {

/// Run fn(i) for i in [0, count). Each task writes only to its own output
/// slot, so results are identical for any thread count; reductions stay with
/// the caller, in index order.
inline void for_each_index(std::size_t count, int threads,
                           const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), count));
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace needlet

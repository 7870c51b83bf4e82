#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "rng.hpp"

namespace ppmc {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct ReplicaOutcome {
    double value = 0.0;
    std::uint64_t cost = 0;
    std::uint64_t T = 0;
    bool exhausted = false;
};

/// Runs R independent replicas on a fixed-size worker pool. Replica r draws
/// from Rng::substream(seed, r + stream_offset), so results are a pure
/// function of (seed, r) and identical for every thread count. Aggregation
/// happens in replica-index order.
template <class Fn>
std::vector<ReplicaOutcome> run_replicas(std::uint64_t replicas, int threads, std::uint64_t seed,
                                         Fn&& fn, std::uint64_t stream_offset = 1) {
    std::vector<ReplicaOutcome> results(replicas);
    const int workers = std::min<std::uint64_t>(static_cast<std::uint64_t>(resolve_threads(threads)),
                                                replicas == 0 ? 1 : replicas);
    if (workers <= 1) {
        for (std::uint64_t r = 0; r < replicas; ++r) {
            Rng rng = Rng::substream(seed, r + stream_offset);
            results[r] = fn(r, rng);
        }
        return results;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::uint64_t r = next.fetch_add(1, std::memory_order_relaxed);
                if (r >= replicas) return;
                Rng rng = Rng::substream(seed, r + stream_offset);
                results[r] = fn(r, rng);
            }
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

} // namespace ppmc

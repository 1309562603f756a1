#pragma once

// Replication scheduler: work-stealing over replication indices with
// results stored by index, so the aggregate is independent of the worker
// count and of scheduling order.

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace poisbound {

/// Evaluate fn(rep) for rep = 0..reps-1 on `workers` threads and return
/// the results ordered by replication index.
template <typename Fn>
auto map_reps(std::uint64_t reps, unsigned workers, Fn&& fn)
    -> std::vector<decltype(fn(std::uint64_t{}))> {
    using T = decltype(fn(std::uint64_t{}));
    std::vector<T> out(reps);
    if (workers <= 1) {
        for (std::uint64_t rep = 0; rep < reps; ++rep) out[rep] = fn(rep);
        return out;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        while (true) {
            const std::uint64_t rep = next.fetch_add(1);
            if (rep >= reps) return;
            try {
                out[rep] = fn(rep);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace poisbound

#pragma once

// Deterministic parallel trial loop. Trial i always sees RngStream(seed, i);
// workers own contiguous index ranges and their integer accumulators are
// merged by summation, so results do not depend on the worker count.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace usk {

inline unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs body(acc, trial) for trial in [0, trials) and merges worker
/// accumulators with merge(into, from). `init` is copied per worker.
template <class Acc, class Body, class Merge>
Acc parallel_trials(std::uint64_t trials, unsigned threads, const Acc& init, Body body, Merge merge) {
    const unsigned workers =
        static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(resolve_threads(threads), trials)));
    if (workers <= 1) {
        Acc acc = init;
        for (std::uint64_t t = 0; t < trials; ++t) body(acc, t);
        return acc;
    }
    std::vector<Acc> partial(workers, init);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const std::uint64_t begin = trials * w / workers;
            const std::uint64_t end = trials * (w + 1) / workers;
            pool.emplace_back([&, w, begin, end] {
                try {
                    for (std::uint64_t t = begin; t < end; ++t) body(partial[w], t);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    Acc acc = init;
    for (auto& p : partial) merge(acc, p);
    return acc;
}

}  // namespace usk

#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace belieflab {

inline int default_parallelism() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Evaluates fn(0..count-1), possibly across threads.  Each index writes its
// own slot, so the result is independent of scheduling; callers that reduce in
// index order therefore get bit-identical aggregates at any parallelism.
template <typename Result>
std::vector<Result> parallel_map(long count, int parallelism,
                                 const std::function<Result(long)>& fn) {
    std::vector<Result> results(count);
    if (parallelism <= 0) parallelism = default_parallelism();
    if (parallelism > count) parallelism = static_cast<int>(count);
    if (parallelism <= 1) {
        for (long i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<long> next(0);
    std::vector<std::thread> workers;
    workers.reserve(parallelism);
    for (int t = 0; t < parallelism; ++t)
        workers.emplace_back([&]() {
            for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                results[i] = fn(i);
        });
    for (auto& w : workers) w.join();
    return results;
}

}  // namespace belieflab

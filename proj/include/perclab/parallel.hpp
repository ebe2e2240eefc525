#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace perclab {

// Worker count: PERCLAB_THREADS if set (>= 1), otherwise hardware concurrency.
inline unsigned worker_count() {
    if (const char* env = std::getenv("PERCLAB_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return static_cast<unsigned>(n);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(acc, replica) over replicas [first, last) split across workers, each with its own
// accumulator made by make(); accumulators are merged in worker order with merge(into, from).
// Every replica's randomness is keyed by its index, so results do not depend on the split.
template <class Make, class Body, class Merge>
auto replicate(std::uint64_t first, std::uint64_t last, Make make, Body body, Merge merge) {
    using Acc = decltype(make());
    const std::uint64_t total = last > first ? last - first : 0;
    const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), std::max<std::uint64_t>(total / 64, 1)));
    if (workers <= 1) {
        Acc acc = make();
        for (std::uint64_t r = first; r < last; ++r) body(acc, r);
        return acc;
    }
    std::vector<Acc> accs;
    accs.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) accs.push_back(make());
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t a = first + total * w / workers, b = first + total * (w + 1) / workers;
        threads.emplace_back([&, w, a, b] {
            for (std::uint64_t r = a; r < b; ++r) body(accs[w], r);
        });
    }
    for (auto& t : threads) t.join();
    for (unsigned w = 1; w < workers; ++w) merge(accs[0], accs[w]);
    return std::move(accs[0]);
}

}  // namespace perclab

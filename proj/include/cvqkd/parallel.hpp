#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace cvqkd {

/// Counts how many of `trials` independent predicate evaluations succeed,
/// dispatching chunks across hardware threads. Each evaluation must depend
/// only on its index, so the count is order-independent and the result is
/// identical to a serial loop.
template <typename Fn>
std::uint64_t parallel_count(std::uint64_t trials, Fn&& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned workers = hw == 0 ? 1 : hw;
    if (workers == 1 || trials < 256) {
        std::uint64_t count = 0;
        for (std::uint64_t i = 0; i < trials; ++i) {
            if (fn(i)) ++count;
        }
        return count;
    }
    std::vector<std::uint64_t> counts(workers, 0);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            const std::uint64_t lo = trials * w / workers;
            const std::uint64_t hi = trials * (w + 1) / workers;
            std::uint64_t local = 0;
            for (std::uint64_t i = lo; i < hi; ++i) {
                if (fn(i)) ++local;
            }
            counts[w] = local;
        });
    }
    for (auto& t : threads) t.join();
    std::uint64_t total = 0;
    for (std::uint64_t c : counts) total += c;
    return total;
}

/// Fills `out[i] = fn(i)` for i in [0, out.size()), in parallel. Results are
/// stored by index, so output order never depends on scheduling.
template <typename T, typename Fn>
void parallel_fill(std::vector<T>& out, Fn&& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned workers = hw == 0 ? 1 : hw;
    const std::size_t n = out.size();
    if (workers == 1 || n < 16) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            const std::size_t lo = n * w / workers;
            const std::size_t hi = n * (w + 1) / workers;
            for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
        });
    }
    for (auto& t : threads) t.join();
}

} // namespace cvqkd

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace barankin {

inline std::atomic<unsigned>& worker_override() {
    static std::atomic<unsigned> v{0};
    return v;
}

// Pins the worker count process-wide; 0 restores the default.
inline void set_worker_count(unsigned n) { worker_override() = n; }

// Explicit setting, else BARANKIN_THREADS, else hardware concurrency.
inline unsigned worker_count() {
    if (const unsigned o = worker_override().load()) return o;
    if (const char* env = std::getenv("BARANKIN_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

// Runs body(i) for i in [0, n). Each index is handled by exactly one worker,
// so results written per index do not depend on the worker count.
template <class Body>
void parallel_for(std::size_t n, Body body, unsigned workers = 0) {
    if (workers == 0) workers = worker_count();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    for (auto& t : pool) t.join();
}

// Splits [0, n) into fixed-size blocks, accumulates each block in index
// order, then merges blocks in block order. Bit-identical for any worker count.
template <class Acc, class Make, class Body, class Merge>
Acc block_reduce(std::size_t n, std::size_t block, Make make, Body body, Merge merge,
                 unsigned workers = 0) {
    if (block == 0) block = 1;
    const std::size_t nblocks = (n + block - 1) / block;
    std::vector<Acc> parts;
    parts.reserve(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) parts.push_back(make());
    parallel_for(
        nblocks,
        [&](std::size_t b) {
            const std::size_t lo = b * block, hi = std::min(n, lo + block);
            for (std::size_t i = lo; i < hi; ++i) body(parts[b], i);
        },
        workers);
    Acc total = make();
    for (auto& p : parts) merge(total, p);
    return total;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for an independent stream identified by (seed, counter).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t counter) {
    return splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
}

}  // namespace barankin

#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace lsl {

// Default worker count: LSL_THREADS env var, else hardware concurrency.
inline int default_threads() {
    if (const char* env = std::getenv("LSL_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Runs fn(shard, begin, end) over [0, count) split into contiguous shards.
// Shards are fixed by `threads` alone, never by scheduling, so any
// deterministic per-shard computation merges deterministically.
inline void parallel_shards(std::size_t count,
                            int threads,
                            const std::function<void(int, std::size_t, std::size_t)>& fn) {
    if (threads < 1) threads = 1;
    std::size_t nshards = static_cast<std::size_t>(threads);
    if (nshards > count) nshards = count ? count : 1;
    if (nshards <= 1) {
        fn(0, 0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nshards);
    std::size_t chunk = count / nshards;
    std::size_t extra = count % nshards;
    std::size_t begin = 0;
    for (std::size_t s = 0; s < nshards; ++s) {
        std::size_t len = chunk + (s < extra ? 1 : 0);
        std::size_t end = begin + len;
        pool.emplace_back(fn, static_cast<int>(s), begin, end);
        begin = end;
    }
    for (auto& t : pool) t.join();
}

}  // namespace lsl

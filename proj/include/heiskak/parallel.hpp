#pragma once

// Deterministic data parallelism. Work is split into a fixed number of
// chunks that does not depend on the thread count; partial results are merged
// in chunk order, so outputs are bit-identical for any HEISKAK_THREADS.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace heiskak {

/// Worker count: HEISKAK_THREADS if set and positive, else the hardware count.
inline unsigned thread_count() {
    if (const char* env = std::getenv("HEISKAK_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(chunk) for chunk in [0, n_chunks) on up to thread_count() threads.
template <typename Fn>
void parallel_for(std::size_t n_chunks, Fn&& fn) {
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(thread_count(), n_chunks));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_chunks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_chunks) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Maps each chunk to a partial value and folds them left-to-right.
template <typename T, typename MapFn, typename MergeFn>
T parallel_map_reduce(std::size_t n_chunks, T init, MapFn&& map, MergeFn&& merge) {
    std::vector<T> partial(n_chunks, init);
    parallel_for(n_chunks, [&](std::size_t i) { partial[i] = map(i); });
    T acc = std::move(init);
    for (auto& p : partial) merge(acc, p);
    return acc;
}

/// [begin, end) of chunk i when n items are split into n_chunks pieces.
inline std::pair<std::size_t, std::size_t> chunk_range(std::size_t n, std::size_t n_chunks,
                                                       std::size_t i) {
    const std::size_t base = n / n_chunks;
    const std::size_t extra = n % n_chunks;
    const std::size_t begin = i * base + std::min(i, extra);
    return {begin, begin + base + (i < extra ? 1 : 0)};
}

}  // namespace heiskak

#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mfglab {

/// Worker cap for data-parallel kernels; 0 restores the default (hardware
/// concurrency).
void set_thread_count(int threads);
int thread_count();

/// Work is cut into fixed-size chunks whose boundaries depend only on
/// `count` and `chunk`, never on the number of workers; reductions combine
/// per-chunk partials in chunk order, so results are schedule independent.
inline long chunk_count(long count, long chunk) { return count <= 0 ? 0 : (count + chunk - 1) / chunk; }

/// Calls fn(chunk_index, begin, end) for every chunk, possibly concurrently.
template <class Fn>
void parallel_chunks(long count, long chunk, Fn&& fn) {
    const long chunks = chunk_count(count, chunk);
    const int workers = static_cast<int>(std::min<long>(thread_count(), chunks));
    if (workers <= 1) {
        for (long c = 0; c < chunks; ++c) fn(c, c * chunk, std::min(count, (c + 1) * chunk));
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (long c = next++; c < chunks; c = next++) {
            try {
                fn(c, c * chunk, std::min(count, (c + 1) * chunk));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace mfglab

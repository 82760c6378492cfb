#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cps {

// Runs fn(i) for i in [0, count) on up to `threads` workers, chunked by
// index blocks. Results must be written to per-index slots so the outcome
// does not depend on the thread count. The first exception thrown by a
// worker is rethrown on the caller thread.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (count == 0) return;
    if (threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    unsigned workers = threads;
    if (static_cast<std::size_t>(workers) > count)
        workers = static_cast<unsigned>(count);

    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mutex;

    std::size_t chunk = (count + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
        std::size_t begin = static_cast<std::size_t>(t) * chunk;
        std::size_t end = begin + chunk < count ? begin + chunk : count;
        if (begin >= end) break;
        pool.emplace_back([&, begin, end]() {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Thread count resolution: explicit argument wins, then the
// COPULA_SCREEN_THREADS environment variable, then the hardware count.
unsigned resolve_threads(unsigned requested);

} // namespace cps

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hhepi {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work is handed
/// out by index, so any output written to slot i is independent of the
/// schedule. The first exception thrown by a worker is rethrown.
template<class Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body)
{
    const std::size_t workers = std::min<std::size_t>(std::max(1U, threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_lock);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(work);
    }
    work();
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

/// Thread count from an explicit request, else $HHE_THREADS, else all cores.
unsigned resolve_threads(unsigned requested);

}  // namespace hhepi

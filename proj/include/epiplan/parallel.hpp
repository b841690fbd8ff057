#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace epiplan {

// Number of workers used by parallel_for; 0 means hardware concurrency.
void set_worker_count(unsigned workers);
unsigned worker_count();

namespace detail {
inline thread_local bool in_parallel_region = false;
}

// Calls fn(i) for every i in [0, n) across the worker pool. Work items are
// claimed dynamically, so callers must write results into slot i rather than
// accumulate in completion order. The first exception thrown is rethrown.
// Nested calls run serially on the calling worker.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = detail::in_parallel_region
                                 ? 1u
                                 : static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        const bool outer = detail::in_parallel_region;
        detail::in_parallel_region = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
            }
        }
        detail::in_parallel_region = outer;
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace epiplan

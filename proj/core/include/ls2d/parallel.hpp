#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace ls2d {

/// Runs fn(i) for i in [0, n) on up to nthreads workers. nthreads <= 1 runs
/// inline. Work items must be independent; results must not depend on the
/// execution order (all users write to disjoint slots).
inline void parallel_for(long n, int nthreads, const std::function<void(long)>& fn) {
    if (n <= 0) return;
    if (nthreads <= 0) nthreads = static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads <= 1 || n == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    nthreads = static_cast<int>(std::min<long>(nthreads, n));
    std::atomic<long> next{0};
    std::vector<std::thread> workers;
    workers.reserve(nthreads);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < nthreads; ++t) {
        workers.emplace_back([&]() {
            for (;;) {
                long i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ls2d

#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace strataflow {

// n <= 0 selects the hardware concurrency.
void set_default_threads(int n);
int default_threads();

// Static partition of [0, n) over worker threads. Results must be written by
// index so the output does not depend on the thread count.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    if (threads <= 0) threads = default_threads();
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int i = t; i < n; i += threads) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace strataflow

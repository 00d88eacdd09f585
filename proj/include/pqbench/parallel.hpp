#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pqbench {

// Worker cap from PQBENCH_THREADS; defaults to 1 (fully serial).
inline int thread_count() {
    const char* s = std::getenv("PQBENCH_THREADS");
    if (!s) return 1;
    int n = std::atoi(s);
    return n > 0 ? n : 1;
}

// Runs fn(i) for i in [0, total). Each unit must be independent and write
// only to its own slot so results do not depend on the worker count.
template <typename Fn>
void parallel_for(int total, Fn&& fn) {
    const int workers = std::min(thread_count(), total);
    if (workers <= 1) {
        for (int i = 0; i < total; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const int chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk;
        const int end = std::min(total, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn, &first_error, &error_mutex] {
            try {
                for (int i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pqbench

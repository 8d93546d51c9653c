#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace shearscope {

namespace detail {
inline std::atomic<int>& thread_override() {
    static std::atomic<int> n{0};
    return n;
}
}  // namespace detail

// 0 restores the default (SHEARSCOPE_THREADS, then hardware concurrency).
inline void set_threads(int n) { detail::thread_override() = std::max(0, n); }

inline int thread_count() {
    if (int n = detail::thread_override(); n > 0) return n;
    if (const char* env = std::getenv("SHEARSCOPE_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs f(i) for i in [0, n) on a transient pool. Callers write results per
// index and reduce afterwards in index order, which keeps output independent of
// scheduling. The first exception thrown by a worker is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(thread_count()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr err;
    std::mutex err_mu;
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        try {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                f(i);
            }
        } catch (...) {
            std::lock_guard lk(err_mu);
            if (!err) err = std::current_exception();
            next = n;
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace shearscope

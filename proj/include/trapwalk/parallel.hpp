#ifndef TRAPWALK_PARALLEL_HPP
#define TRAPWALK_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace trapwalk {

// Runs fn(i) for i in [0, count) on up to `jobs` threads and returns the
// results indexed by i. Work items must derive their randomness from their
// index (see rng.hpp), never from a shared generator, so the output is
// identical for any job count.
template <typename T>
std::vector<T> parallel_map(std::size_t count, unsigned jobs,
                            const std::function<T(std::size_t)>& fn) {
    std::vector<T> results(count);
    if (count == 0) return results;
    unsigned hw = std::thread::hardware_concurrency();
    if (jobs == 0) jobs = hw ? hw : 1;
    if (jobs > count) jobs = static_cast<unsigned>(count);

    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

} // namespace trapwalk

#endif

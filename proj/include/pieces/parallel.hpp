#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace pieces {

namespace detail {
inline bool& in_worker_flag() {
    thread_local bool flag = false;
    return flag;
}
}  // namespace detail

// Runs fn(i) for i in [0, count) on up to `workers` threads. Tasks own their
// output slots, so no synchronization beyond the shared index is needed.
// Nested calls from inside a worker run serially.
template <class Fn>
void parallel_for(std::size_t count, const Fn& fn, unsigned workers = 0) {
    if (count == 0) return;
    if (workers == 0) workers = std::thread::hardware_concurrency();
    if (workers <= 1 || count == 1 || detail::in_worker_flag()) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&]() {
            detail::in_worker_flag() = true;
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace pieces

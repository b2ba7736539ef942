#include "recsmith/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace recsmith {

namespace {
std::size_t g_max_threads = 0;  // 0 = hardware default

std::size_t effective_threads() {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return (g_max_threads == 0) ? hw : std::min(g_max_threads, hw);
}
}  // namespace

void set_max_threads(std::size_t n) { g_max_threads = n; }

std::size_t max_threads() { return effective_threads(); }

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t)>& fn) {
    if (begin >= end) return;
    const std::size_t count = end - begin;
    const std::size_t workers = std::min(effective_threads(), count);
    if (workers <= 1 || count < 2) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }

    // Block-cyclic hand-out via a shared cursor; each claimed block is a
    // contiguous index range so per-index writes stay disjoint.
    const std::size_t block = std::max<std::size_t>(1, count / (workers * 8));
    std::atomic<std::size_t> cursor{begin};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};

    auto worker = [&]() {
        for (;;) {
            const std::size_t lo = cursor.fetch_add(block);
            if (lo >= end) return;
            const std::size_t hi = std::min(end, lo + block);
            for (std::size_t i = lo; i < hi; ++i) {
                if (failed.load(std::memory_order_relaxed)) return;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) first_error = std::current_exception();
                    return;
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failed && first_error) std::rethrow_exception(first_error);
}

}  // namespace recsmith

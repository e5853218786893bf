#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace mgfnorm {

/// Worker count actually used for a requested value (0 or negative means
/// "all hardware threads").
inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/**
 * @brief Run body(i) for i in [0, count) on `workers` threads.
 *
 * Work is handed out through a shared atomic counter; the body must write
 * its result into a slot addressed by i. Because every result is a pure
 * function of its index (per-replicate RNG substreams brings the randomness
 * in through the index too), the output is identical for any worker count.
 * The first exception thrown by any body is rethrown on the caller.
 */
template <typename Body>
void parallel_for(std::int64_t count, int workers, Body&& body) {
    workers = resolve_workers(workers);
    if (workers <= 1 || count <= 1) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto worker = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count || failed.load(std::memory_order_relaxed)) return;
            try {
                body(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace mgfnorm

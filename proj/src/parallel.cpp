#include "morsekit/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace morsekit {

unsigned thread_count() {
    static const unsigned count = [] {
        if (const char* env = std::getenv("MORSEKIT_THREADS")) {
            const long parsed = std::strtol(env, nullptr, 10);
            if (parsed >= 1) return static_cast<unsigned>(parsed);
            return 1u;
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? hw : 1u;
    }();
    return count;
}

namespace detail {

void parallel_for_impl(std::size_t n, void (*body)(std::size_t, void*), void* ctx) {
    const unsigned threads = thread_count();
    // Serial fallback for small grids: thread spawn costs more than the work.
    constexpr std::size_t min_parallel = 512;
    if (threads <= 1 || n < min_parallel) {
        for (std::size_t i = 0; i < n; ++i) body(i, ctx);
        return;
    }
    const unsigned used = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(used);
    for (unsigned t = 0; t < used; ++t) {
        pool.emplace_back([=] {
            // Contiguous slabs: slab boundaries depend only on (n, used).
            const std::size_t begin = n * t / used;
            const std::size_t end = n * (t + 1) / used;
            for (std::size_t i = begin; i < end; ++i) body(i, ctx);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace detail
} // namespace morsekit

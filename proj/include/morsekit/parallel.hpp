#pragma once

#include <cstddef>

namespace morsekit {

/// Number of worker threads used by parallel_for: the MORSEKIT_THREADS
/// environment variable when set (clamped to >= 1), otherwise the hardware
/// concurrency. Read once per process.
unsigned thread_count();

namespace detail {
void parallel_for_impl(std::size_t n, void (*body)(std::size_t, void*), void* ctx);
} // namespace detail

/// Apply fn(i) for i in [0, n). Iterations must be independent; each index is
/// executed exactly once and writes only its own slot, so results are bitwise
/// identical to the serial loop regardless of thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    auto trampoline = [](std::size_t i, void* ctx) { (*static_cast<Fn*>(ctx))(i); };
    detail::parallel_for_impl(n, trampoline, &fn);
}

} // namespace morsekit

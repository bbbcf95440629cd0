#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace aquastream {

/// Milliseconds since the Unix epoch. All event-time arithmetic in the
/// platform uses this unit.
using TimestampMs = std::int64_t;

/// Wall clock in ms, clamped so successive calls never go backward.
inline TimestampMs now_wall_ms() {
    static std::atomic<TimestampMs> last{0};
    auto now = std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
                   .count();
    TimestampMs prev = last.load(std::memory_order_relaxed);
    while (now < prev) {
        now = prev;
        prev = last.load(std::memory_order_relaxed);
    }
    last.store(now, std::memory_order_relaxed);
    return now;
}

/// Steady clock in ms, for intervals and pacing.
inline std::int64_t steady_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

inline std::int64_t steady_us() {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace aquastream

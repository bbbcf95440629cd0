#pragma once

#include <atomic>
#include <cstdint>
#include <string>

#include "aquastream/log.hpp"
#include "aquastream/workload.hpp"

namespace aquastream {

enum class DriveSpeed {
    Realtime,  // pace appends by the trace's arrival timestamps
    Max,       // append as fast as possible
};

struct DriveOptions {
    DriveSpeed speed = DriveSpeed::Max;
    /// Re-inject the trace's measurements this many times in total, with
    /// seq and time offsets applied per round (updates go in only once).
    /// Used to stretch a fixed trace over long benchmark runs.
    std::uint64_t loops = 1;
    /// When > 0, pace all injectors to this aggregate records/second.
    double throttle_rps = 0.0;
    /// Optional early-stop; checked between appends.
    const std::atomic<bool>* stop = nullptr;
};

struct InjectionReport {
    std::uint64_t measurements_appended = 0;
    std::uint64_t updates_appended = 0;
    std::int64_t wall_ms = 0;
    bool aborted = false;
    std::string error;

    std::uint64_t total() const { return measurements_appended + updates_appended; }
};

/// Append every trace event to its topic in trace order, one injector
/// thread per partition. Measurements get ingest_time stamped at append.
InjectionReport drive(const Trace& trace, Log& log, const Topic& measurements, const Topic& updates,
                      const DriveOptions& options = {});

}  // namespace aquastream

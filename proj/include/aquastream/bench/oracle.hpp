#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aquastream/engine/config.hpp"
#include "aquastream/log.hpp"
#include "aquastream/workload.hpp"

namespace aquastream {

/// Deterministic view of one enriched record: everything except wall-clock
/// fields, which legitimately differ between runs.
struct CanonicalRecord {
    std::string device;
    std::uint64_t seq = 0;
    TimestampMs event_time = 0;
    std::string observable;
    double value = 0.0;
    std::vector<EnrichedAttribute> attributes;

    bool operator==(const CanonicalRecord&) const = default;
};

struct CanonicalOutput {
    std::vector<CanonicalRecord> enriched;                         // sorted by (device, seq)
    std::vector<std::pair<std::string, std::uint64_t>> dead_lettered;  // sorted (device, seq)
    std::uint64_t duplicate_records = 0;  // physical duplicates found in the topics
};

/// Reference enrichment computed by single-threaded brute force, independent
/// of the engine and the attribute store: full per-key version lists scanned
/// linearly for every join. Assumes the quiescent-log schedule the
/// verification harness uses (the whole trace injected before the engine
/// runs), under which each partition consumes its entire update stream
/// before its measurements.
CanonicalOutput compute_oracle(const Trace& trace, const EngineConfig& config);

/// Decode and canonicalize what the engine actually wrote to its output
/// topics, flagging any physical (device, seq) duplicates.
CanonicalOutput canonicalize_results(Log& log, const Topic& results, const Topic& dead_letter);

struct Divergence {
    bool diverged = false;
    std::string description;
};

/// First difference between two canonical outputs, if any.
Divergence compare_outputs(const CanonicalOutput& expected, const CanonicalOutput& actual);

}  // namespace aquastream

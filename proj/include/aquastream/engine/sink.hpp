#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>

#include "aquastream/log.hpp"
#include "aquastream/types.hpp"

namespace aquastream {

/// Compact set of u64 values stored as merged inclusive intervals. Sequence
/// numbers are near-contiguous per device, so this stays tiny even for long
/// runs (loss gaps add one interval each).
class IntervalSet {
public:
    /// Returns true if v was newly inserted.
    bool insert(std::uint64_t v);
    bool contains(std::uint64_t v) const;

    std::size_t interval_count() const { return intervals_.size(); }
    std::uint64_t max_value() const;  // only valid when !empty()
    bool empty() const { return intervals_.empty(); }

private:
    std::map<std::uint64_t, std::uint64_t> intervals_;  // start -> end, inclusive, disjoint
};

/// Idempotent output sink. Appends are keyed by (device, seq); a key already
/// present in the dedup index is suppressed, which makes replay after
/// recovery exactly-once. The index is backed by the output topics
/// themselves and rebuilt by scanning them from the checkpointed positions.
class ResultSink {
public:
    ResultSink(Log& log, Topic results, Topic dead_letter);

    /// Rebuild the dedup index from the two output topics, starting at the
    /// given offsets (the positions recorded by the last checkpoint; records
    /// before them belong to inputs that can no longer be replayed).
    void rebuild(std::uint32_t partition, std::uint64_t results_from, std::uint64_t dead_letter_from);

    /// Append to the results topic unless (device, seq) was already emitted.
    /// Returns true when appended.
    bool emit(const EnrichedMeasurement& e);

    /// Route a measurement to the dead-letter topic, with the same dedup.
    bool dead_letter(const Measurement& m);

    const std::unordered_map<std::string, std::uint64_t>& high_watermarks() const { return hwm_; }

    std::uint64_t appended() const { return appended_; }
    std::uint64_t suppressed() const { return suppressed_; }

private:
    bool mark_seen(const DeviceId& device, std::uint64_t seq);

    Log& log_;
    Topic results_;
    Topic dead_letter_;
    std::unordered_map<std::string, IntervalSet> seen_;  // device -> emitted seqs (both topics)
    std::unordered_map<std::string, std::uint64_t> hwm_;  // device -> highest emitted seq
    std::uint64_t appended_ = 0;
    std::uint64_t suppressed_ = 0;
};

}  // namespace aquastream

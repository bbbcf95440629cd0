#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "aquastream/attribute_store.hpp"
#include "aquastream/engine/checkpoint.hpp"
#include "aquastream/engine/config.hpp"
#include "aquastream/engine/enrich.hpp"
#include "aquastream/engine/sink.hpp"
#include "aquastream/log.hpp"

namespace aquastream {

/// Thrown by fault hooks to simulate an abrupt worker death: the worker
/// unwinds without a final checkpoint, exactly like a crash.
class WorkerKilled : public std::runtime_error {
public:
    explicit WorkerKilled(const std::string& what) : std::runtime_error(what) {}
};

/// Crash-injection points for fault-tolerance tests. All hooks are optional.
struct FaultHooks {
    /// Called once after recovery (with 0), then after each processed
    /// measurement (1-based running count). Throw WorkerKilled to crash.
    std::function<void(std::uint64_t processed)> measurement_point;
    /// Forwarded to CheckpointStore: phases "written" and "renamed".
    std::function<void(const char* phase)> checkpoint_phase;
    /// Forwarded to RemoteStoreClient: runs before every store operation.
    std::function<void()> store_fault;
    /// Torn-checkpoint injection: truncate the temp file to this size.
    std::optional<std::size_t> truncate_checkpoint_to;
};

struct WindowCounts {
    std::uint64_t emitted = 0;             // appended to the results topic
    std::uint64_t processed = 0;           // measurements run through enrich
    std::uint64_t historical_lookups = 0;  // remote point-in-time reads
};

struct WorkerMetrics {
    std::unordered_map<std::int64_t, WindowCounts> windows;  // wall-clock second -> counts
    std::vector<float> latency_ms;                           // one sample per emitted record
    EnrichStats enrich;
    std::uint64_t emitted = 0;
    std::uint64_t suppressed = 0;
    std::uint64_t dead_lettered = 0;
    std::uint64_t updates_applied = 0;
    std::uint64_t updates_skipped_conflict = 0;
    std::uint64_t store_retries = 0;
    std::uint64_t checkpoints_written = 0;
};

/// One partition's stateful enrichment worker. Owns the partition
/// exclusively: merges the update and measurement streams (updates drained
/// with priority before each measurement batch), enriches, emits through the
/// idempotent sink, and checkpoints periodically. Construction runs the
/// recovery procedure: load the last checkpoint, rebuild the local cache
/// from the attribute store, and resume from the checkpointed offsets.
class PartitionWorker {
public:
    PartitionWorker(std::uint32_t partition, const EngineConfig& config, Log& log, AttributeStore& store,
                    std::int64_t store_latency_ms, FaultHooks hooks = {});

    /// Consume until `stop` becomes true (checked at batch boundaries),
    /// writing a final checkpoint on graceful exit. Throws WorkerKilled when
    /// a fault hook fires.
    void run(const std::atomic<bool>& stop);

    std::uint32_t partition() const { return partition_; }

    /// Live positions, readable from other threads.
    std::uint64_t measurement_position() const { return meas_pos_.load(std::memory_order_acquire); }
    std::uint64_t update_position() const { return upd_pos_.load(std::memory_order_acquire); }

    /// True when both input streams are consumed up to their end offsets.
    bool caught_up() const;

    WorkerMetrics& metrics() { return metrics_; }
    const LocalAttributeState& local_state() const { return state_; }
    const ResultSink& sink() const { return sink_; }
    std::uint64_t next_epoch() const { return epoch_next_; }

    /// Write a checkpoint now (also used by tests).
    Checkpoint write_checkpoint();

private:
    void recover();
    bool drain_updates(const std::atomic<bool>& stop);
    bool process_measurement(const Measurement& m, const std::atomic<bool>& stop);

    std::uint32_t partition_;
    EngineConfig config_;
    Log& log_;
    RemoteStoreClient remote_;
    CheckpointStore ckpt_store_;
    Topic measurements_;
    Topic updates_;
    Topic results_;
    Topic dead_letter_;
    ResultSink sink_;
    LocalAttributeState state_;
    FaultHooks hooks_;
    WorkerMetrics metrics_;

    std::atomic<std::uint64_t> meas_pos_{0};
    std::atomic<std::uint64_t> upd_pos_{0};
    std::uint64_t epoch_next_ = 0;
    std::uint64_t processed_total_ = 0;
};

}  // namespace aquastream

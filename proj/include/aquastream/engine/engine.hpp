#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "aquastream/engine/worker.hpp"

namespace aquastream {

/// Supervisor for the per-partition workers: static 1:1 worker-to-partition
/// assignment, graceful stop at batch boundaries, and restart-after-crash
/// for fault-tolerance tests. Workers share nothing except the thread-safe
/// attribute store and the log.
class Engine {
public:
    enum class WorkerState { Idle, Running, Stopped, Killed, Failed };

    Engine(EngineConfig config, Log& log, AttributeStore& store, std::int64_t store_latency_ms);
    ~Engine();

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Install crash-injection hooks for one partition's next worker. Must
    /// be set before start()/restart_worker().
    void set_fault_hooks(std::uint32_t partition, FaultHooks hooks);

    void start();

    /// Graceful stop: workers finish their batch, write a final checkpoint
    /// and exit.
    void stop();

    /// Start a fresh worker on a partition whose previous worker died; it
    /// recovers from the last checkpoint and replays.
    void restart_worker(std::uint32_t partition);

    WorkerState worker_state(std::uint32_t partition) const;
    const std::string& worker_error(std::uint32_t partition) const;

    /// Wait until a worker's thread exits (e.g. after a fault hook killed
    /// it). Returns its final state.
    WorkerState join_worker(std::uint32_t partition);

    /// True when every running worker has consumed both input streams to
    /// their current end offsets.
    bool all_caught_up() const;

    /// Poll all_caught_up until it holds or the timeout elapses.
    bool wait_drained(std::int64_t timeout_ms) const;

    /// Merged metrics of all worker incarnations. Call after stop().
    std::vector<WorkerMetrics> collect_metrics();

    const EngineConfig& config() const { return config_; }

private:
    struct Slot {
        std::unique_ptr<PartitionWorker> worker;
        std::thread thread;
        std::atomic<bool> stop{false};
        std::atomic<WorkerState> state{WorkerState::Idle};
        std::string error;
        FaultHooks pending_hooks;
        std::vector<WorkerMetrics> retired;
    };

    void launch(Slot& slot, std::uint32_t partition);

    EngineConfig config_;
    Log& log_;
    AttributeStore& store_;
    std::int64_t store_latency_ms_;
    std::vector<std::unique_ptr<Slot>> slots_;
};

}  // namespace aquastream

#include "aquastream/engine/worker.hpp"

#include <chrono>
#include <thread>

#include "aquastream/time.hpp"
#include "aquastream/wire.hpp"

namespace aquastream {

namespace {

constexpr std::size_t kMeasurementBatch = 512;
constexpr std::size_t kUpdateBatch = 512;
constexpr std::chrono::milliseconds kIdleSleep{1};
constexpr std::chrono::milliseconds kRetrySleep{2};

/// Run f, retrying while the store reports an outage. Returns nullopt only
/// when a stop was requested mid-retry; the record is then left unconsumed.
template <typename F>
auto with_store_retry(const std::atomic<bool>& stop, WorkerMetrics& metrics, F&& f)
    -> std::optional<decltype(f())> {
    while (true) {
        try {
            return f();
        } catch (const StoreUnavailableError&) {
            ++metrics.store_retries;
            if (stop.load(std::memory_order_acquire)) return std::nullopt;
            std::this_thread::sleep_for(kRetrySleep);
        }
    }
}

}  // namespace

PartitionWorker::PartitionWorker(std::uint32_t partition, const EngineConfig& config, Log& log,
                                 AttributeStore& store, std::int64_t store_latency_ms, FaultHooks hooks)
    : partition_(partition),
      config_(config),
      log_(log),
      remote_(store, store_latency_ms),
      ckpt_store_(config.checkpoint_dir),
      measurements_(log.open_topic(config.topics.measurements)),
      updates_(log.open_topic(config.topics.updates)),
      results_(log.open_topic(config.topics.results)),
      dead_letter_(log.open_topic(config.topics.dead_letter)),
      sink_(log, results_, dead_letter_),
      hooks_(std::move(hooks)) {
    config_.validate();
    if (partition_ >= config_.partitions) throw ConfigError("worker partition out of range");
    if (measurements_.partitions != config_.partitions || updates_.partitions != config_.partitions) {
        throw ConfigError("input topic partition count does not match engine.partitions");
    }
    remote_.fault_hook = hooks_.store_fault;
    ckpt_store_.fault_hook = hooks_.checkpoint_phase;
    ckpt_store_.truncate_temp_to = hooks_.truncate_checkpoint_to;
}

void PartitionWorker::recover() {
    auto ckpt = ckpt_store_.load_latest(partition_);
    std::uint64_t results_from = 0;
    std::uint64_t dead_letter_from = 0;
    if (ckpt) {
        meas_pos_.store(ckpt->measurement_offset.offset, std::memory_order_release);
        upd_pos_.store(ckpt->update_offset.offset, std::memory_order_release);
        epoch_next_ = ckpt->epoch + 1;
        results_from = ckpt->results_offset;
        dead_letter_from = ckpt->dead_letter_offset;
    }
    sink_.rebuild(partition_, results_from, dead_letter_from);

    // Local cache comes from the store, not the checkpoint.
    state_.clear();
    const std::atomic<bool> never_stop{false};
    auto keys = with_store_retry(never_stop, metrics_,
                                 [&] { return remote_.scan_keys(partition_, config_.partitions); });
    for (const auto& key : *keys) {
        auto slots = with_store_retry(never_stop, metrics_, [&] { return remote_.get_latest_two(key); });
        state_.set(key, CachedSlots{slots->first, slots->second});
    }
}

bool PartitionWorker::drain_updates(const std::atomic<bool>& stop) {
    bool any = false;
    while (true) {
        std::uint64_t pos = upd_pos_.load(std::memory_order_relaxed);
        auto batch = log_.read(updates_, partition_, pos, kUpdateBatch);
        if (batch.empty()) return any;
        for (const auto& rec : batch) {
            AttributeUpdate update = wire::decode_attribute_update(rec.payload);
            auto applied = with_store_retry(stop, metrics_, [&] {
                try {
                    apply_update(state_, update, remote_, &metrics_.enrich);
                    return true;
                } catch (const StoreConflictError&) {
                    return false;  // poison update: skip, cache untouched
                }
            });
            if (!applied.has_value()) return any;  // stopping mid-retry
            if (*applied) {
                ++metrics_.updates_applied;
            } else {
                ++metrics_.updates_skipped_conflict;
            }
            upd_pos_.fetch_add(1, std::memory_order_release);
            any = true;
        }
        if (stop.load(std::memory_order_acquire)) return any;
    }
}

bool PartitionWorker::process_measurement(const Measurement& m, const std::atomic<bool>& stop) {
    std::uint64_t lookups_before = metrics_.enrich.historical_lookups;
    auto outcome =
        with_store_retry(stop, metrics_, [&] { return enrich(state_, m, config_, remote_, metrics_.enrich); });
    if (!outcome.has_value()) return false;  // stop requested mid-retry; not consumed

    std::int64_t window = now_wall_ms() / 1000;
    auto& counts = metrics_.windows[window];
    ++counts.processed;
    counts.historical_lookups += metrics_.enrich.historical_lookups - lookups_before;

    if (outcome->dead_letter) {
        if (sink_.dead_letter(m)) ++metrics_.dead_lettered;
        return true;
    }
    if (sink_.emit(outcome->record)) {
        ++metrics_.emitted;
        ++counts.emitted;
        metrics_.latency_ms.push_back(static_cast<float>(outcome->record.latency_ms));
        for (const auto& a : outcome->record.attributes) metrics_.enrich.count(a.provenance);
    } else {
        ++metrics_.suppressed;
    }
    return true;
}

Checkpoint PartitionWorker::write_checkpoint() {
    // Make this partition's output durable before the checkpoint that
    // declares it emitted.
    log_.flush_partition(results_, partition_);
    log_.flush_partition(dead_letter_, partition_);

    Checkpoint c;
    c.partition = partition_;
    c.measurement_offset = StreamOffset{measurements_.name, partition_, meas_pos_.load(std::memory_order_relaxed)};
    c.update_offset = StreamOffset{updates_.name, partition_, upd_pos_.load(std::memory_order_relaxed)};
    c.epoch = epoch_next_;
    for (const auto& [device, seq] : sink_.high_watermarks()) c.emitted_high_watermark[device] = seq;
    c.results_offset = log_.end_offset(results_, partition_);
    c.dead_letter_offset = log_.end_offset(dead_letter_, partition_);
    ckpt_store_.save(c);
    ++epoch_next_;
    ++metrics_.checkpoints_written;
    return c;
}

void PartitionWorker::run(const std::atomic<bool>& stop) {
    recover();
    if (hooks_.measurement_point) hooks_.measurement_point(0);

    std::int64_t last_ckpt = steady_ms();
    while (!stop.load(std::memory_order_acquire)) {
        bool any_updates = drain_updates(stop);

        std::uint64_t pos = meas_pos_.load(std::memory_order_relaxed);
        auto batch = log_.read(measurements_, partition_, pos, kMeasurementBatch);
        for (const auto& rec : batch) {
            Measurement m = wire::decode_measurement(rec.payload);
            if (!process_measurement(m, stop)) break;
            meas_pos_.fetch_add(1, std::memory_order_release);
            ++processed_total_;
            if (hooks_.measurement_point) hooks_.measurement_point(processed_total_);
        }

        if (batch.empty() && !any_updates) std::this_thread::sleep_for(kIdleSleep);

        if (steady_ms() - last_ckpt >= config_.checkpoint_interval_ms) {
            write_checkpoint();
            last_ckpt = steady_ms();
        }
    }
    write_checkpoint();
}

bool PartitionWorker::caught_up() const {
    return measurement_position() >= log_.end_offset(measurements_, partition_) &&
           update_position() >= log_.end_offset(updates_, partition_);
}

}  // namespace aquastream

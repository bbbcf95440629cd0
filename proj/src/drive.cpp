#include "aquastream/drive.hpp"

#include <algorithm>
#include <chrono>
#include <mutex>
#include <thread>
#include <vector>

#include "aquastream/partition.hpp"
#include "aquastream/time.hpp"
#include "aquastream/wire.hpp"

namespace aquastream {

namespace {

void sleep_until_steady(std::int64_t target_us) {
    std::int64_t now = steady_us();
    if (target_us > now) std::this_thread::sleep_for(std::chrono::microseconds(target_us - now));
}

}  // namespace

InjectionReport drive(const Trace& trace, Log& log, const Topic& measurements, const Topic& updates,
                      const DriveOptions& options) {
    if (measurements.partitions != updates.partitions) {
        throw LogError("measurement and update topics must have the same partition count");
    }
    const std::uint32_t partitions = measurements.partitions;
    const std::uint64_t loops = std::max<std::uint64_t>(options.loops, 1);

    // Per-round offsets keep seqs unique and event times increasing.
    TimestampMs round_span = trace.span_ms;
    for (const auto& ev : trace.events) round_span = std::max(round_span, ev.arrival + 1);
    const std::uint64_t seq_span = trace.max_seq + 1;

    // Route events to their partition up front; each injector then appends
    // its partition's slice in trace order.
    std::vector<std::vector<std::uint32_t>> slices(partitions);
    for (std::uint32_t i = 0; i < trace.events.size(); ++i) {
        const auto& ev = trace.events[i];
        const DeviceId& device =
            ev.is_measurement() ? ev.measurement().device : ev.update().key.device;
        slices[partition_for(device, partitions)].push_back(i);
    }

    std::atomic<std::uint64_t> meas_count{0};
    std::atomic<std::uint64_t> upd_count{0};
    std::atomic<std::uint64_t> paced_sequence{0};
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mu;

    const std::int64_t start_us = steady_us();

    auto inject = [&](std::uint32_t p) {
        try {
            for (std::uint64_t round = 0; round < loops; ++round) {
                for (std::uint32_t idx : slices[p]) {
                    if (failed.load(std::memory_order_relaxed)) return;
                    if (options.stop && options.stop->load(std::memory_order_relaxed)) return;
                    const auto& ev = trace.events[idx];
                    if (round > 0 && !ev.is_measurement()) continue;

                    if (options.throttle_rps > 0) {
                        std::uint64_t k = paced_sequence.fetch_add(1, std::memory_order_relaxed);
                        sleep_until_steady(start_us +
                                           static_cast<std::int64_t>(static_cast<double>(k) * 1e6 /
                                                                     options.throttle_rps));
                    } else if (options.speed == DriveSpeed::Realtime) {
                        TimestampMs arrival = ev.arrival + static_cast<TimestampMs>(round) * round_span;
                        sleep_until_steady(start_us + arrival * 1000);
                    }

                    if (ev.is_measurement()) {
                        Measurement m = ev.measurement();
                        m.seq += round * seq_span;
                        m.event_time += static_cast<TimestampMs>(round) * round_span;
                        m.ingest_time = now_wall_ms();
                        log.append(measurements, m.device.id, wire::encode(m));
                        meas_count.fetch_add(1, std::memory_order_relaxed);
                    } else {
                        log.append(updates, ev.update().key.device.id, wire::encode(ev.update()));
                        upd_count.fetch_add(1, std::memory_order_relaxed);
                    }
                }
            }
        } catch (const std::exception& e) {
            std::lock_guard lk(error_mu);
            if (!failed.exchange(true)) first_error = e.what();
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(partitions);
    for (std::uint32_t p = 0; p < partitions; ++p) threads.emplace_back(inject, p);
    for (auto& t : threads) t.join();

    InjectionReport report;
    report.measurements_appended = meas_count.load();
    report.updates_appended = upd_count.load();
    report.wall_ms = (steady_us() - start_us) / 1000;
    report.aborted = failed.load();
    report.error = first_error;
    return report;
}

}  // namespace aquastream

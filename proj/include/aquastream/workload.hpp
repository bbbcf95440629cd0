#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "aquastream/types.hpp"

namespace aquastream {

/// One enrichment attribute the fleet carries. Every key gets an initial
/// announcement at commissioning time 0; a positive mean interval adds
/// further updates as a Poisson process over the run.
struct AttributeSpec {
    std::string name;
    double mean_update_interval_s = 0.0;  // 0 = announce once, never update
};

/// Deterministic, seeded description of a water-grid telemetry workload.
/// The delay model is lognormal (heavy-tailed transport delay), loss is
/// i.i.d. drops, both emulating lossy LoRa uplinks.
struct FleetConfig {
    std::uint32_t devices = 10;
    double rate_per_device_hz = 1.0;
    double duration_s = 10.0;
    std::vector<AttributeSpec> attributes;
    double delay_median_ms = 200.0;
    double delay_sigma = 1.0;
    double loss_probability = 0.02;
    std::uint64_t seed = 1;
    /// Inject one update whose valid_from predates measurements that have
    /// already been delivered, exercising the historical/rebuild paths
    /// deterministically.
    bool late_commissioning = false;
    std::string observable = "water_level";

    void validate() const;
};

/// One timed injection event: a measurement or an attribute update, tagged
/// with its arrival time at the platform.
struct TraceEvent {
    TimestampMs arrival = 0;
    std::variant<Measurement, AttributeUpdate> payload;

    bool is_measurement() const { return std::holds_alternative<Measurement>(payload); }
    const Measurement& measurement() const { return std::get<Measurement>(payload); }
    const AttributeUpdate& update() const { return std::get<AttributeUpdate>(payload); }
};

/// Events ordered by arrival time. Event times are 0-based trace-local ms.
struct Trace {
    std::vector<TraceEvent> events;
    TimestampMs span_ms = 0;       // logical duration, for looped re-injection
    std::uint64_t max_seq = 0;     // highest measurement seq, for looped re-injection
    std::uint64_t measurements = 0;
    std::uint64_t updates = 0;
    std::uint64_t dropped = 0;     // generated but lost records
};

Trace generate_trace(const FleetConfig& config);

/// Trace file: a sequence of framed records, each a u8 type tag
/// (0 measurement, 1 update), u64 arrival timestamp, then the record fields.
void save_trace(const Trace& trace, const std::filesystem::path& path);
Trace load_trace(const std::filesystem::path& path);

std::vector<std::byte> encode_trace(const Trace& trace);

}  // namespace aquastream

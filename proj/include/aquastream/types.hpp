#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aquastream/time.hpp"

namespace aquastream {

/// Opaque sensor-device identifier. Non-empty, at most 64 bytes, stable for
/// the lifetime of a run.
struct DeviceId {
    std::string id;

    DeviceId() = default;
    explicit DeviceId(std::string s) : id(std::move(s)) {
        if (id.empty() || id.size() > 64) {
            throw std::invalid_argument("device id must be 1..64 bytes");
        }
    }

    auto operator<=>(const DeviceId&) const = default;
};

/// One sensor reading. `seq` is a per-device counter assigned in generation
/// order; it is the dedup key for exactly-once output. `event_time` is when
/// the reading was taken, `ingest_time` when it was appended to the log.
struct Measurement {
    DeviceId device;
    std::uint64_t seq = 0;
    TimestampMs event_time = 0;
    std::string observable;
    double value = 0.0;
    TimestampMs ingest_time = 0;

    bool operator==(const Measurement&) const = default;
};

/// Unit of attribute versioning and caching: one named attribute of one
/// device.
struct AttributeKey {
    DeviceId device;
    std::string attribute;

    auto operator<=>(const AttributeKey&) const = default;
};

/// A commissioned attribute value, valid from `valid_from` until superseded.
struct AttributeVersion {
    TimestampMs valid_from = 0;
    std::string value;

    bool operator==(const AttributeVersion&) const = default;
};

/// One entry of the attribute update stream.
struct AttributeUpdate {
    AttributeKey key;
    AttributeVersion version;

    bool operator==(const AttributeUpdate&) const = default;
};

/// Where an enrichment value came from: the cached current slot, the cached
/// previous slot, a remote point-in-time lookup, or nowhere.
enum class Provenance : std::uint8_t {
    Current = 0,
    Previous = 1,
    Historical = 2,
    Missing = 3,
};

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::Current: return "current";
        case Provenance::Previous: return "previous";
        case Provenance::Historical: return "historical";
        case Provenance::Missing: return "missing";
    }
    return "?";
}

struct EnrichedAttribute {
    std::string name;
    std::string value;
    Provenance provenance = Provenance::Missing;

    bool operator==(const EnrichedAttribute&) const = default;
};

/// A measurement joined with the attribute values valid at its event time.
/// `attributes` holds exactly one entry per configured enrichment attribute,
/// in configuration order.
struct EnrichedMeasurement {
    Measurement measurement;
    std::vector<EnrichedAttribute> attributes;
    TimestampMs enrich_time = 0;
    std::int64_t latency_ms = 0;

    bool operator==(const EnrichedMeasurement&) const = default;
};

/// Position of a record in the partitioned log. Offsets within a partition
/// are dense, starting at 0.
struct StreamOffset {
    std::string topic;
    std::uint32_t partition = 0;
    std::uint64_t offset = 0;

    bool operator==(const StreamOffset&) const = default;
};

struct AttributeKeyHash {
    std::size_t operator()(const AttributeKey& k) const {
        std::size_t h = std::hash<std::string>{}(k.device.id);
        return h ^ (std::hash<std::string>{}(k.attribute) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }
};

}  // namespace aquastream

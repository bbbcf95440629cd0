#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "aquastream/types.hpp"

namespace aquastream {

/// FNV-1a 64-bit over raw bytes. Bit-exact and trivially portable, so routing
/// decisions replay identically across processes and implementations.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::span<const std::byte> bytes) {
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

/// Deterministic key-to-partition mapping. Measurements and attribute
/// updates for the same device always co-locate because both streams are
/// keyed by the device id.
inline std::uint32_t partition_for(std::string_view key_bytes, std::uint32_t partitions) {
    return static_cast<std::uint32_t>(fnv1a64(key_bytes) % partitions);
}

inline std::uint32_t partition_for(const DeviceId& device, std::uint32_t partitions) {
    return partition_for(std::string_view(device.id), partitions);
}

}  // namespace aquastream

#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>

#include "aquastream/attribute_store.hpp"
#include "aquastream/engine/config.hpp"
#include "aquastream/types.hpp"

namespace aquastream {

/// The two most recent versions of one attribute, held in worker-local
/// memory so mildly late measurements avoid a remote lookup.
struct CachedSlots {
    std::optional<AttributeVersion> current;
    std::optional<AttributeVersion> previous;

    bool operator==(const CachedSlots&) const = default;
};

/// Per-partition cache: for every key the partition has seen, the same pair
/// get_latest_two would return at quiescence.
class LocalAttributeState {
public:
    const CachedSlots* find(const AttributeKey& key) const {
        auto it = slots_.find(key);
        return it == slots_.end() ? nullptr : &it->second;
    }

    void set(const AttributeKey& key, CachedSlots slots) { slots_[key] = std::move(slots); }

    std::size_t size() const { return slots_.size(); }
    void clear() { slots_.clear(); }

    auto begin() const { return slots_.begin(); }
    auto end() const { return slots_.end(); }

private:
    std::unordered_map<AttributeKey, CachedSlots, AttributeKeyHash> slots_;
};

struct EnrichStats {
    std::uint64_t historical_lookups = 0;  // remote point-in-time reads
    /// Indexed by Provenance; counted at emit time so suppressed replays do
    /// not inflate the sums.
    std::uint64_t provenance_counts[4] = {0, 0, 0, 0};
    std::uint64_t cache_rebuilds = 0;  // out-of-order updates repaired from the store

    void count(Provenance p) { ++provenance_counts[static_cast<std::size_t>(p)]; }
};

/// Apply one attribute update: persist via put_version first, then maintain
/// the local two-slot cache. An update older than the cached current value
/// rebuilds the slots from the store, so the cache always equals
/// get_latest_two after the insert. The cache is untouched when the store
/// write fails.
void apply_update(LocalAttributeState& state, const AttributeUpdate& update, RemoteStoreClient& store,
                  EnrichStats* stats = nullptr);

struct EnrichOutcome {
    bool dead_letter = false;
    EnrichedMeasurement record;  // meaningful when !dead_letter
};

/// Join one measurement with the attribute values valid at its event time:
/// cached current, then cached previous, then a remote historical lookup,
/// then the missing policy. Does not modify the cache; safe to re-run after
/// a store outage.
EnrichOutcome enrich(const LocalAttributeState& state, const Measurement& m, const EngineConfig& config,
                     RemoteStoreClient& store, EnrichStats& stats);

}  // namespace aquastream

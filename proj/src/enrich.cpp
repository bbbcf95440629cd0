#include "aquastream/engine/enrich.hpp"

#include "aquastream/time.hpp"

namespace aquastream {

void apply_update(LocalAttributeState& state, const AttributeUpdate& update, RemoteStoreClient& store,
                  EnrichStats* stats) {
    store.put_version(update.key, update.version);

    const CachedSlots* cached = state.find(update.key);
    if (cached == nullptr || !cached->current ||
        update.version.valid_from > cached->current->valid_from) {
        CachedSlots next;
        next.previous = cached ? cached->current : std::nullopt;
        next.current = update.version;
        state.set(update.key, std::move(next));
        return;
    }
    if (update.version.valid_from == cached->current->valid_from) {
        return;  // idempotent duplicate; the store already vetted the value
    }
    // Out-of-order update: the slots may now be stale (the new version could
    // belong between previous and current). Rebuild from the store.
    auto [current, previous] = store.get_latest_two(update.key);
    state.set(update.key, CachedSlots{std::move(current), std::move(previous)});
    if (stats) ++stats->cache_rebuilds;
}

EnrichOutcome enrich(const LocalAttributeState& state, const Measurement& m, const EngineConfig& config,
                     RemoteStoreClient& store, EnrichStats& stats) {
    EnrichOutcome out;
    out.record.measurement = m;
    out.record.attributes.reserve(config.enrichment_attributes.size());

    AttributeKey key{m.device, {}};
    for (const auto& name : config.enrichment_attributes) {
        key.attribute = name;
        EnrichedAttribute enriched;
        enriched.name = name;

        const CachedSlots* slots = state.find(key);
        if (slots && slots->current && m.event_time >= slots->current->valid_from) {
            enriched.value = slots->current->value;
            enriched.provenance = Provenance::Current;
        } else if (slots && slots->previous && m.event_time >= slots->previous->valid_from) {
            enriched.value = slots->previous->value;
            enriched.provenance = Provenance::Previous;
        } else {
            ++stats.historical_lookups;
            auto version = store.get_at(key, m.event_time);
            if (version) {
                enriched.value = version->value;
                enriched.provenance = Provenance::Historical;
            } else {
                enriched.provenance = Provenance::Missing;
                if (config.missing_policy == MissingPolicy::DeadLetter) {
                    out.dead_letter = true;
                    return out;
                }
            }
        }
        out.record.attributes.push_back(std::move(enriched));
    }

    out.record.enrich_time = now_wall_ms();
    out.record.latency_ms = out.record.enrich_time - m.ingest_time;
    return out;
}

}  // namespace aquastream

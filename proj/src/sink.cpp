#include "aquastream/engine/sink.hpp"

#include "aquastream/wire.hpp"

namespace aquastream {

bool IntervalSet::insert(std::uint64_t v) {
    // Find the interval starting at or before v.
    auto next = intervals_.upper_bound(v);
    if (next != intervals_.begin()) {
        auto prev = std::prev(next);
        if (v <= prev->second) return false;  // already covered
        if (v == prev->second + 1) {
            // Extend prev; maybe merge with next.
            if (next != intervals_.end() && next->first == v + 1) {
                prev->second = next->second;
                intervals_.erase(next);
            } else {
                prev->second = v;
            }
            return true;
        }
    }
    if (next != intervals_.end() && next->first == v + 1) {
        // Prepend to next.
        std::uint64_t end = next->second;
        intervals_.erase(next);
        intervals_[v] = end;
        return true;
    }
    intervals_[v] = v;
    return true;
}

bool IntervalSet::contains(std::uint64_t v) const {
    auto next = intervals_.upper_bound(v);
    if (next == intervals_.begin()) return false;
    return v <= std::prev(next)->second;
}

std::uint64_t IntervalSet::max_value() const { return intervals_.rbegin()->second; }

ResultSink::ResultSink(Log& log, Topic results, Topic dead_letter)
    : log_(log), results_(std::move(results)), dead_letter_(std::move(dead_letter)) {}

bool ResultSink::mark_seen(const DeviceId& device, std::uint64_t seq) {
    if (!seen_[device.id].insert(seq)) return false;
    auto [it, inserted] = hwm_.try_emplace(device.id, seq);
    if (!inserted && seq > it->second) it->second = seq;
    return true;
}

void ResultSink::rebuild(std::uint32_t partition, std::uint64_t results_from, std::uint64_t dead_letter_from) {
    seen_.clear();
    hwm_.clear();
    appended_ = 0;
    suppressed_ = 0;
    constexpr std::size_t kBatch = 2048;
    for (std::uint64_t off = results_from;;) {
        auto recs = log_.read(results_, partition, off, kBatch);
        if (recs.empty()) break;
        for (const auto& r : recs) {
            EnrichedMeasurement e = wire::decode_enriched(r.payload);
            mark_seen(e.measurement.device, e.measurement.seq);
        }
        off += recs.size();
    }
    for (std::uint64_t off = dead_letter_from;;) {
        auto recs = log_.read(dead_letter_, partition, off, kBatch);
        if (recs.empty()) break;
        for (const auto& r : recs) {
            Measurement m = wire::decode_measurement(r.payload);
            mark_seen(m.device, m.seq);
        }
        off += recs.size();
    }
}

bool ResultSink::emit(const EnrichedMeasurement& e) {
    if (!mark_seen(e.measurement.device, e.measurement.seq)) {
        ++suppressed_;
        return false;
    }
    auto payload = wire::encode(e);
    log_.append(results_, e.measurement.device.id, payload);
    ++appended_;
    return true;
}

bool ResultSink::dead_letter(const Measurement& m) {
    if (!mark_seen(m.device, m.seq)) {
        ++suppressed_;
        return false;
    }
    auto payload = wire::encode(m);
    log_.append(dead_letter_, m.device.id, payload);
    ++appended_;
    return true;
}

}  // namespace aquastream

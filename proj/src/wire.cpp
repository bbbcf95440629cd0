#include "aquastream/wire.hpp"

namespace aquastream::wire {

std::span<const std::byte> unframe(std::span<const std::byte> framed) {
    if (framed.size() < 4) throw WireError("frame shorter than length prefix");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) {
        len |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(framed[i])) << (8 * i);
    }
    if (framed.size() != len + 4u) throw WireError("frame length mismatch");
    return framed.subspan(4, len);
}

void put_measurement(WireWriter& w, const Measurement& m) {
    w.str(m.device.id);
    w.u64(m.seq);
    w.i64(m.event_time);
    w.str(m.observable);
    w.f64(m.value);
    w.i64(m.ingest_time);
}

Measurement get_measurement(WireReader& r) {
    Measurement m;
    m.device.id = r.str();
    m.seq = r.u64();
    m.event_time = r.i64();
    m.observable = r.str();
    m.value = r.f64();
    m.ingest_time = r.i64();
    return m;
}

void put_attribute_update(WireWriter& w, const AttributeUpdate& u) {
    w.str(u.key.device.id);
    w.str(u.key.attribute);
    w.i64(u.version.valid_from);
    w.str(u.version.value);
}

AttributeUpdate get_attribute_update(WireReader& r) {
    AttributeUpdate u;
    u.key.device.id = r.str();
    u.key.attribute = r.str();
    u.version.valid_from = r.i64();
    u.version.value = r.str();
    return u;
}

void put_stream_offset(WireWriter& w, const StreamOffset& o) {
    w.str(o.topic);
    w.u32(o.partition);
    w.u64(o.offset);
}

StreamOffset get_stream_offset(WireReader& r) {
    StreamOffset o;
    o.topic = r.str();
    o.partition = r.u32();
    o.offset = r.u64();
    return o;
}

std::vector<std::byte> encode(const Measurement& m) {
    WireWriter w;
    put_measurement(w, m);
    return w.framed();
}

std::vector<std::byte> encode(const AttributeUpdate& u) {
    WireWriter w;
    put_attribute_update(w, u);
    return w.framed();
}

std::vector<std::byte> encode(const EnrichedMeasurement& e) {
    WireWriter w;
    put_measurement(w, e.measurement);
    w.u16(static_cast<std::uint16_t>(e.attributes.size()));
    for (const auto& a : e.attributes) {
        w.str(a.name);
        w.str(a.value);
        w.u8(static_cast<std::uint8_t>(a.provenance));
    }
    w.i64(e.enrich_time);
    w.i64(e.latency_ms);
    return w.framed();
}

std::vector<std::byte> encode(const StreamOffset& o) {
    WireWriter w;
    put_stream_offset(w, o);
    return w.framed();
}

Measurement decode_measurement(std::span<const std::byte> framed) {
    WireReader r(unframe(framed));
    Measurement m = get_measurement(r);
    if (!r.exhausted()) throw WireError("trailing bytes after measurement");
    return m;
}

AttributeUpdate decode_attribute_update(std::span<const std::byte> framed) {
    WireReader r(unframe(framed));
    AttributeUpdate u = get_attribute_update(r);
    if (!r.exhausted()) throw WireError("trailing bytes after attribute update");
    return u;
}

EnrichedMeasurement decode_enriched(std::span<const std::byte> framed) {
    WireReader r(unframe(framed));
    EnrichedMeasurement e;
    e.measurement = get_measurement(r);
    std::uint16_t n = r.u16();
    e.attributes.reserve(n);
    for (std::uint16_t i = 0; i < n; ++i) {
        EnrichedAttribute a;
        a.name = r.str();
        a.value = r.str();
        a.provenance = static_cast<Provenance>(r.u8());
        e.attributes.push_back(std::move(a));
    }
    e.enrich_time = r.i64();
    e.latency_ms = r.i64();
    if (!r.exhausted()) throw WireError("trailing bytes after enriched measurement");
    return e;
}

StreamOffset decode_stream_offset(std::span<const std::byte> framed) {
    WireReader r(unframe(framed));
    StreamOffset o = get_stream_offset(r);
    if (!r.exhausted()) throw WireError("trailing bytes after stream offset");
    return o;
}

}  // namespace aquastream::wire

#include "aquastream/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "aquastream/rng.hpp"
#include "aquastream/wire.hpp"

namespace aquastream {

namespace {

constexpr std::uint64_t kMeasurementStream = 1;
constexpr std::uint64_t kAttributeStream = 2;
constexpr std::uint8_t kTagMeasurement = 0;
constexpr std::uint8_t kTagUpdate = 1;

std::string device_name(std::uint32_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%06u", index);
    return buf;
}

std::string random_token(const std::string& prefix, Xoshiro256& rng) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%08llx", prefix.c_str(),
                  static_cast<unsigned long long>(rng.next_u64() & 0xffffffffULL));
    return buf;
}

}  // namespace

void FleetConfig::validate() const {
    if (devices == 0) throw std::invalid_argument("devices must be >= 1");
    if (!(rate_per_device_hz > 0)) throw std::invalid_argument("rate must be positive");
    if (!(duration_s > 0)) throw std::invalid_argument("duration must be positive");
    if (!(loss_probability >= 0 && loss_probability < 1)) {
        throw std::invalid_argument("loss probability must be in [0, 1)");
    }
    if (!(delay_median_ms >= 0) || !(delay_sigma >= 0)) {
        throw std::invalid_argument("delay parameters must be non-negative");
    }
    if (observable.empty()) throw std::invalid_argument("observable name must be non-empty");
    for (const auto& a : attributes) {
        if (a.name.empty()) throw std::invalid_argument("attribute name must be non-empty");
        if (a.mean_update_interval_s < 0) throw std::invalid_argument("update interval must be >= 0");
    }
}

Trace generate_trace(const FleetConfig& config) {
    config.validate();
    Trace trace;
    const double gap_ms = 1000.0 / config.rate_per_device_hz;
    const auto span = static_cast<TimestampMs>(std::llround(config.duration_s * 1000.0));
    trace.span_ms = span;

    // Attribute commissioning and update streams. Generated before the
    // measurements so equal arrival times sort announcements first.
    for (std::uint32_t d = 0; d < config.devices; ++d) {
        DeviceId device{device_name(d)};
        for (std::size_t a = 0; a < config.attributes.size(); ++a) {
            const auto& spec = config.attributes[a];
            Xoshiro256 rng(derive_seed(config.seed, kAttributeStream,
                                       (static_cast<std::uint64_t>(d) << 16) | a));
            AttributeKey key{device, spec.name};

            TraceEvent initial;
            initial.arrival = 0;
            initial.payload = AttributeUpdate{key, {0, random_token(spec.name, rng)}};
            trace.events.push_back(std::move(initial));
            ++trace.updates;

            if (spec.mean_update_interval_s > 0) {
                double t_s = 0;
                while (true) {
                    t_s += rng.next_exponential(spec.mean_update_interval_s);
                    auto t = static_cast<TimestampMs>(std::llround(t_s * 1000.0));
                    if (t >= span) break;
                    TraceEvent ev;
                    ev.arrival = t;
                    ev.payload = AttributeUpdate{key, {t, random_token(spec.name, rng)}};
                    trace.events.push_back(std::move(ev));
                    ++trace.updates;
                }
            }
        }
    }

    // The late-commissioning scenario: one update arriving mid-run whose
    // valid_from lies well in the past, behind measurements and possibly
    // newer versions that were already delivered.
    if (config.late_commissioning && !config.attributes.empty()) {
        DeviceId device{device_name(0)};
        AttributeKey key{device, config.attributes.front().name};
        std::set<TimestampMs> taken;
        for (const auto& ev : trace.events) {
            if (!ev.is_measurement() && ev.update().key == key) taken.insert(ev.update().version.valid_from);
        }
        TimestampMs vf = span / 4;
        while (taken.contains(vf)) ++vf;
        Xoshiro256 rng(derive_seed(config.seed, kAttributeStream, 0xffffffffULL));
        TraceEvent ev;
        ev.arrival = (span * 3) / 5;
        ev.payload = AttributeUpdate{key, {vf, random_token("late", rng)}};
        trace.events.push_back(std::move(ev));
        ++trace.updates;
    }

    // Per-device measurement streams: regular grid with jitter, value as a
    // bounded random walk, lognormal transport delay, i.i.d. loss.
    const auto count_per_device = static_cast<std::uint64_t>(config.duration_s * config.rate_per_device_hz);
    for (std::uint32_t d = 0; d < config.devices; ++d) {
        DeviceId device{device_name(d)};
        Xoshiro256 rng(derive_seed(config.seed, kMeasurementStream, d));
        const double phase = rng.next_double() * gap_ms;
        double value = 20.0 + 10.0 * rng.next_double();
        for (std::uint64_t k = 0; k < count_per_device; ++k) {
            const double jitter = (rng.next_double() - 0.5) * gap_ms * 0.1;
            value += rng.next_normal() * 0.05;
            const double delay = config.delay_sigma == 0.0
                                     ? config.delay_median_ms
                                     : rng.next_lognormal(config.delay_median_ms, config.delay_sigma);
            const bool dropped = rng.next_double() < config.loss_probability;

            trace.max_seq = std::max(trace.max_seq, k);
            if (dropped) {
                ++trace.dropped;
                continue;  // seq gap corresponds exactly to this record
            }
            Measurement m;
            m.device = device;
            m.seq = k;
            m.event_time = static_cast<TimestampMs>(std::llround(phase + static_cast<double>(k) * gap_ms + jitter));
            m.observable = config.observable;
            m.value = value;
            TraceEvent ev;
            ev.arrival = m.event_time + static_cast<TimestampMs>(std::llround(delay));
            ev.payload = std::move(m);
            trace.events.push_back(std::move(ev));
            ++trace.measurements;
        }
    }

    std::stable_sort(trace.events.begin(), trace.events.end(),
                     [](const TraceEvent& a, const TraceEvent& b) { return a.arrival < b.arrival; });
    return trace;
}

std::vector<std::byte> encode_trace(const Trace& trace) {
    std::vector<std::byte> out;
    for (const auto& ev : trace.events) {
        WireWriter w;
        if (ev.is_measurement()) {
            w.u8(kTagMeasurement);
            w.u64(static_cast<std::uint64_t>(ev.arrival));
            wire::put_measurement(w, ev.measurement());
        } else {
            w.u8(kTagUpdate);
            w.u64(static_cast<std::uint64_t>(ev.arrival));
            wire::put_attribute_update(w, ev.update());
        }
        auto framed = w.framed();
        out.insert(out.end(), framed.begin(), framed.end());
    }
    return out;
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out.is_open()) throw std::runtime_error("cannot write trace file: " + path.string());
    auto bytes = encode_trace(trace);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to trace file: " + path.string());
}

Trace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) throw std::runtime_error("cannot open trace file: " + path.string());
    std::vector<std::byte> file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    Trace trace;
    std::size_t pos = 0;
    while (pos + 4 <= file.size()) {
        std::uint32_t len = 0;
        for (int i = 0; i < 4; ++i) {
            len |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(file[pos + i])) << (8 * i);
        }
        if (pos + 4 + len > file.size()) throw WireError("trace file truncated");
        WireReader r({file.data() + pos + 4, len});
        std::uint8_t tag = r.u8();
        TraceEvent ev;
        ev.arrival = static_cast<TimestampMs>(r.u64());
        if (tag == kTagMeasurement) {
            Measurement m = wire::get_measurement(r);
            trace.max_seq = std::max(trace.max_seq, m.seq);
            ++trace.measurements;
            ev.payload = std::move(m);
        } else if (tag == kTagUpdate) {
            ev.payload = wire::get_attribute_update(r);
            ++trace.updates;
        } else {
            throw WireError("unknown trace record tag");
        }
        if (!r.exhausted()) throw WireError("trailing bytes in trace record");
        trace.span_ms = std::max(trace.span_ms, ev.arrival);
        trace.events.push_back(std::move(ev));
        pos += 4 + len;
    }
    if (pos != file.size()) throw WireError("trace file truncated");
    return trace;
}

}  // namespace aquastream

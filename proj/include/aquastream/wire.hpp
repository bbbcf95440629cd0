#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aquastream/types.hpp"

namespace aquastream {

/// Binary wire format shared by the log payloads, the attribute journal,
/// checkpoints and trace files. Records are framed as a u32 little-endian
/// payload length followed by the payload fields in declaration order:
/// integers little-endian fixed width, strings as u16 length + UTF-8 bytes,
/// doubles as IEEE-754 little-endian bits.

class WireError : public std::runtime_error {
public:
    explicit WireError(const std::string& what) : std::runtime_error(what) {}
};

class WireWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(std::byte{v}); }

    void u16(std::uint16_t v) { append_le(v); }
    void u32(std::uint32_t v) { append_le(v); }
    void u64(std::uint64_t v) { append_le(v); }
    void i64(std::int64_t v) { append_le(static_cast<std::uint64_t>(v)); }

    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        append_le(bits);
    }

    void str(const std::string& s) {
        if (s.size() > 0xffff) throw WireError("string too long for wire format");
        u16(static_cast<std::uint16_t>(s.size()));
        const auto* p = reinterpret_cast<const std::byte*>(s.data());
        buf_.insert(buf_.end(), p, p + s.size());
    }

    void bytes(std::span<const std::byte> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    const std::vector<std::byte>& payload() const { return buf_; }

    /// Payload prefixed with its u32 length.
    std::vector<std::byte> framed() const {
        std::vector<std::byte> out;
        out.reserve(buf_.size() + 4);
        std::uint32_t len = static_cast<std::uint32_t>(buf_.size());
        for (int i = 0; i < 4; ++i) out.push_back(std::byte{static_cast<std::uint8_t>(len >> (8 * i))});
        out.insert(out.end(), buf_.begin(), buf_.end());
        return out;
    }

private:
    template <typename T>
    void append_le(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            buf_.push_back(std::byte{static_cast<std::uint8_t>(v >> (8 * i))});
        }
    }

    std::vector<std::byte> buf_;
};

class WireReader {
public:
    explicit WireReader(std::span<const std::byte> data) : data_(data) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint16_t u16() { return read_le<std::uint16_t>(); }
    std::uint32_t u32() { return read_le<std::uint32_t>(); }
    std::uint64_t u64() { return read_le<std::uint64_t>(); }
    std::int64_t i64() { return static_cast<std::int64_t>(read_le<std::uint64_t>()); }

    double f64() {
        std::uint64_t bits = read_le<std::uint64_t>();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string str() {
        std::uint16_t n = u16();
        auto b = take(n);
        return std::string(reinterpret_cast<const char*>(b.data()), b.size());
    }

    bool exhausted() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::span<const std::byte> take(std::size_t n) {
        if (pos_ + n > data_.size()) throw WireError("wire payload truncated");
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }

    template <typename T>
    T read_le() {
        auto b = take(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<std::uint8_t>(b[i])) << (8 * i);
        }
        return v;
    }

    std::span<const std::byte> data_;
    std::size_t pos_ = 0;
};

namespace wire {

std::vector<std::byte> encode(const Measurement& m);
std::vector<std::byte> encode(const AttributeUpdate& u);
std::vector<std::byte> encode(const EnrichedMeasurement& e);
std::vector<std::byte> encode(const StreamOffset& o);

/// Decode a framed record (u32 length prefix + payload).
Measurement decode_measurement(std::span<const std::byte> framed);
AttributeUpdate decode_attribute_update(std::span<const std::byte> framed);
EnrichedMeasurement decode_enriched(std::span<const std::byte> framed);
StreamOffset decode_stream_offset(std::span<const std::byte> framed);

/// Strip and validate the u32 length frame, returning the payload view.
std::span<const std::byte> unframe(std::span<const std::byte> framed);

void put_measurement(WireWriter& w, const Measurement& m);
Measurement get_measurement(WireReader& r);
void put_attribute_update(WireWriter& w, const AttributeUpdate& u);
AttributeUpdate get_attribute_update(WireReader& r);
void put_stream_offset(WireWriter& w, const StreamOffset& o);
StreamOffset get_stream_offset(WireReader& r);

}  // namespace wire

}  // namespace aquastream

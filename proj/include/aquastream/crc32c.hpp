#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace aquastream {

namespace detail {

struct Crc32cTables {
    std::array<std::array<std::uint32_t, 256>, 4> t{};

    Crc32cTables() {
        constexpr std::uint32_t poly = 0x82f63b78u;  // Castagnoli, reflected
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? (c >> 1) ^ poly : c >> 1;
            t[0][i] = c;
        }
        for (std::uint32_t i = 0; i < 256; ++i) {
            t[1][i] = (t[0][i] >> 8) ^ t[0][t[0][i] & 0xff];
            t[2][i] = (t[1][i] >> 8) ^ t[0][t[1][i] & 0xff];
            t[3][i] = (t[2][i] >> 8) ^ t[0][t[2][i] & 0xff];
        }
    }
};

inline const Crc32cTables& crc32c_tables() {
    static const Crc32cTables tables;
    return tables;
}

}  // namespace detail

/// CRC32C (Castagnoli), slicing-by-4.
inline std::uint32_t crc32c(std::span<const std::byte> data) {
    const auto& t = detail::crc32c_tables().t;
    std::uint32_t crc = 0xffffffffu;
    const auto* p = reinterpret_cast<const std::uint8_t*>(data.data());
    std::size_t n = data.size();
    while (n >= 4) {
        crc ^= static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
        crc = t[3][crc & 0xff] ^ t[2][(crc >> 8) & 0xff] ^ t[1][(crc >> 16) & 0xff] ^ t[0][crc >> 24];
        p += 4;
        n -= 4;
    }
    while (n--) crc = (crc >> 8) ^ t[0][(crc ^ *p++) & 0xff];
    return crc ^ 0xffffffffu;
}

}  // namespace aquastream

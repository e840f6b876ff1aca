#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "stego/bytes.hpp"

namespace stego {

namespace detail {

// Reflected CRC-32, IEEE 802.3 polynomial 0xEDB88320.
inline constexpr std::array<std::uint32_t, 256> crc32_table = [] {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        table[i] = c;
    }
    return table;
}();

} // namespace detail

inline std::uint32_t crc32_update(std::uint32_t crc, const std::uint8_t* data, std::size_t len) {
    crc ^= 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i)
        crc = detail::crc32_table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

inline std::uint32_t crc32(const Bytes& data) {
    return crc32_update(0, data.data(), data.size());
}

} // namespace stego

#pragma once

#include <cstdint>

#include "stego/bitstream.hpp"
#include "stego/error.hpp"
#include "stego/payload.hpp"

namespace stego {

// "Used bits": how many low bits of each carrier byte hold payload.
struct BitDepth {
    explicit BitDepth(int bits) : value(bits) {
        if (bits < 1 || bits > 8)
            throw UsageError("bit depth must be between 1 and 8");
    }
    int value;
};

namespace lsb {

// Writes the next t = min(k, remaining) stream bits into one carrier byte.
// The earlier bit lands at position k-1; when the stream runs out mid-byte
// the untouched low positions keep their cover value.
inline void embed_byte(std::uint8_t& carrier, BitReader& bits, int k) {
    const auto t = static_cast<int>(std::min<std::size_t>(k, bits.remaining()));
    if (t == 0) return;
    const auto group = static_cast<std::uint8_t>(bits.read_bits(static_cast<unsigned>(t)));
    const std::uint8_t mask = static_cast<std::uint8_t>(((1u << t) - 1u) << (k - t));
    carrier = static_cast<std::uint8_t>((carrier & ~mask) |
                                        (static_cast<std::uint8_t>(group << (k - t)) & mask));
}

// Mirror of embed_byte: reads min(k, sink.bits_needed()) bits from positions
// k-1 downward.
inline void extract_byte(std::uint8_t carrier, FrameBitSink& sink, int k) {
    const auto t = static_cast<int>(std::min<std::size_t>(k, sink.bits_needed()));
    for (int i = 0; i < t; ++i) sink.push_bit((carrier >> (k - 1 - i)) & 1);
}

} // namespace lsb
} // namespace stego

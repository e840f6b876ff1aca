#pragma once

#include <string>

#include "stego/bmp.hpp"
#include "stego/bytes.hpp"
#include "stego/wav.hpp"

namespace testutil {

inline stego::Bytes random_bytes(std::size_t n, std::uint64_t seed) {
    stego::SplitMix64 rng(seed);
    stego::Bytes out(n);
    for (auto& b : out) b = rng.next_byte();
    return out;
}

inline stego::BmpImage random_bmp(std::uint32_t w, std::uint32_t h, std::uint64_t seed) {
    stego::BmpImage img = stego::make_bmp(w, h);
    stego::SplitMix64 rng(seed);
    for (std::uint32_t y = 0; y < h; ++y)
        for (std::uint32_t x = 0; x < w; ++x)
            img.set_rgb(x, y, {rng.next_byte(), rng.next_byte(), rng.next_byte()});
    return img;
}

inline stego::WavAudio random_wav(std::size_t samples, std::uint64_t seed,
                                  std::uint16_t channels = 1) {
    stego::WavAudio wav = stego::make_wav(8000, channels, samples);
    stego::SplitMix64 rng(seed);
    for (auto& s : wav.samples)
        s = static_cast<std::int16_t>(rng.next() & 0xFFFF);
    return wav;
}

inline stego::Bytes from_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    stego::Bytes out;
    for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
        out.push_back(static_cast<std::uint8_t>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
    return out;
}

} // namespace testutil

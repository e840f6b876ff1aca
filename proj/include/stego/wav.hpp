#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "stego/bytes.hpp"
#include "stego/error.hpp"
#include "stego/lsb.hpp"
#include "stego/payload.hpp"

// 16-bit PCM WAV carrier. Chunks other than `data` are preserved verbatim
// (split into the bytes before and after the sample payload), so an
// untouched file re-serializes byte-for-byte.

namespace stego {

struct WavAudio {
    std::uint32_t sample_rate = 0;
    std::uint16_t channels = 0;
    std::vector<std::int16_t> samples; // interleaved
    Bytes pre;  // file bytes up to the start of the data chunk payload
    Bytes post; // everything after the data chunk payload (pad byte, extra chunks)

    std::size_t frame_count() const { return channels ? samples.size() / channels : 0; }
};

inline WavAudio load_wav(const Bytes& file) {
    if (file.size() < 12 || std::memcmp(file.data(), "RIFF", 4) != 0 ||
        std::memcmp(file.data() + 8, "WAVE", 4) != 0)
        throw FormatError("not a WAV file (missing RIFF/WAVE header)");

    WavAudio wav;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= file.size()) {
        const char* id = reinterpret_cast<const char*>(file.data() + pos);
        const std::uint32_t size = get_u32le(file.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > file.size()) {
            if (std::memcmp(id, "data", 4) == 0)
                throw FormatError("corrupt WAV: truncated data chunk");
            throw FormatError("corrupt WAV: chunk overruns the file");
        }

        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) throw FormatError("corrupt WAV: fmt chunk too small");
            const std::uint16_t format = get_u16le(file.data() + body);
            const std::uint16_t channels = get_u16le(file.data() + body + 2);
            const std::uint16_t bits = get_u16le(file.data() + body + 14);
            if (format != 1)
                throw FormatError("unsupported WAV: format code " + std::to_string(format) +
                                  ", only PCM (1) is supported");
            if (bits != 16)
                throw FormatError("unsupported WAV: " + std::to_string(bits) +
                                  " bits per sample, only 16 is supported");
            if (channels != 1 && channels != 2)
                throw FormatError("unsupported WAV: " + std::to_string(channels) +
                                  " channels, only mono and stereo are supported");
            wav.channels = channels;
            wav.sample_rate = get_u32le(file.data() + body + 4);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt) throw FormatError("corrupt WAV: data chunk before fmt chunk");
            if (size % 2 != 0) throw FormatError("corrupt WAV: odd data chunk size");
            wav.pre.assign(file.begin(), file.begin() + body);
            wav.post.assign(file.begin() + body + size, file.end());
            wav.samples.resize(size / 2);
            for (std::size_t i = 0; i < wav.samples.size(); ++i)
                wav.samples[i] =
                    static_cast<std::int16_t>(get_u16le(file.data() + body + 2 * i));
            return wav;
        }
        // Chunks are word-aligned; a pad byte follows odd sizes.
        pos = body + size + (size & 1);
    }
    throw FormatError(have_fmt ? "corrupt WAV: no data chunk"
                               : "corrupt WAV: no fmt chunk");
}

inline Bytes save_wav(const WavAudio& wav) {
    Bytes out;
    out.reserve(wav.pre.size() + wav.samples.size() * 2 + wav.post.size());
    out.insert(out.end(), wav.pre.begin(), wav.pre.end());
    for (std::int16_t s : wav.samples)
        put_u16le(out, static_cast<std::uint16_t>(s));
    out.insert(out.end(), wav.post.begin(), wav.post.end());
    return out;
}

// Fresh silent file with the canonical 44-byte header.
inline WavAudio make_wav(std::uint32_t sample_rate, std::uint16_t channels,
                         std::size_t sample_count) {
    if (channels != 1 && channels != 2) throw UsageError("channels must be 1 or 2");
    WavAudio wav;
    wav.sample_rate = sample_rate;
    wav.channels = channels;
    wav.samples.assign(sample_count, 0);

    const auto data_size = static_cast<std::uint32_t>(sample_count * 2);
    const std::uint16_t block_align = static_cast<std::uint16_t>(channels * 2);
    Bytes& h = wav.pre;
    h = {'R', 'I', 'F', 'F'};
    put_u32le(h, 36 + data_size);
    h.insert(h.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put_u32le(h, 16);
    put_u16le(h, 1); // PCM
    put_u16le(h, channels);
    put_u32le(h, sample_rate);
    put_u32le(h, sample_rate * block_align);
    put_u16le(h, block_align);
    put_u16le(h, 16);
    h.insert(h.end(), {'d', 'a', 't', 'a'});
    put_u32le(h, data_size);
    return wav;
}

inline std::uint64_t wav_capacity(const WavAudio& wav, BitDepth k) {
    return static_cast<std::uint64_t>(wav.samples.size()) * k.value / 8;
}

inline WavAudio wav_embed(const WavAudio& cover, const Bytes& frame, BitDepth k) {
    const std::uint64_t need_bits = static_cast<std::uint64_t>(frame.size()) * 8;
    const std::uint64_t have_bits = static_cast<std::uint64_t>(cover.samples.size()) * k.value;
    if (need_bits > have_bits)
        throw CapacityError("capacity exceeded: needed " + std::to_string(frame.size()) +
                            " bytes, available " + std::to_string(wav_capacity(cover, k)) +
                            " at " + std::to_string(k.value) + " bit(s)");

    WavAudio stego = cover;
    BitReader bits(frame);
    for (std::int16_t& s : stego.samples) {
        auto low = static_cast<std::uint8_t>(static_cast<std::uint16_t>(s) & 0xFF);
        lsb::embed_byte(low, bits, k.value);
        s = static_cast<std::int16_t>((static_cast<std::uint16_t>(s) & 0xFF00) | low);
        if (bits.empty()) break;
    }
    return stego;
}

inline ParsedFrame wav_extract(const WavAudio& audio, BitDepth k,
                               const std::optional<Passphrase>& pass = std::nullopt) {
    FrameBitSink sink;
    for (std::int16_t s : audio.samples) {
        const auto low = static_cast<std::uint8_t>(static_cast<std::uint16_t>(s) & 0xFF);
        lsb::extract_byte(low, sink, k.value);
        if (!sink.wants_more()) break;
    }
    return parse_frame(sink.take_frame(), pass);
}

struct ToneResult {
    WavAudio audio;
    std::size_t clipped_samples = 0;
};

// Adds round(amplitude * 32767 * cos(pi * omega_over_pi * n)) to every
// channel of frame n, clamping into int16 range. The paper's test tone is
// omega_over_pi = 0.4 (normalized frequency 0.2 cycles/sample).
inline ToneResult add_tone(const WavAudio& input, double omega_over_pi, double amplitude) {
    if (!(omega_over_pi > 0.0 && omega_over_pi < 1.0))
        throw UsageError("tone frequency must satisfy 0 < omega/pi < 1");
    if (amplitude < 0.0) throw UsageError("tone amplitude must be nonnegative");

    ToneResult result{input, 0};
    const std::size_t frames = input.frame_count();
    for (std::size_t n = 0; n < frames; ++n) {
        const double tone = amplitude * 32767.0 *
                            std::cos(3.14159265358979323846 * omega_over_pi *
                                     static_cast<double>(n));
        const long delta = std::lround(tone);
        for (std::uint16_t c = 0; c < input.channels; ++c) {
            std::int16_t& s = result.audio.samples[n * input.channels + c];
            long v = static_cast<long>(s) + delta;
            if (v > 32767) { v = 32767; ++result.clipped_samples; }
            if (v < -32768) { v = -32768; ++result.clipped_samples; }
            s = static_cast<std::int16_t>(v);
        }
    }
    return result;
}

} // namespace stego

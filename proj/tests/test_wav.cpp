#include <catch2/catch_amalgamated.hpp>

#include "stego/spectral.hpp"
#include "stego/wav.hpp"

#include "helpers.hpp"

using namespace stego;
using testutil::random_bytes;
using testutil::random_wav;

namespace {

// Canonical 44-byte header + samples, assembled by hand.
Bytes minimal_wav(const std::vector<std::int16_t>& samples, std::uint16_t channels = 1,
                  std::uint32_t rate = 8000) {
    Bytes f = {'R', 'I', 'F', 'F'};
    put_u32le(f, static_cast<std::uint32_t>(36 + samples.size() * 2));
    f.insert(f.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put_u32le(f, 16);
    put_u16le(f, 1);
    put_u16le(f, channels);
    put_u32le(f, rate);
    put_u32le(f, rate * channels * 2);
    put_u16le(f, static_cast<std::uint16_t>(channels * 2));
    put_u16le(f, 16);
    f.insert(f.end(), {'d', 'a', 't', 'a'});
    put_u32le(f, static_cast<std::uint32_t>(samples.size() * 2));
    for (std::int16_t s : samples) put_u16le(f, static_cast<std::uint16_t>(s));
    return f;
}

} // namespace

TEST_CASE("minimal mono WAV with four zero samples round-trips") {
    const Bytes file = minimal_wav({0, 0, 0, 0});
    REQUIRE(file.size() == 52);
    const WavAudio wav = load_wav(file);
    CHECK(wav.sample_rate == 8000);
    CHECK(wav.channels == 1);
    CHECK(wav.samples == std::vector<std::int16_t>{0, 0, 0, 0});
    CHECK(save_wav(wav) == file);
}

TEST_CASE("sample value +1 serializes little-endian") {
    const Bytes file = minimal_wav({1});
    CHECK(file[file.size() - 2] == 0x01);
    CHECK(file[file.size() - 1] == 0x00);
    CHECK(load_wav(file).samples == std::vector<std::int16_t>{1});
}

TEST_CASE("extra RIFF chunks are preserved verbatim") {
    Bytes file = minimal_wav({10, -3, 500});
    // Insert a LIST chunk between fmt and data.
    Bytes chunk = {'L', 'I', 'S', 'T'};
    put_u32le(chunk, 5);
    chunk.insert(chunk.end(), {'I', 'N', 'F', 'O', 'x', 0x00}); // odd size + pad
    file.insert(file.begin() + 36, chunk.begin(), chunk.end());
    // Fix the RIFF size field.
    const std::uint32_t riff = get_u32le(file.data() + 4) + static_cast<std::uint32_t>(chunk.size());
    file[4] = static_cast<std::uint8_t>(riff);
    file[5] = static_cast<std::uint8_t>(riff >> 8);
    file[6] = static_cast<std::uint8_t>(riff >> 16);
    file[7] = static_cast<std::uint8_t>(riff >> 24);

    const WavAudio wav = load_wav(file);
    CHECK(wav.samples.size() == 3);
    CHECK(save_wav(wav) == file);
}

TEST_CASE("malformed WAVs are rejected") {
    SECTION("not RIFF") {
        CHECK_THROWS_AS(load_wav(to_bytes("JUNKJUNKJUNKJUNK")), FormatError);
    }
    SECTION("truncated data chunk") {
        Bytes file = minimal_wav({1, 2, 3, 4});
        file.resize(file.size() - 3);
        CHECK_THROWS_WITH(load_wav(file), Catch::Matchers::ContainsSubstring("truncated"));
    }
    SECTION("non-PCM format code") {
        Bytes file = minimal_wav({0});
        file[20] = 3; // IEEE float
        CHECK_THROWS_WITH(load_wav(file), Catch::Matchers::ContainsSubstring("format code"));
    }
    SECTION("8-bit samples") {
        Bytes file = minimal_wav({0});
        file[34] = 8;
        CHECK_THROWS_WITH(load_wav(file), Catch::Matchers::ContainsSubstring("bits per sample"));
    }
}

TEST_CASE("audio embed/extract round trip across bit depths") {
    for (int k = 1; k <= 8; ++k) {
        const WavAudio cover = random_wav(1600, 50 + static_cast<std::uint64_t>(k));
        const Bytes body = random_bytes(100, 60 + static_cast<std::uint64_t>(k));
        const std::optional<Passphrase> pass =
            k % 2 ? std::optional<Passphrase>{Passphrase{"audio"}} : std::nullopt;
        const WavAudio stego = wav_embed(cover, frame_payload(body, "clip", pass), BitDepth(k));
        const ParsedFrame got = wav_extract(stego, BitDepth(k), pass);
        CHECK(got.body == body);
        CHECK(got.name == "clip");
    }
}

TEST_CASE("k=1 embedding matches two's-complement arithmetic") {
    WavAudio cover = make_wav(8000, 1, 300);
    cover.samples[0] = 0;
    cover.samples[1] = -2; // 0xFFFE
    // A frame starting with magic 'S' = 0x53 = 01010011: first bit 0, second 1.
    // Craft a direct check on the sample update rule instead: embed a frame
    // and verify only low bits changed.
    const Bytes frame = frame_payload({}, "");
    const WavAudio stego = wav_embed(cover, frame, BitDepth(1));
    for (std::size_t i = 0; i < cover.samples.size(); ++i) {
        const auto a = static_cast<std::uint16_t>(cover.samples[i]);
        const auto b = static_cast<std::uint16_t>(stego.samples[i]);
        CHECK((a & 0xFFFE) == (b & 0xFFFE));
    }
    // And the documented single-sample updates:
    std::uint8_t low = 0x00; // sample 0
    Bytes one = {0b10000000};
    BitReader bits(one);
    lsb::embed_byte(low, bits, 1);
    CHECK(low == 0x01); // 0 -> 1
    std::int16_t s = -2;
    auto lo = static_cast<std::uint8_t>(static_cast<std::uint16_t>(s) & 0xFF);
    BitReader bits2(one);
    lsb::embed_byte(lo, bits2, 1);
    s = static_cast<std::int16_t>((static_cast<std::uint16_t>(s) & 0xFF00) | lo);
    CHECK(s == -1); // 0xFFFE -> 0xFFFF
}

TEST_CASE("pristine audio yields a bad-magic error") {
    for (std::uint64_t seed = 0; seed < 8; ++seed)
        CHECK_THROWS_AS(wav_extract(random_wav(512, 70 + seed), BitDepth(1)), IntegrityError);
}

TEST_CASE("audio capacity errors") {
    const WavAudio tiny = make_wav(8000, 1, 8);
    CHECK_THROWS_AS(wav_embed(tiny, frame_payload(random_bytes(100, 1), ""), BitDepth(1)),
                    CapacityError);
}

TEST_CASE("add_tone examples") {
    SECTION("amplitude zero is the identity") {
        const WavAudio in = random_wav(64, 5);
        const ToneResult r = add_tone(in, 0.4, 0.0);
        CHECK(r.audio.samples == in.samples);
        CHECK(r.clipped_samples == 0);
    }
    SECTION("silence plus unit tone is a pure rounded cosine") {
        const WavAudio in = make_wav(8000, 1, 16);
        const ToneResult r = add_tone(in, 0.4, 1.0);
        CHECK(r.audio.samples[0] == 32767);                      // cos(0) = 1
        CHECK(r.audio.samples[5] == 32767);                      // cos(2*pi) = 1
        const double c1 = 32767.0 * std::cos(0.4 * 3.14159265358979323846);
        CHECK(r.audio.samples[1] == static_cast<std::int16_t>(std::lround(c1)));
    }
    SECTION("full-scale input stays clamped") {
        WavAudio in = make_wav(8000, 1, 32);
        for (auto& s : in.samples) s = 32767;
        const ToneResult r = add_tone(in, 0.4, 1.0);
        for (std::int16_t s : r.audio.samples) {
            CHECK(s <= 32767);
            CHECK(s >= -32768);
        }
        CHECK(r.clipped_samples > 0);
    }
    SECTION("stereo frames get the same tone value") {
        const WavAudio in = make_wav(8000, 2, 20);
        const ToneResult r = add_tone(in, 0.25, 0.5);
        for (std::size_t n = 0; n < r.audio.frame_count(); ++n)
            CHECK(r.audio.samples[2 * n] == r.audio.samples[2 * n + 1]);
    }
    SECTION("parameter validation") {
        const WavAudio in = make_wav(8000, 1, 4);
        CHECK_THROWS_AS(add_tone(in, 0.0, 1.0), UsageError);
        CHECK_THROWS_AS(add_tone(in, 1.0, 1.0), UsageError);
        CHECK_THROWS_AS(add_tone(in, 0.4, -1.0), UsageError);
    }
}

TEST_CASE("tone added to silence peaks at omega/2pi in the periodogram") {
    const WavAudio silence = make_wav(8000, 1, 512);
    const ToneResult toned = add_tone(silence, 0.4, 1.0);
    const Signal sig = signal_from_wav(toned.audio);
    EstimatorConfig cfg;
    const double peak = peak_frequency(periodogram(sig, cfg));
    CHECK_THAT(peak, Catch::Matchers::WithinAbs(0.2, 1.0 / 1024.0 + 1e-12));
}

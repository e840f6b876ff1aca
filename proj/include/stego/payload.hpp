#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "stego/bitstream.hpp"
#include "stego/bytes.hpp"
#include "stego/crc32.hpp"
#include "stego/des.hpp"
#include "stego/error.hpp"
#include "stego/sha256.hpp"

// Payload framing. Every carrier (image, audio, text, slack space) hides the
// same self-describing envelope:
//
//   magic    4 bytes  53 54 45 47
//   version  1 byte   0x01
//   flags    1 byte   bit 0 = body is DES-CBC encrypted, rest reserved zero
//   name_len 2 bytes  little-endian
//   body_len 4 bytes  little-endian, length of the stored body
//   name     name_len bytes of UTF-8 (the original file name, may be empty)
//   body     body_len bytes (ciphertext when encrypted)
//   crc      4 bytes  little-endian CRC-32 of the *plaintext* body
//
// The trailing CRC doubles as wrong-passphrase detection.

namespace stego {

struct Passphrase {
    std::string text;
};

inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {0x53, 0x54, 0x45, 0x47};
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::uint8_t kFlagEncrypted = 0x01;
inline constexpr std::size_t kFrameHeaderBytes = 12;
inline constexpr std::size_t kFrameMinBytes = 16;

struct DesKeyIv {
    des::Block key;
    des::Block iv;
};

// Key = first 8 bytes of SHA-256(pass); IV = first 8 bytes of
// SHA-256(pass ++ "iv").
inline DesKeyIv derive_des_key(const Passphrase& pass) {
    if (pass.text.empty()) throw UsageError("empty passphrase");
    DesKeyIv out{};
    const auto kh = sha256(to_bytes(pass.text));
    const auto ih = sha256(to_bytes(pass.text + "iv"));
    for (int i = 0; i < 8; ++i) {
        out.key[i] = kh[i];
        out.iv[i] = ih[i];
    }
    return out;
}

inline Bytes des_encrypt(const Bytes& plain, const Passphrase& pass) {
    const DesKeyIv k = derive_des_key(pass);
    return des::cbc_encrypt(plain, k.key, k.iv);
}

inline Bytes des_decrypt(const Bytes& cipher, const Passphrase& pass) {
    const DesKeyIv k = derive_des_key(pass);
    return des::cbc_decrypt(cipher, k.key, k.iv);
}

struct FrameHeader {
    std::uint8_t version = 0;
    std::uint8_t flags = 0;
    std::uint16_t name_len = 0;
    std::uint32_t body_len = 0;

    bool encrypted() const { return flags & kFlagEncrypted; }
    std::size_t total_bytes() const {
        return kFrameHeaderBytes + name_len + static_cast<std::size_t>(body_len) + 4;
    }
};

// Validates magic / version / reserved flags; used both by full parsing and
// by carriers that need the frame length before the rest has been read.
inline FrameHeader parse_frame_header(const std::uint8_t* data, std::size_t len) {
    if (len < kFrameHeaderBytes)
        throw IntegrityError("data too short for a payload frame header");
    for (int i = 0; i < 4; ++i)
        if (data[i] != kFrameMagic[i])
            throw IntegrityError("no hidden data found (bad magic; wrong bit depth?)");
    FrameHeader h;
    h.version = data[4];
    h.flags = data[5];
    h.name_len = get_u16le(data + 6);
    h.body_len = get_u32le(data + 8);
    if (h.version != kFrameVersion)
        throw IntegrityError("unsupported payload frame version");
    if (h.flags & ~kFlagEncrypted)
        throw IntegrityError("reserved frame flag bits are set");
    return h;
}

inline Bytes frame_payload(const Bytes& body, std::string_view name,
                           const std::optional<Passphrase>& pass = std::nullopt) {
    if (name.size() > 0xFFFF) throw UsageError("payload name longer than 65535 bytes");
    const std::uint32_t plain_crc = crc32(body);

    Bytes stored_body = body;
    std::uint8_t flags = 0;
    if (pass) {
        stored_body = des_encrypt(body, *pass);
        flags |= kFlagEncrypted;
    }
    if (stored_body.size() > 0xFFFFFFFFull) throw UsageError("payload body too large");

    Bytes frame;
    frame.reserve(kFrameHeaderBytes + name.size() + stored_body.size() + 4);
    frame.insert(frame.end(), kFrameMagic.begin(), kFrameMagic.end());
    frame.push_back(kFrameVersion);
    frame.push_back(flags);
    put_u16le(frame, static_cast<std::uint16_t>(name.size()));
    put_u32le(frame, static_cast<std::uint32_t>(stored_body.size()));
    frame.insert(frame.end(), name.begin(), name.end());
    frame.insert(frame.end(), stored_body.begin(), stored_body.end());
    put_u32le(frame, plain_crc);
    return frame;
}

struct ParsedFrame {
    Bytes body;
    std::string name;
};

inline ParsedFrame parse_frame(const Bytes& data,
                               const std::optional<Passphrase>& pass = std::nullopt) {
    if (data.size() < kFrameMinBytes)
        throw IntegrityError("data too short for a payload frame");
    const FrameHeader h = parse_frame_header(data.data(), data.size());
    if (data.size() < h.total_bytes())
        throw IntegrityError("payload frame truncated");

    ParsedFrame out;
    const std::uint8_t* p = data.data() + kFrameHeaderBytes;
    out.name.assign(p, p + h.name_len);
    p += h.name_len;
    Bytes body(p, p + h.body_len);
    const std::uint32_t stored_crc = get_u32le(p + h.body_len);

    if (h.encrypted()) {
        if (!pass) throw IntegrityError("passphrase required: payload frame is encrypted");
        body = des_decrypt(body, *pass);
    }
    if (crc32(body) != stored_crc)
        throw IntegrityError("payload CRC mismatch (wrong passphrase or corrupted carrier)");
    out.body = std::move(body);
    return out;
}

// Incremental frame assembly for extraction paths. Carriers feed bits in
// embed order; once the fixed 12-byte header has arrived the sink knows the
// exact frame length and stops asking for more.
class FrameBitSink {
public:
    bool wants_more() const { return writer_.bit_count() < total_bits_; }

    // Bits still required; callers must not feed more than this. Until the
    // header is known the bound is the 16-byte frame minimum, which keeps
    // per-byte reads whole: the embedded stream is contiguous, so a carrier
    // byte may straddle the header/name boundary.
    std::size_t bits_needed() const {
        const std::size_t bound = header_known_ ? total_bits_ : kFrameMinBytes * 8;
        return bound - writer_.bit_count();
    }

    void push_bit(int bit) {
        writer_.push_bit(bit);
        if (!header_known_ && writer_.bit_count() == kFrameHeaderBytes * 8) {
            const Bytes header = peek_bytes();
            const FrameHeader h = parse_frame_header(header.data(), header.size());
            total_bits_ = h.total_bytes() * 8;
            header_known_ = true;
        }
    }

    Bytes take_frame() {
        if (wants_more())
            throw IntegrityError("carrier ended before the payload frame was complete");
        return writer_.take();
    }

private:
    Bytes peek_bytes() const {
        BitWriter copy = writer_;
        return copy.take();
    }

    BitWriter writer_;
    std::size_t total_bits_ = kFrameHeaderBytes * 8;
    bool header_known_ = false;
};

} // namespace stego

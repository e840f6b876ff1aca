#pragma once

#include <array>
#include <cstdint>

#include "stego/bytes.hpp"
#include "stego/error.hpp"

// DES block cipher (FIPS 46-3) with CBC mode and PKCS#7 padding.
//
// DES is here because it is what the toolkit's passphrase option calls for;
// it is by no means a recommendation. The implementation is the plain
// table-driven one: every permutation is applied bit by bit from the
// published tables, with known-answer tests pinning the result.

namespace stego::des {

using Block = std::array<std::uint8_t, 8>;

namespace detail {

inline constexpr int kIP[64] = {
    58, 50, 42, 34, 26, 18, 10, 2, 60, 52, 44, 36, 28, 20, 12, 4,
    62, 54, 46, 38, 30, 22, 14, 6, 64, 56, 48, 40, 32, 24, 16, 8,
    57, 49, 41, 33, 25, 17, 9,  1, 59, 51, 43, 35, 27, 19, 11, 3,
    61, 53, 45, 37, 29, 21, 13, 5, 63, 55, 47, 39, 31, 23, 15, 7};

inline constexpr int kFP[64] = {
    40, 8, 48, 16, 56, 24, 64, 32, 39, 7, 47, 15, 55, 23, 63, 31,
    38, 6, 46, 14, 54, 22, 62, 30, 37, 5, 45, 13, 53, 21, 61, 29,
    36, 4, 44, 12, 52, 20, 60, 28, 35, 3, 43, 11, 51, 19, 59, 27,
    34, 2, 42, 10, 50, 18, 58, 26, 33, 1, 41, 9,  49, 17, 57, 25};

inline constexpr int kExpansion[48] = {
    32, 1,  2,  3,  4,  5,  4,  5,  6,  7,  8,  9,  8,  9,  10, 11,
    12, 13, 12, 13, 14, 15, 16, 17, 16, 17, 18, 19, 20, 21, 20, 21,
    22, 23, 24, 25, 24, 25, 26, 27, 28, 29, 28, 29, 30, 31, 32, 1};

inline constexpr int kP[32] = {16, 7,  20, 21, 29, 12, 28, 17, 1,  15, 23,
                               26, 5,  18, 31, 10, 2,  8,  24, 14, 32, 27,
                               3,  9,  19, 13, 30, 6,  22, 11, 4,  25};

inline constexpr int kPC1[56] = {
    57, 49, 41, 33, 25, 17, 9,  1,  58, 50, 42, 34, 26, 18, 10, 2,  59, 51, 43,
    35, 27, 19, 11, 3,  60, 52, 44, 36, 63, 55, 47, 39, 31, 23, 15, 7,  62, 54,
    46, 38, 30, 22, 14, 6,  61, 53, 45, 37, 29, 21, 13, 5,  28, 20, 12, 4};

inline constexpr int kPC2[48] = {
    14, 17, 11, 24, 1,  5,  3,  28, 15, 6,  21, 10, 23, 19, 12, 4,
    26, 8,  16, 7,  27, 20, 13, 2,  41, 52, 31, 37, 47, 55, 30, 40,
    51, 45, 33, 48, 44, 49, 39, 56, 34, 53, 46, 42, 50, 36, 29, 32};

inline constexpr int kShifts[16] = {1, 1, 2, 2, 2, 2, 2, 2, 1, 2, 2, 2, 2, 2, 2, 1};

inline constexpr std::uint8_t kSBox[8][64] = {
    {14, 4,  13, 1, 2,  15, 11, 8,  3,  10, 6,  12, 5,  9,  0, 7,
     0,  15, 7,  4, 14, 2,  13, 1,  10, 6,  12, 11, 9,  5,  3, 8,
     4,  1,  14, 8, 13, 6,  2,  11, 15, 12, 9,  7,  3,  10, 5, 0,
     15, 12, 8,  2, 4,  9,  1,  7,  5,  11, 3,  14, 10, 0,  6, 13},
    {15, 1,  8,  14, 6,  11, 3,  4,  9,  7, 2,  13, 12, 0, 5,  10,
     3,  13, 4,  7,  15, 2,  8,  14, 12, 0, 1,  10, 6,  9, 11, 5,
     0,  14, 7,  11, 10, 4,  13, 1,  5,  8, 12, 6,  9,  3, 2,  15,
     13, 8,  10, 1,  3,  15, 4,  2,  11, 6, 7,  12, 0,  5, 14, 9},
    {10, 0,  9,  14, 6, 3,  15, 5,  1,  13, 12, 7,  11, 4,  2,  8,
     13, 7,  0,  9,  3, 4,  6,  10, 2,  8,  5,  14, 12, 11, 15, 1,
     13, 6,  4,  9,  8, 15, 3,  0,  11, 1,  2,  12, 5,  10, 14, 7,
     1,  10, 13, 0,  6, 9,  8,  7,  4,  15, 14, 3,  11, 5,  2,  12},
    {7,  13, 14, 3, 0,  6,  9, 10, 1,  2, 8, 5,  11, 12, 4,  15,
     13, 8,  11, 5, 6,  15, 0, 3,  4,  7, 2, 12, 1,  10, 14, 9,
     10, 6,  9,  0, 12, 11, 7, 13, 15, 1, 3, 14, 5,  2,  8,  4,
     3,  15, 0,  6, 10, 1,  13, 8, 9,  4, 5, 11, 12, 7,  2,  14},
    {2,  12, 4,  1,  7,  10, 11, 6,  8,  5,  3,  15, 13, 0, 14, 9,
     14, 11, 2,  12, 4,  7,  13, 1,  5,  0,  15, 10, 3,  9, 8,  6,
     4,  2,  1,  11, 10, 13, 7,  8,  15, 9,  12, 5,  6,  3, 0,  14,
     11, 8,  12, 7,  1,  14, 2,  13, 6,  15, 0,  9,  10, 4, 5,  3},
    {12, 1,  10, 15, 9, 2,  6,  8,  0,  13, 3,  4,  14, 7,  5,  11,
     10, 15, 4,  2,  7, 12, 9,  5,  6,  1,  13, 14, 0,  11, 3,  8,
     9,  14, 15, 5,  2, 8,  12, 3,  7,  0,  4,  10, 1,  13, 11, 6,
     4,  3,  2,  12, 9, 5,  15, 10, 11, 14, 1,  7,  6,  0,  8,  13},
    {4,  11, 2,  14, 15, 0, 8,  13, 3,  12, 9, 7,  5,  10, 6, 1,
     13, 0,  11, 7,  4,  9, 1,  10, 14, 3,  5, 12, 2,  15, 8, 6,
     1,  4,  11, 13, 12, 3, 7,  14, 10, 15, 6, 8,  0,  5,  9, 2,
     6,  11, 13, 8,  1,  4, 10, 7,  9,  5,  0, 15, 14, 2,  3, 12},
    {13, 2,  8,  4, 6,  15, 11, 1,  10, 9,  3,  14, 5,  0,  12, 7,
     1,  15, 13, 8, 10, 3,  7,  4,  12, 5,  6,  11, 0,  14, 9,  2,
     7,  11, 4,  1, 9,  12, 14, 2,  0,  6,  10, 13, 15, 3,  5,  8,
     2,  1,  14, 7, 4,  10, 8,  13, 15, 12, 9,  0,  3,  5,  6,  11}};

// Generic bit permutation. Table entries are 1-based bit positions counted
// from the MSB of an `in_width`-bit value, per the FIPS table convention.
inline std::uint64_t permute(std::uint64_t in, int in_width, const int* table, int out_width) {
    std::uint64_t out = 0;
    for (int i = 0; i < out_width; ++i)
        out = (out << 1) | ((in >> (in_width - table[i])) & 1);
    return out;
}

inline std::uint64_t block_to_u64(const Block& b) {
    std::uint64_t v = 0;
    for (std::uint8_t byte : b) v = (v << 8) | byte;
    return v;
}

inline Block u64_to_block(std::uint64_t v) {
    Block b{};
    for (int i = 7; i >= 0; --i) {
        b[i] = static_cast<std::uint8_t>(v & 0xFF);
        v >>= 8;
    }
    return b;
}

inline std::uint32_t feistel(std::uint32_t r, std::uint64_t subkey) {
    const std::uint64_t expanded = permute(r, 32, kExpansion, 48) ^ subkey;
    std::uint32_t sboxed = 0;
    for (int i = 0; i < 8; ++i) {
        const auto six = static_cast<std::uint8_t>((expanded >> (42 - 6 * i)) & 0x3F);
        const int row = ((six >> 4) & 2) | (six & 1);
        const int col = (six >> 1) & 0xF;
        sboxed = (sboxed << 4) | kSBox[i][row * 16 + col];
    }
    return static_cast<std::uint32_t>(permute(sboxed, 32, kP, 32));
}

inline std::uint32_t rotl28(std::uint32_t v, int n) {
    return ((v << n) | (v >> (28 - n))) & 0x0FFFFFFFu;
}

} // namespace detail

// Expanded 16-round key schedule. Parity bits of the key are ignored, as in
// the standard.
class KeySchedule {
public:
    explicit KeySchedule(const Block& key) {
        using namespace detail;
        const std::uint64_t pc1 = permute(block_to_u64(key), 64, kPC1, 56);
        auto c = static_cast<std::uint32_t>(pc1 >> 28);
        auto d = static_cast<std::uint32_t>(pc1 & 0x0FFFFFFFu);
        for (int round = 0; round < 16; ++round) {
            c = rotl28(c, kShifts[round]);
            d = rotl28(d, kShifts[round]);
            const std::uint64_t cd = (static_cast<std::uint64_t>(c) << 28) | d;
            subkeys_[round] = permute(cd, 56, kPC2, 48);
        }
    }

    Block encrypt_block(const Block& in) const { return crypt(in, false); }
    Block decrypt_block(const Block& in) const { return crypt(in, true); }

private:
    Block crypt(const Block& in, bool reverse) const {
        using namespace detail;
        const std::uint64_t ip = permute(block_to_u64(in), 64, kIP, 64);
        auto left = static_cast<std::uint32_t>(ip >> 32);
        auto right = static_cast<std::uint32_t>(ip & 0xFFFFFFFFu);
        for (int round = 0; round < 16; ++round) {
            const std::uint64_t k = subkeys_[reverse ? 15 - round : round];
            const std::uint32_t next = left ^ feistel(right, k);
            left = right;
            right = next;
        }
        // Preoutput swaps the halves.
        const std::uint64_t pre = (static_cast<std::uint64_t>(right) << 32) | left;
        return u64_to_block(permute(pre, 64, kFP, 64));
    }

    std::array<std::uint64_t, 16> subkeys_{};
};

// CBC with PKCS#7 padding; output is always a whole number of blocks.
inline Bytes cbc_encrypt(const Bytes& plain, const Block& key, const Block& iv) {
    const KeySchedule ks(key);
    const std::size_t pad = 8 - plain.size() % 8;
    Bytes padded = plain;
    padded.insert(padded.end(), pad, static_cast<std::uint8_t>(pad));

    Bytes out;
    out.reserve(padded.size());
    Block chain = iv;
    for (std::size_t off = 0; off < padded.size(); off += 8) {
        Block block;
        for (int i = 0; i < 8; ++i) block[i] = padded[off + i] ^ chain[i];
        chain = ks.encrypt_block(block);
        out.insert(out.end(), chain.begin(), chain.end());
    }
    return out;
}

inline Bytes cbc_decrypt(const Bytes& cipher, const Block& key, const Block& iv) {
    if (cipher.empty() || cipher.size() % 8 != 0)
        throw IntegrityError("ciphertext length is not a whole number of DES blocks");
    const KeySchedule ks(key);

    Bytes out;
    out.reserve(cipher.size());
    Block chain = iv;
    for (std::size_t off = 0; off < cipher.size(); off += 8) {
        Block block;
        for (int i = 0; i < 8; ++i) block[i] = cipher[off + i];
        const Block plain = ks.decrypt_block(block);
        for (int i = 0; i < 8; ++i) out.push_back(plain[i] ^ chain[i]);
        chain = block;
    }

    const std::uint8_t pad = out.back();
    if (pad < 1 || pad > 8)
        throw IntegrityError("wrong passphrase or corrupted data (bad padding)");
    for (std::size_t i = out.size() - pad; i < out.size(); ++i)
        if (out[i] != pad)
            throw IntegrityError("wrong passphrase or corrupted data (bad padding)");
    out.resize(out.size() - pad);
    return out;
}

} // namespace stego::des

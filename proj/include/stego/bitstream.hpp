#pragma once

#include <cstddef>
#include <cstdint>

#include "stego/bytes.hpp"
#include "stego/error.hpp"

namespace stego {

// Bit order everywhere in the toolkit: MSB-first within each byte.

class BitReader {
public:
    explicit BitReader(const Bytes& data) : data_(&data) {}

    std::size_t remaining() const { return data_->size() * 8 - cursor_; }
    bool empty() const { return remaining() == 0; }

    int read_bit() {
        if (empty()) throw UsageError("bit stream exhausted");
        const std::size_t byte = cursor_ >> 3;
        const int shift = 7 - static_cast<int>(cursor_ & 7);
        ++cursor_;
        return ((*data_)[byte] >> shift) & 1;
    }

    // Reads the next bit, or 0 once the stream is exhausted (the padding
    // rule used by grammar encoding).
    int read_bit_or_zero() { return empty() ? 0 : read_bit(); }

    // Next n bits as an MSB-first group value, n <= 32.
    std::uint32_t read_bits(unsigned n) {
        std::uint32_t v = 0;
        for (unsigned i = 0; i < n; ++i) v = (v << 1) | static_cast<std::uint32_t>(read_bit());
        return v;
    }

private:
    const Bytes* data_;
    std::size_t cursor_ = 0;
};

class BitWriter {
public:
    void push_bit(int bit) {
        if (bit_count_ % 8 == 0) out_.push_back(0);
        if (bit) out_.back() |= static_cast<std::uint8_t>(1u << (7 - bit_count_ % 8));
        ++bit_count_;
    }

    void push_bits(std::uint32_t value, unsigned n) {
        for (unsigned i = 0; i < n; ++i) push_bit((value >> (n - 1 - i)) & 1);
    }

    std::size_t bit_count() const { return bit_count_; }

    // Whole bytes only; a ragged tail is a caller bug.
    Bytes take() {
        if (bit_count_ % 8 != 0)
            throw UsageError("bit count is not a multiple of 8");
        bit_count_ = 0;
        return std::move(out_);
    }

private:
    Bytes out_;
    std::size_t bit_count_ = 0;
};

// Explicit bit-vector forms of the same conversion, mostly useful in tests
// and for the documented examples.
inline std::vector<int> unpack_bits(const Bytes& data) {
    std::vector<int> bits;
    bits.reserve(data.size() * 8);
    for (std::uint8_t byte : data)
        for (int i = 7; i >= 0; --i) bits.push_back((byte >> i) & 1);
    return bits;
}

inline Bytes pack_bits(const std::vector<int>& bits) {
    if (bits.size() % 8 != 0)
        throw UsageError("bit count is not a multiple of 8");
    BitWriter w;
    for (int b : bits) w.push_bit(b);
    return w.take();
}

} // namespace stego

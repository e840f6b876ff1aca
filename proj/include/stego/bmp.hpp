#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "stego/bytes.hpp"
#include "stego/error.hpp"
#include "stego/lsb.hpp"
#include "stego/payload.hpp"

// 24-bit uncompressed BMP carrier. The codec keeps the original header and
// any trailing bytes verbatim so that an untouched image re-serializes
// byte-for-byte; only pixel bytes are ever rewritten, and row padding is
// never touched.

namespace stego {

struct BmpImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    Bytes header;  // file bytes up to the pixel array offset
    Bytes raster;  // pixel array exactly as stored (bottom-up rows + padding)
    Bytes trailer; // anything after the pixel array

    std::size_t row_stride() const { return (static_cast<std::size_t>(width) * 3 + 3) & ~std::size_t{3}; }
    std::size_t channel_bytes() const { return static_cast<std::size_t>(width) * height * 3; }

    // Top-down (R,G,B) view of the bottom-up BGR raster.
    std::array<std::uint8_t, 3> rgb(std::uint32_t x, std::uint32_t y) const {
        const std::size_t off = pixel_offset(x, y);
        return {raster[off + 2], raster[off + 1], raster[off]};
    }

    void set_rgb(std::uint32_t x, std::uint32_t y, std::array<std::uint8_t, 3> rgb) {
        const std::size_t off = pixel_offset(x, y);
        raster[off + 2] = rgb[0];
        raster[off + 1] = rgb[1];
        raster[off] = rgb[2];
    }

private:
    std::size_t pixel_offset(std::uint32_t x, std::uint32_t y) const {
        if (x >= width || y >= height) throw UsageError("pixel coordinates out of range");
        return static_cast<std::size_t>(height - 1 - y) * row_stride() + static_cast<std::size_t>(x) * 3;
    }
};

inline BmpImage load_bmp(const Bytes& file) {
    if (file.size() < 54 || file[0] != 'B' || file[1] != 'M')
        throw FormatError("not a BMP file (missing BM magic)");
    const std::uint32_t pixel_offset = get_u32le(file.data() + 10);
    const std::uint32_t info_size = get_u32le(file.data() + 14);
    if (info_size < 40) throw FormatError("unsupported BMP: info header smaller than 40 bytes");
    const auto width = static_cast<std::int32_t>(get_u32le(file.data() + 18));
    const auto height = static_cast<std::int32_t>(get_u32le(file.data() + 22));
    const std::uint16_t bpp = get_u16le(file.data() + 28);
    const std::uint32_t compression = get_u32le(file.data() + 30);

    if (bpp != 24)
        throw FormatError("unsupported BMP: bits-per-pixel is " + std::to_string(bpp) +
                          ", only 24 is supported");
    if (compression != 0)
        throw FormatError("unsupported BMP: compression field is " + std::to_string(compression) +
                          ", only uncompressed (0) is supported");
    if (width <= 0) throw FormatError("unsupported BMP: non-positive width");
    if (height <= 0)
        throw FormatError("unsupported BMP: non-positive height (top-down images not supported)");
    if (pixel_offset < 14 + info_size || pixel_offset > file.size())
        throw FormatError("corrupt BMP: pixel array offset out of range");

    BmpImage img;
    img.width = static_cast<std::uint32_t>(width);
    img.height = static_cast<std::uint32_t>(height);
    const std::size_t raster_size = img.row_stride() * img.height;
    if (file.size() - pixel_offset < raster_size)
        throw FormatError("corrupt BMP: truncated pixel array");

    img.header.assign(file.begin(), file.begin() + pixel_offset);
    img.raster.assign(file.begin() + pixel_offset, file.begin() + pixel_offset + raster_size);
    img.trailer.assign(file.begin() + pixel_offset + raster_size, file.end());
    return img;
}

inline Bytes save_bmp(const BmpImage& img) {
    Bytes out;
    out.reserve(img.header.size() + img.raster.size() + img.trailer.size());
    out.insert(out.end(), img.header.begin(), img.header.end());
    out.insert(out.end(), img.raster.begin(), img.raster.end());
    out.insert(out.end(), img.trailer.begin(), img.trailer.end());
    return out;
}

// Fresh all-black image with the canonical 54-byte header.
inline BmpImage make_bmp(std::uint32_t width, std::uint32_t height) {
    if (width == 0 || height == 0) throw UsageError("image dimensions must be positive");
    BmpImage img;
    img.width = width;
    img.height = height;
    img.raster.assign(img.row_stride() * height, 0);

    const auto file_size = static_cast<std::uint32_t>(54 + img.raster.size());
    Bytes& h = img.header;
    h = {'B', 'M'};
    put_u32le(h, file_size);
    put_u32le(h, 0); // reserved
    put_u32le(h, 54);
    put_u32le(h, 40);
    put_u32le(h, width);
    put_u32le(h, height);
    put_u16le(h, 1);  // planes
    put_u16le(h, 24); // bpp
    put_u32le(h, 0);  // BI_RGB
    put_u32le(h, static_cast<std::uint32_t>(img.raster.size()));
    put_u32le(h, 2835); // 72 dpi
    put_u32le(h, 2835);
    put_u32le(h, 0);
    put_u32le(h, 0);
    return img;
}

// Payload bytes that fit at depth k: floor(3*W*H*k / 8).
inline std::uint64_t bmp_capacity(const BmpImage& img, BitDepth k) {
    return static_cast<std::uint64_t>(img.channel_bytes()) * k.value / 8;
}

namespace detail {

// Channel bytes in stored-file order: bottom-up rows, B-G-R, padding skipped.
template <typename Byte, typename Fn>
void for_each_channel_byte(Byte* raster, std::uint32_t width, std::uint32_t height, Fn&& fn) {
    const std::size_t stride = (static_cast<std::size_t>(width) * 3 + 3) & ~std::size_t{3};
    for (std::uint32_t row = 0; row < height; ++row) {
        Byte* p = raster + static_cast<std::size_t>(row) * stride;
        for (std::size_t i = 0; i < static_cast<std::size_t>(width) * 3; ++i)
            if (!fn(p[i])) return;
    }
}

} // namespace detail

inline BmpImage bmp_embed(const BmpImage& cover, const Bytes& frame, BitDepth k) {
    const std::uint64_t need_bits = static_cast<std::uint64_t>(frame.size()) * 8;
    const std::uint64_t have_bits = static_cast<std::uint64_t>(cover.channel_bytes()) * k.value;
    if (need_bits > have_bits)
        throw CapacityError("capacity exceeded: needed " + std::to_string(frame.size()) +
                            " bytes, available " + std::to_string(bmp_capacity(cover, k)) +
                            " at " + std::to_string(k.value) + " bit(s)");

    BmpImage stego = cover;
    BitReader bits(frame);
    detail::for_each_channel_byte(stego.raster.data(), stego.width, stego.height,
                                  [&](std::uint8_t& b) {
                                      lsb::embed_byte(b, bits, k.value);
                                      return !bits.empty();
                                  });
    return stego;
}

inline ParsedFrame bmp_extract(const BmpImage& img, BitDepth k,
                               const std::optional<Passphrase>& pass = std::nullopt) {
    FrameBitSink sink;
    detail::for_each_channel_byte(img.raster.data(), img.width, img.height,
                                  [&](const std::uint8_t& b) {
                                      lsb::extract_byte(b, sink, k.value);
                                      return sink.wants_more();
                                  });
    return parse_frame(sink.take_frame(), pass);
}

struct Distortion {
    double mse = 0.0;
    double psnr_db = std::numeric_limits<double>::infinity();
    bool identical = true;
};

inline Distortion bmp_distortion(const BmpImage& cover, const BmpImage& stego) {
    if (cover.width != stego.width || cover.height != stego.height)
        throw UsageError("images have different dimensions");

    const std::size_t stride = cover.row_stride();
    const std::size_t row_bytes = static_cast<std::size_t>(cover.width) * 3;
    double sum_sq = 0.0;
    for (std::uint32_t row = 0; row < cover.height; ++row) {
        const std::uint8_t* a = cover.raster.data() + row * stride;
        const std::uint8_t* b = stego.raster.data() + row * stride;
        for (std::size_t i = 0; i < row_bytes; ++i) {
            const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
            sum_sq += d * d;
        }
    }

    Distortion out;
    out.mse = sum_sq / static_cast<double>(cover.channel_bytes());
    out.identical = (sum_sq == 0.0);
    if (!out.identical) out.psnr_db = 10.0 * std::log10(255.0 * 255.0 / out.mse);
    return out;
}

} // namespace stego

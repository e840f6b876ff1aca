// Hides a short message in a generated gradient image and gets it back.

#include <cstdio>

#include "stego/bmp.hpp"
#include "stego/payload.hpp"

using namespace stego;

int main() {
    BmpImage cover = make_bmp(64, 64);
    for (std::uint32_t y = 0; y < cover.height; ++y)
        for (std::uint32_t x = 0; x < cover.width; ++x)
            cover.set_rgb(x, y,
                          {static_cast<std::uint8_t>(4 * x), static_cast<std::uint8_t>(4 * y),
                           static_cast<std::uint8_t>(128 + x + y)});

    const Bytes secret = to_bytes("meet me at the usual place");
    const Passphrase pass{"demo"};
    const Bytes frame = frame_payload(secret, "note.txt", pass);

    const BitDepth k(2);
    const BmpImage stego = bmp_embed(cover, frame, k);
    const Distortion d = bmp_distortion(cover, stego);
    std::printf("capacity at k=2: %llu bytes\n",
                static_cast<unsigned long long>(bmp_capacity(cover, k)));
    std::printf("frame size: %zu bytes, mse %.4f, psnr %.1f dB\n", frame.size(), d.mse,
                d.psnr_db);

    const ParsedFrame got = bmp_extract(stego, k, pass);
    std::printf("recovered '%s': %s\n", got.name.c_str(), to_string(got.body).c_str());
    return 0;
}

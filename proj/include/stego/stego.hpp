#pragma once

// Umbrella header for the whole toolkit.

#include "stego/bitstream.hpp"
#include "stego/bmp.hpp"
#include "stego/bytes.hpp"
#include "stego/crc32.hpp"
#include "stego/des.hpp"
#include "stego/error.hpp"
#include "stego/lsb.hpp"
#include "stego/mimic.hpp"
#include "stego/payload.hpp"
#include "stego/sha256.hpp"
#include "stego/spam_grammar.hpp"
#include "stego/spectral.hpp"
#include "stego/vfs.hpp"
#include "stego/wav.hpp"

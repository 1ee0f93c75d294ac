#pragma once

#include "signmon/image.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace signmon {

struct ImageDecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Decode a PNG byte buffer. Bit depths, palettes and alpha are normalized
/// to 8-bit gray or RGB. Throws ImageDecodeError on anything malformed.
Image decode_png(const std::vector<std::uint8_t>& bytes);

/// Encode as 8-bit grayscale or RGB PNG (lossless; fixed settings so equal
/// images encode to equal bytes).
std::vector<std::uint8_t> encode_png(const Image& img);

Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& img);

} // namespace signmon

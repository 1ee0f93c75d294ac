#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace signmon {

/// 8-bit raster, 1 (gray) or 3 (RGB) channels, row-major.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, int c, std::uint8_t fill = 0);

    std::size_t index(int x, int y, int c = 0) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    std::uint8_t at(int x, int y, int c = 0) const { return pixels[index(x, y, c)]; }
    std::uint8_t& at(int x, int y, int c = 0) { return pixels[index(x, y, c)]; }

    bool operator==(const Image&) const = default;
};

/// Foreground/background mask; dimensions always match the image it came from.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits; // 0 = background, 1 = foreground

    BinaryImage() = default;
    BinaryImage(int w, int h, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }

    std::size_t count_foreground() const;

    bool operator==(const BinaryImage&) const = default;
};

/// Axis-aligned box in normalized image coordinates, components in [0, 1].
struct NormBox {
    double x = 0.0; // center x (Center mode) or left edge (Corner mode)
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    bool operator==(const NormBox&) const = default;
};

/// Interpretation of NormBox (x, y). The detector family this follows emits
/// box centers; corner form is kept selectable since other stacks use it.
enum class BoxMode { Center, Corner };

struct DegenerateBox : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// BT.601 luma conversion; identity on 1-channel input.
Image to_grayscale(const Image& img);

/// Bilinear resampling with pixel-center alignment (same-size resize is
/// bit-exact identity). Edge samples clamp.
Image resize_bilinear(const Image& img, int out_w, int out_h);

/// Pixel rectangle covered by the normalized box, clamped to the frame.
/// Throws DegenerateBox when the clamped box covers zero pixels.
Image crop_normalized(const Image& img, const NormBox& bbox, BoxMode mode = BoxMode::Center);

/// Otsu threshold over the 256-bin histogram (ties broken toward the
/// smallest threshold); foreground = samples strictly above the threshold.
/// A single-valued image yields that value and empty foreground.
std::pair<int, BinaryImage> binarize_otsu(const Image& gray);

} // namespace signmon

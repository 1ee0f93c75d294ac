#include "signmon/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace signmon {

Image::Image(int w, int h, int c, std::uint8_t fill) : width(w), height(h), channels(c) {
    if (w < 1 || h < 1 || (c != 1 && c != 3))
        throw std::invalid_argument("Image: bad dimensions");
    pixels.assign(static_cast<std::size_t>(w) * h * c, fill);
}

BinaryImage::BinaryImage(int w, int h, std::uint8_t fill) : width(w), height(h) {
    if (w < 1 || h < 1)
        throw std::invalid_argument("BinaryImage: bad dimensions");
    bits.assign(static_cast<std::size_t>(w) * h, fill);
}

std::size_t BinaryImage::count_foreground() const {
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

Image to_grayscale(const Image& img) {
    if (img.channels == 1) return img;
    Image out(img.width, img.height, 1);
    const std::uint8_t* src = img.pixels.data();
    for (std::size_t i = 0, n = out.pixels.size(); i < n; ++i, src += 3) {
        double luma = 0.299 * src[0] + 0.587 * src[1] + 0.114 * src[2];
        out.pixels[i] = static_cast<std::uint8_t>(std::lround(luma));
    }
    return out;
}

namespace {

inline std::uint8_t round_clamp_u8(double v) {
    long r = std::lround(v);
    return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

} // namespace

Image resize_bilinear(const Image& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1)
        throw std::invalid_argument("resize_bilinear: output dimensions must be >= 1");
    if (out_w == img.width && out_h == img.height) return img;

    Image out(out_w, out_h, img.channels);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;

    for (int oy = 0; oy < out_h; ++oy) {
        double fy = (oy + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        double wy = fy - y0;
        int y0c = std::clamp(y0, 0, img.height - 1);
        int y1c = std::clamp(y0 + 1, 0, img.height - 1);
        for (int ox = 0; ox < out_w; ++ox) {
            double fx = (ox + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            double wx = fx - x0;
            int x0c = std::clamp(x0, 0, img.width - 1);
            int x1c = std::clamp(x0 + 1, 0, img.width - 1);
            for (int c = 0; c < img.channels; ++c) {
                double top = (1.0 - wx) * img.at(x0c, y0c, c) + wx * img.at(x1c, y0c, c);
                double bot = (1.0 - wx) * img.at(x0c, y1c, c) + wx * img.at(x1c, y1c, c);
                out.at(ox, oy, c) = round_clamp_u8((1.0 - wy) * top + wy * bot);
            }
        }
    }
    return out;
}

Image crop_normalized(const Image& img, const NormBox& bbox, BoxMode mode) {
    double left, top, right, bottom;
    if (mode == BoxMode::Center) {
        left = (bbox.x - bbox.w / 2.0) * img.width;
        right = (bbox.x + bbox.w / 2.0) * img.width;
        top = (bbox.y - bbox.h / 2.0) * img.height;
        bottom = (bbox.y + bbox.h / 2.0) * img.height;
    } else {
        left = bbox.x * img.width;
        right = (bbox.x + bbox.w) * img.width;
        top = bbox.y * img.height;
        bottom = (bbox.y + bbox.h) * img.height;
    }

    int x0 = std::clamp(static_cast<int>(std::lround(left)), 0, img.width);
    int x1 = std::clamp(static_cast<int>(std::lround(right)), 0, img.width);
    int y0 = std::clamp(static_cast<int>(std::lround(top)), 0, img.height);
    int y1 = std::clamp(static_cast<int>(std::lround(bottom)), 0, img.height);
    if (x1 <= x0 || y1 <= y0)
        throw DegenerateBox("crop_normalized: box covers zero pixels");

    Image out(x1 - x0, y1 - y0, img.channels);
    for (int y = y0; y < y1; ++y) {
        const std::uint8_t* src = img.pixels.data() + img.index(x0, y);
        std::uint8_t* dst = out.pixels.data() + out.index(0, y - y0);
        std::copy(src, src + static_cast<std::size_t>(out.width) * img.channels, dst);
    }
    return out;
}

std::pair<int, BinaryImage> binarize_otsu(const Image& gray) {
    if (gray.channels != 1)
        throw std::invalid_argument("binarize_otsu: grayscale input required");

    std::array<std::size_t, 256> hist{};
    for (std::uint8_t v : gray.pixels) ++hist[v];
    const double total = static_cast<double>(gray.pixels.size());

    int lo = 0, hi = 255;
    while (hist[lo] == 0) ++lo;
    while (hist[hi] == 0) --hi;

    BinaryImage bin(gray.width, gray.height);
    if (lo == hi) {
        // Single-valued image: threshold at that value, empty foreground.
        return {lo, bin};
    }

    double sum_all = 0.0;
    for (int v = 0; v < 256; ++v) sum_all += static_cast<double>(v) * hist[v];

    int best_t = lo;
    double best_var = -1.0;
    double w0 = 0.0, sum0 = 0.0;
    for (int t = 0; t < 256; ++t) {
        w0 += static_cast<double>(hist[t]);
        sum0 += static_cast<double>(t) * hist[t];
        double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        double mu0 = sum0 / w0;
        double mu1 = (sum_all - sum0) / w1;
        double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }

    for (std::size_t i = 0; i < gray.pixels.size(); ++i)
        bin.bits[i] = gray.pixels[i] > best_t ? 1 : 0;
    return {best_t, bin};
}

} // namespace signmon

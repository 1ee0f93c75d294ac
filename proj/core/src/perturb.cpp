#include "signmon/perturb.hpp"

#include "signmon/rng.hpp"

#include <algorithm>
#include <cmath>

namespace signmon {

void validate_spec(const PerturbationSpec& spec) {
    if (const auto* sp = std::get_if<SaltPepper>(&spec)) {
        if (!(sp->level > 0.0 && sp->level < 1.0))
            throw std::invalid_argument("salt-pepper level must be in (0, 1)");
    } else if (const auto* sc = std::get_if<ScaleRoundtrip>(&spec)) {
        if (sc->side < 1) throw std::invalid_argument("scale-roundtrip side must be >= 1");
    } else if (const auto* bb = std::get_if<BoxBlur>(&spec)) {
        if (bb->kernel < 3 || bb->kernel % 2 == 0)
            throw std::invalid_argument("box-blur kernel must be odd and >= 3");
    } else if (const auto* br = std::get_if<Brightness>(&spec)) {
        if (!(br->factor > 0.0)) throw std::invalid_argument("brightness factor must be > 0");
    }
}

std::string perturbation_name(const PerturbationSpec& spec) {
    switch (spec.index()) {
        case 0: return "horizontal-flip";
        case 1: return "salt-pepper";
        case 2: return "scale-roundtrip";
        case 3: return "box-blur";
        default: return "brightness";
    }
}

namespace {

Image flip_horizontal(const Image& img) {
    Image out(img.width, img.height, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
    return out;
}

Image salt_pepper(const Image& img, double level, std::uint64_t seed) {
    Image out = img;
    Rng rng(seed);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            if (!rng.chance(level)) continue;
            std::uint8_t v = rng.chance(0.5) ? 255 : 0;
            for (int c = 0; c < img.channels; ++c) out.at(x, y, c) = v;
        }
    }
    return out;
}

Image box_blur(const Image& img, int kernel) {
    // Normalized mean filter, clamp-to-edge. Separable row/column sums with
    // a single divide, so the result is the exact rounded window mean.
    const int r = kernel / 2;
    std::vector<int> rowsum(img.pixels.size());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                int sum = 0;
                for (int k = -r; k <= r; ++k)
                    sum += img.at(std::clamp(x + k, 0, img.width - 1), y, c);
                rowsum[img.index(x, y, c)] = sum;
            }
        }
    }
    Image out(img.width, img.height, img.channels);
    const double norm = static_cast<double>(kernel) * kernel;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < img.channels; ++c) {
                int sum = 0;
                for (int k = -r; k <= r; ++k)
                    sum += rowsum[img.index(x, std::clamp(y + k, 0, img.height - 1), c)];
                out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(sum / norm));
            }
        }
    }
    return out;
}

Image brightness(const Image& img, double factor) {
    Image out(img.width, img.height, img.channels);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        long v = std::lround(img.pixels[i] * factor);
        out.pixels[i] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
    }
    return out;
}

} // namespace

Image apply_perturbation(const Image& img, const PerturbationSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    if (std::holds_alternative<HorizontalFlip>(spec)) {
        return flip_horizontal(img);
    }
    if (const auto* sp = std::get_if<SaltPepper>(&spec)) {
        return salt_pepper(img, sp->level, seed);
    }
    if (const auto* sc = std::get_if<ScaleRoundtrip>(&spec)) {
        Image small = resize_bilinear(img, sc->side, sc->side);
        return resize_bilinear(small, img.width, img.height);
    }
    if (const auto* bb = std::get_if<BoxBlur>(&spec)) {
        return box_blur(img, bb->kernel);
    }
    return brightness(img, std::get<Brightness>(spec).factor);
}

} // namespace signmon

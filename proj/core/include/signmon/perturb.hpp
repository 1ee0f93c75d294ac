#pragma once

#include "signmon/image.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace signmon {

// The five perturbation families applied to sign templates before pasting.

struct HorizontalFlip {
    bool operator==(const HorizontalFlip&) const = default;
};

struct SaltPepper {
    double level = 0.05; // per-pixel corruption probability, in (0, 1)
    bool operator==(const SaltPepper&) const = default;
};

struct ScaleRoundtrip {
    int side = 100; // square side in pixels, >= 1
    bool operator==(const ScaleRoundtrip&) const = default;
};

struct BoxBlur {
    int kernel = 3; // odd kernel size >= 3
    bool operator==(const BoxBlur&) const = default;
};

struct Brightness {
    double factor = 1.0; // > 0
    bool operator==(const Brightness&) const = default;
};

using PerturbationSpec =
    std::variant<HorizontalFlip, SaltPepper, ScaleRoundtrip, BoxBlur, Brightness>;

/// Throws std::invalid_argument when the spec violates its family's range.
void validate_spec(const PerturbationSpec& spec);

std::string perturbation_name(const PerturbationSpec& spec);

/// Applies one perturbation. Pure in (img, spec, seed): equal inputs give
/// byte-identical output. Only salt-pepper consumes the seed.
Image apply_perturbation(const Image& img, const PerturbationSpec& spec, std::uint64_t seed);

} // namespace signmon

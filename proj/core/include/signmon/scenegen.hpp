#pragma once

#include "signmon/image.hpp"
#include "signmon/ontology.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace signmon {

struct SignTemplate {
    SignClass cls = SignClass::Sh0;
    Image face; // square RGB render
    double nominal_angle_deg = 0.0;
};

/// Ground-truth record: bbox is center-form normalized, matching the
/// certificate default.
struct Truth {
    NormBox bbox;
    SignClass cls = SignClass::Sh0;
};

struct Scene {
    Image image;
    std::vector<Truth> truths;
    std::uint64_t scene_seed = 0;
};

struct PlacementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Placement and perturbation knobs for compose_scene; defaults match the
/// dataset generator.
struct CompositionParams {
    int side_min = 64;
    int side_max = 160;
    std::vector<std::string> perturbations{"horizontal-flip", "salt-pepper",
                                           "scale-roundtrip", "box-blur", "brightness"};
    int placement_retries = 100;
    int margin = 4; // min pixel gap between pasted signs
};

struct GenerationConfig {
    int scenes = 100;
    std::uint64_t master_seed = 1;
    std::string background = "procedural"; // or a directory of PNGs
    int scene_width = 640;
    int scene_height = 480;
    int sign_side_min = 64;
    int sign_side_max = 160;
    std::vector<std::string> perturbations{"horizontal-flip", "salt-pepper",
                                           "scale-roundtrip", "box-blur", "brightness"};
};

struct ManifestEntry {
    std::string image; // path relative to the dataset root
    std::vector<Truth> truths;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    GenerationConfig config;

    std::size_t total_signs() const;
};

/// Deterministic sign render: dark square face carrying a darker disc and
/// two bright half-discs split along a diameter at the class angle, with
/// seed-driven value/tint variation. side >= 32.
SignTemplate render_sign(SignClass cls, int side, std::uint64_t seed);

/// Procedural backdrop: vertical light-to-dark gradient, two octaves of
/// value noise, and a few low-contrast wavy horizontal bands.
Image make_background(int w, int h, std::uint64_t seed);

/// Pastes `count` randomly scaled + perturbed copies drawn from `templates`
/// at non-overlapping positions. Throws PlacementError when the retry
/// budget runs out.
Scene compose_scene(const Image& background, const std::vector<SignTemplate>& templates,
                    int count, std::uint64_t seed, const CompositionParams& params = {});

/// Renders cfg.scenes scenes under out_dir: scenes/NNNNNN.png, a JSON-Lines
/// manifest.jsonl and a config.json snapshot. All randomness flows from
/// (master_seed, scene index).
DatasetManifest generate_dataset(const GenerationConfig& cfg, const std::string& out_dir);

/// Reads back manifest.jsonl + config.json written by generate_dataset.
DatasetManifest load_manifest(const std::string& dataset_dir);

std::string manifest_entry_to_json(const ManifestEntry& entry);
ManifestEntry manifest_entry_from_json(const std::string& line);
std::string generation_config_to_json(const GenerationConfig& cfg);
GenerationConfig generation_config_from_json(const std::string& doc);

} // namespace signmon

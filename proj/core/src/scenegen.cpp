#include "signmon/scenegen.hpp"

#include "signmon/perturb.hpp"
#include "signmon/png_io.hpp"
#include "signmon/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace signmon {

std::size_t DatasetManifest::total_signs() const {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.truths.size();
    return n;
}

namespace {

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

// Smooth seeded lattice noise in [-1, 1]; the building block for both the
// backdrop texture and band waviness.
double lattice_value(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
    const std::uint64_t k =
        mix_seed(mix_seed(seed, static_cast<std::uint64_t>(ix) * 2 + 1),
                 static_cast<std::uint64_t>(iy) * 2 + 1);
    Rng r(k);
    return r.uniform() * 2.0 - 1.0;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(std::uint64_t seed, double x, double y, double cell) {
    const double gx = x / cell, gy = y / cell;
    const auto ix = static_cast<std::int64_t>(std::floor(gx));
    const auto iy = static_cast<std::int64_t>(std::floor(gy));
    const double tx = smoothstep(gx - static_cast<double>(ix));
    const double ty = smoothstep(gy - static_cast<double>(iy));
    const double v00 = lattice_value(seed, ix, iy);
    const double v10 = lattice_value(seed, ix + 1, iy);
    const double v01 = lattice_value(seed, ix, iy + 1);
    const double v11 = lattice_value(seed, ix + 1, iy + 1);
    const double a = v00 + (v10 - v00) * tx;
    const double b = v01 + (v11 - v01) * tx;
    return a + (b - a) * ty;
}

const std::vector<std::string>& known_perturbations() {
    static const std::vector<std::string> names{"horizontal-flip", "salt-pepper",
                                                "scale-roundtrip", "box-blur", "brightness"};
    return names;
}

struct PasteRect {
    int x = 0, y = 0, side = 0;
};

bool rects_overlap(const PasteRect& a, const PasteRect& b, int margin) {
    return a.x < b.x + b.side + margin && b.x < a.x + a.side + margin &&
           a.y < b.y + b.side + margin && b.y < a.y + a.side + margin;
}

} // namespace

SignTemplate render_sign(SignClass cls, int side, std::uint64_t seed) {
    Rng rng(seed);
    const double angle = expected_angle_deg(cls);
    const double rad = angle * std::acos(-1.0) / 180.0;

    const int bright = rng.range_int(205, 240);
    const int disc_dark = rng.range_int(24, 42);
    const int base_dark = disc_dark + rng.range_int(16, 30);
    int tint[3];
    for (int& t : tint) t = rng.range_int(-10, 10);

    const double c = (side - 1) / 2.0;
    const double disc_r = 0.47 * side;
    const double semi_r = 0.40 * side;
    const double gap = std::max(0.07 * side, 3.0);
    // split normal: perpendicular to a diameter at `angle` from horizontal
    const double nx = std::sin(rad), ny = std::cos(rad);

    Image face;
    face.width = side;
    face.height = side;
    face.channels = 3;
    face.pixels.resize(static_cast<std::size_t>(side) * side * 3);

    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double dx = x - c, dy = y - c;
            const double rho = std::hypot(dx, dy);
            const double q = dx * nx + dy * ny;
            int value;
            bool is_bright = false;
            if (rho <= semi_r && std::abs(q) >= gap) {
                value = bright;
                is_bright = true;
            } else if (rho <= disc_r) {
                value = disc_dark;
            } else {
                value = base_dark;
            }
            const int speckle = rng.range_int(-6, 6);
            for (int ch = 0; ch < 3; ++ch) {
                const int tinted = value + speckle + (is_bright ? tint[ch] : tint[ch] / 3);
                face.pixels[face.index(x, y, ch)] = clamp_u8(tinted);
            }
        }
    }
    return SignTemplate{cls, std::move(face), angle};
}

Image make_background(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    const double top = rng.uniform(125.0, 170.0);
    const double bottom = rng.uniform(55.0, 105.0);
    const double tilt = rng.uniform(-15.0, 15.0);
    const std::uint64_t coarse_seed = rng.next_u64();
    const std::uint64_t fine_seed = rng.next_u64();
    int tint[3];
    for (int& t : tint) t = rng.range_int(-6, 6);

    struct Band {
        double y0, half, depth, amp;
        std::uint64_t wave_seed;
    };
    std::vector<Band> bands;
    const int nbands = rng.range_int(1, 3);
    for (int i = 0; i < nbands; ++i) {
        Band b;
        b.y0 = rng.uniform(0.15 * h, 0.9 * h);
        b.half = rng.uniform(5.0, 16.0);
        b.depth = rng.uniform(18.0, 30.0);
        b.amp = rng.uniform(4.0, 10.0);
        b.wave_seed = rng.next_u64();
        bands.push_back(b);
    }

    Image img;
    img.width = w;
    img.height = h;
    img.channels = 3;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v = top + (bottom - top) * (static_cast<double>(y) / std::max(1, h - 1)) +
                       tilt * (static_cast<double>(x) / std::max(1, w - 1) - 0.5);
            v += 22.0 * value_noise(coarse_seed, x, y, 48.0);
            v += 9.0 * value_noise(fine_seed, x, y, 16.0);
            for (const Band& b : bands) {
                const double edge = b.y0 + b.amp * value_noise(b.wave_seed, x, 0, 40.0);
                const double d = std::abs(y - edge);
                if (d <= b.half)
                    v -= b.depth;
                else if (d <= b.half + 3.0)
                    v -= b.depth * (b.half + 3.0 - d) / 3.0; // soft edge
            }
            for (int ch = 0; ch < 3; ++ch)
                img.pixels[img.index(x, y, ch)] = clamp_u8(v + tint[ch]);
        }
    }
    return img;
}

namespace {

// The per-scene perturbation combination: a subset of the allowed families,
// one paper-listed level each.
std::vector<PerturbationSpec> sample_combination(Rng& rng,
                                                 const std::vector<std::string>& allowed) {
    const std::set<std::string> pick(allowed.begin(), allowed.end());
    std::vector<PerturbationSpec> combo;
    if (pick.count("horizontal-flip") && rng.chance(0.5)) combo.push_back(HorizontalFlip{});
    if (pick.count("salt-pepper") && rng.chance(0.5)) {
        const double levels[] = {0.05, 0.075};
        combo.push_back(SaltPepper{levels[rng.below(2)]});
    }
    if (pick.count("scale-roundtrip") && rng.chance(0.5)) {
        const int sides[] = {50, 100, 213, 416, 832};
        combo.push_back(ScaleRoundtrip{sides[rng.below(5)]});
    }
    if (pick.count("box-blur") && rng.chance(0.5)) {
        const int kernels[] = {3, 5, 7};
        combo.push_back(BoxBlur{kernels[rng.below(3)]});
    }
    if (pick.count("brightness") && rng.chance(0.5)) {
        const double factors[] = {0.5, 1.5};
        combo.push_back(Brightness{factors[rng.below(2)]});
    }
    return combo;
}

Image ensure_rgb(const Image& img) {
    if (img.channels == 3) return img;
    Image out;
    out.width = img.width;
    out.height = img.height;
    out.channels = 3;
    out.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int ch = 0; ch < 3; ++ch)
                out.pixels[out.index(x, y, ch)] = img.pixels[img.index(x, y, 0)];
    return out;
}

} // namespace

Scene compose_scene(const Image& background, const std::vector<SignTemplate>& templates,
                    int count, std::uint64_t seed, const CompositionParams& params) {
    if (count < 1 || count > 4) throw std::invalid_argument("sign count must be in 1..4");
    if (templates.empty()) throw std::invalid_argument("no templates to place");

    Scene scene;
    scene.image = ensure_rgb(background);
    scene.scene_seed = seed;
    const int W = scene.image.width, H = scene.image.height;

    Rng rng(seed);
    const int side_cap = std::min({params.side_max, W - 2, H - 2});
    if (side_cap < params.side_min)
        throw std::invalid_argument("background too small for the sign side range");

    const std::vector<PerturbationSpec> combo = sample_combination(rng, params.perturbations);

    std::vector<PasteRect> placed;
    for (int i = 0; i < count; ++i) {
        const std::size_t tpl_idx = rng.below(templates.size());
        const int side = rng.range_int(params.side_min, side_cap);

        PasteRect rect;
        rect.side = side;
        bool found = false;
        for (int attempt = 0; attempt < params.placement_retries; ++attempt) {
            rect.x = static_cast<int>(rng.below(static_cast<std::uint64_t>(W - side + 1)));
            rect.y = static_cast<int>(rng.below(static_cast<std::uint64_t>(H - side + 1)));
            const auto clash = [&](const PasteRect& other) {
                return rects_overlap(rect, other, params.margin);
            };
            if (std::none_of(placed.begin(), placed.end(), clash)) {
                found = true;
                break;
            }
        }
        if (!found) throw PlacementError("could not place sign " + std::to_string(i));
        placed.push_back(rect);

        Image face = resize_bilinear(templates[tpl_idx].face, side, side);
        for (const PerturbationSpec& spec : combo)
            face = apply_perturbation(face, spec, rng.next_u64());

        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x)
                for (int ch = 0; ch < 3; ++ch)
                    scene.image.pixels[scene.image.index(rect.x + x, rect.y + y, ch)] =
                        face.pixels[face.index(x, y, ch)];

        Truth truth;
        truth.cls = templates[tpl_idx].cls;
        truth.bbox = NormBox{(rect.x + side / 2.0) / W, (rect.y + side / 2.0) / H,
                             static_cast<double>(side) / W, static_cast<double>(side) / H};
        scene.truths.push_back(truth);
    }
    return scene;
}

namespace {

GenerationConfig validate_generation_config(const GenerationConfig& cfg) {
    if (cfg.scenes < 1) throw std::invalid_argument("scenes must be positive");
    if (cfg.scene_width < 64 || cfg.scene_height < 64)
        throw std::invalid_argument("scene size too small");
    if (cfg.sign_side_min < 32 || cfg.sign_side_min > cfg.sign_side_max)
        throw std::invalid_argument("sign_side_range must satisfy 32 <= min <= max");
    const auto& known = known_perturbations();
    for (const auto& name : cfg.perturbations)
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw std::invalid_argument("unknown perturbation family: " + name);
    return cfg;
}

std::vector<std::string> list_background_files(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .png backgrounds in " + dir);
    return files;
}

} // namespace

DatasetManifest generate_dataset(const GenerationConfig& cfg, const std::string& out_dir) {
    validate_generation_config(cfg);

    std::vector<std::string> bg_files;
    if (cfg.background != "procedural") {
        if (!fs::is_directory(cfg.background))
            throw IoError("background directory not found: " + cfg.background);
        bg_files = list_background_files(cfg.background);
    }

    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "scenes", ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

    CompositionParams params;
    params.side_min = cfg.sign_side_min;
    params.side_max = cfg.sign_side_max;
    params.perturbations = cfg.perturbations;

    DatasetManifest manifest;
    manifest.config = cfg;

    for (int idx = 0; idx < cfg.scenes; ++idx) {
        const std::uint64_t scene_seed = mix_seed(cfg.master_seed, static_cast<std::uint64_t>(idx));
        Rng rng(scene_seed);

        Image background;
        if (bg_files.empty()) {
            background = make_background(cfg.scene_width, cfg.scene_height, rng.next_u64());
        } else {
            background = read_png(bg_files[rng.below(bg_files.size())]);
            background = resize_bilinear(ensure_rgb(background), cfg.scene_width, cfg.scene_height);
        }

        const int count = rng.range_int(1, 4);
        std::vector<SignTemplate> templates;
        templates.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            const auto cls = kAllClasses[rng.below(3)];
            templates.push_back(render_sign(cls, 206, rng.next_u64()));
        }

        // A crowded draw can fail to place; retry with fresh sub-seeds a few
        // times before giving up on the whole run.
        Scene scene;
        const int kSceneAttempts = 8;
        for (int attempt = 0;; ++attempt) {
            try {
                scene = compose_scene(background, templates, count,
                                      mix_seed(scene_seed, 1 + static_cast<std::uint64_t>(attempt)),
                                      params);
                break;
            } catch (const PlacementError&) {
                if (attempt + 1 >= kSceneAttempts) throw;
            }
        }

        char name[32];
        std::snprintf(name, sizeof(name), "scenes/%06d.png", idx);
        write_png((fs::path(out_dir) / name).string(), scene.image);
        manifest.entries.push_back(ManifestEntry{name, scene.truths});
    }

    std::ofstream mf(fs::path(out_dir) / "manifest.jsonl", std::ios::binary);
    if (!mf) throw IoError("cannot write manifest.jsonl");
    for (const auto& entry : manifest.entries) mf << manifest_entry_to_json(entry) << '\n';
    mf.close();
    if (!mf) throw IoError("failed writing manifest.jsonl");

    std::ofstream cf(fs::path(out_dir) / "config.json", std::ios::binary);
    if (!cf) throw IoError("cannot write config.json");
    cf << generation_config_to_json(cfg) << '\n';
    cf.close();
    if (!cf) throw IoError("failed writing config.json");

    return manifest;
}

DatasetManifest load_manifest(const std::string& dataset_dir) {
    std::ifstream cf(fs::path(dataset_dir) / "config.json", std::ios::binary);
    if (!cf) throw IoError("missing config.json in " + dataset_dir);
    std::stringstream cbuf;
    cbuf << cf.rdbuf();

    DatasetManifest manifest;
    manifest.config = generation_config_from_json(cbuf.str());

    std::ifstream mf(fs::path(dataset_dir) / "manifest.jsonl", std::ios::binary);
    if (!mf) throw IoError("missing manifest.jsonl in " + dataset_dir);
    std::string line;
    while (std::getline(mf, line)) {
        if (line.empty()) continue;
        manifest.entries.push_back(manifest_entry_from_json(line));
    }
    return manifest;
}

std::string manifest_entry_to_json(const ManifestEntry& entry) {
    nlohmann::ordered_json truths = nlohmann::ordered_json::array();
    for (const Truth& t : entry.truths) {
        nlohmann::ordered_json jt;
        jt["bbox"] = {t.bbox.x, t.bbox.y, t.bbox.w, t.bbox.h};
        jt["class"] = class_name(t.cls);
        truths.push_back(std::move(jt));
    }
    nlohmann::ordered_json j;
    j["image"] = entry.image;
    j["truths"] = std::move(truths);
    return j.dump();
}

ManifestEntry manifest_entry_from_json(const std::string& line) {
    const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object() || !j.contains("image") || !j.contains("truths"))
        throw IoError("bad manifest line: " + line);
    ManifestEntry entry;
    entry.image = j["image"].get<std::string>();
    for (const auto& jt : j["truths"]) {
        const auto cls = class_from_name(jt.at("class").get<std::string>());
        if (!cls) throw IoError("bad manifest class in: " + line);
        const auto& jb = jt.at("bbox");
        if (!jb.is_array() || jb.size() != 4) throw IoError("bad manifest bbox in: " + line);
        Truth t;
        t.bbox = NormBox{jb[0].get<double>(), jb[1].get<double>(), jb[2].get<double>(),
                         jb[3].get<double>()};
        t.cls = *cls;
        entry.truths.push_back(t);
    }
    return entry;
}

std::string generation_config_to_json(const GenerationConfig& cfg) {
    nlohmann::ordered_json j;
    j["scenes"] = cfg.scenes;
    j["master_seed"] = cfg.master_seed;
    j["background"] = cfg.background;
    j["scene_size"] = {cfg.scene_width, cfg.scene_height};
    j["sign_side_range"] = {cfg.sign_side_min, cfg.sign_side_max};
    j["perturbations"] = cfg.perturbations;
    return j.dump(2);
}

GenerationConfig generation_config_from_json(const std::string& doc) {
    const auto j = nlohmann::json::parse(doc, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) throw IoError("bad generation config document");
    GenerationConfig cfg;
    cfg.scenes = j.value("scenes", cfg.scenes);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.background = j.value("background", cfg.background);
    if (j.contains("scene_size")) {
        cfg.scene_width = j["scene_size"].at(0).get<int>();
        cfg.scene_height = j["scene_size"].at(1).get<int>();
    }
    if (j.contains("sign_side_range")) {
        cfg.sign_side_min = j["sign_side_range"].at(0).get<int>();
        cfg.sign_side_max = j["sign_side_range"].at(1).get<int>();
    }
    if (j.contains("perturbations"))
        cfg.perturbations = j["perturbations"].get<std::vector<std::string>>();
    return cfg;
}

} // namespace signmon

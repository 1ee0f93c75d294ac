#include "signmon/eval.hpp"
#include "signmon/monitor.hpp"
#include "signmon/png_io.hpp"
#include "signmon/rng.hpp"
#include "signmon/scenegen.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <variant>

namespace fs = std::filesystem;
using namespace signmon;

namespace {

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    auto j = nlohmann::json::parse(ss.str(), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("config file is not a JSON object: " + path);
    return j;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Tolerance + bbox-convention flags shared by check/eval/bench. A config
// file fills in whatever the command line left untouched.
struct TolOpts {
    double delta1 = 0.2, delta2 = 0.2, delta3 = 0.1, delta4 = 0.3, delta5 = 0.2;
    double angle_floor = 5.0;
    std::string area_mode = "area-fraction";
    std::string angle_mode = "robust";
    std::string bbox_mode = "center";
    CLI::Option* opts[9] = {};

    void add_to(CLI::App* cmd) {
        opts[0] = cmd->add_option("--delta1", delta1, "pair area similarity tolerance");
        opts[1] = cmd->add_option("--delta2", delta2, "pair orientation similarity tolerance");
        opts[2] = cmd->add_option("--delta3", delta3, "area lower bound factor");
        opts[3] = cmd->add_option("--delta4", delta4, "area upper bound factor");
        opts[4] = cmd->add_option("--delta5", delta5, "expected-angle tolerance (x90 deg)");
        opts[5] = cmd->add_option("--angle-floor", angle_floor,
                                  "additive floor for robust orientation similarity, degrees");
        opts[6] = cmd->add_option("--area-mode", area_mode, "condition 3-4 reading")
                      ->check(CLI::IsMember({"literal", "area-fraction"}));
        opts[7] = cmd->add_option("--angle-mode", angle_mode, "condition 2 reading")
                      ->check(CLI::IsMember({"paper-literal", "robust"}));
        opts[8] = cmd->add_option("--bbox-mode", bbox_mode, "bbox interpretation")
                      ->check(CLI::IsMember({"center", "corner"}));
    }

    void apply_file(const nlohmann::json& j) {
        const char* keys[] = {"delta1", "delta2",       "delta3",     "delta4",   "delta5",
                              "angle_floor_deg", "area_mode", "angle_mode", "bbox_mode"};
        double* nums[] = {&delta1, &delta2, &delta3, &delta4, &delta5, &angle_floor};
        for (int i = 0; i < 6; ++i)
            if (!opts[i]->count() && j.contains(keys[i])) {
                if (!j[keys[i]].is_number()) throw ConfigError(std::string(keys[i]) + " must be a number");
                *nums[i] = j[keys[i]].get<double>();
            }
        std::string* strs[] = {&area_mode, &angle_mode, &bbox_mode};
        for (int i = 6; i < 9; ++i)
            if (!opts[i]->count() && j.contains(keys[i])) {
                if (!j[keys[i]].is_string()) throw ConfigError(std::string(keys[i]) + " must be a string");
                *strs[i - 6] = j[keys[i]].get<std::string>();
            }
    }

    ToleranceConfig tolerance() const {
        ToleranceConfig cfg;
        cfg.delta1 = delta1;
        cfg.delta2 = delta2;
        cfg.delta3 = delta3;
        cfg.delta4 = delta4;
        cfg.delta5 = delta5;
        cfg.angle_floor_deg = angle_floor;
        if (area_mode == "literal")
            cfg.area_mode = AreaMode::Literal;
        else if (area_mode == "area-fraction")
            cfg.area_mode = AreaMode::AreaFraction;
        else
            throw ConfigError("area_mode must be literal or area-fraction");
        if (angle_mode == "paper-literal")
            cfg.angle_mode = AngleMode::PaperLiteral;
        else if (angle_mode == "robust")
            cfg.angle_mode = AngleMode::Robust;
        else
            throw ConfigError("angle_mode must be paper-literal or robust");
        return validate_config(cfg);
    }

    BoxMode box_mode() const {
        if (bbox_mode == "center") return BoxMode::Center;
        if (bbox_mode == "corner") return BoxMode::Corner;
        throw ConfigError("bbox_mode must be center or corner");
    }
};

struct GenOpts {
    std::string config_path, out_dir;
    GenerationConfig cfg;
    std::string perturbations_csv; // unused; vector bound directly
    CLI::Option *o_scenes{}, *o_seed{}, *o_background{}, *o_width{}, *o_height{}, *o_smin{},
        *o_smax{}, *o_pert{};
};

struct CheckOpts {
    std::string config_path, cert_path;
    bool timing = false;
    TolOpts tol;
};

struct EvalOpts {
    std::string config_path, data_dir, out_dir;
    std::uint64_t seed = 1;
    ErrorModel em;
    double iou_threshold = 0.5;
    bool timing = false;
    TolOpts tol;
    CLI::Option *o_miss{}, *o_fp{}, *o_conf{}, *o_jitter{}, *o_iou{};
};

struct BenchOpts {
    std::string config_path, data_dir;
    int count = 1000;
    std::uint64_t seed = 1;
    TolOpts tol;
};

struct RenderOpts {
    std::string cls_name, out_path;
    int side = 206;
    std::uint64_t seed = 1;
};

int run_gen(const GenOpts& o) {
    GenerationConfig cfg = o.cfg;
    if (!o.config_path.empty()) {
        const auto j = load_config_file(o.config_path);
        if (!o.o_scenes->count() && j.contains("scenes")) cfg.scenes = j["scenes"].get<int>();
        if (!o.o_seed->count() && j.contains("master_seed"))
            cfg.master_seed = j["master_seed"].get<std::uint64_t>();
        if (!o.o_background->count() && j.contains("background"))
            cfg.background = j["background"].get<std::string>();
        if (!o.o_width->count() && !o.o_height->count() && j.contains("scene_size")) {
            cfg.scene_width = j["scene_size"].at(0).get<int>();
            cfg.scene_height = j["scene_size"].at(1).get<int>();
        }
        if (!o.o_smin->count() && !o.o_smax->count() && j.contains("sign_side_range")) {
            cfg.sign_side_min = j["sign_side_range"].at(0).get<int>();
            cfg.sign_side_max = j["sign_side_range"].at(1).get<int>();
        }
        if (!o.o_pert->count() && j.contains("perturbations"))
            cfg.perturbations = j["perturbations"].get<std::vector<std::string>>();
    }
    const DatasetManifest manifest = generate_dataset(cfg, o.out_dir);
    nlohmann::ordered_json j;
    j["scenes"] = manifest.entries.size();
    j["signs"] = manifest.total_signs();
    j["out"] = o.out_dir;
    std::cout << j.dump() << '\n';
    return 0;
}

int run_check(CheckOpts& o) {
    if (!o.config_path.empty()) o.tol.apply_file(load_config_file(o.config_path));
    Certificate cert = parse_certificate(slurp(o.cert_path));
    if (std::holds_alternative<std::string>(cert.image)) {
        const fs::path p = std::get<std::string>(cert.image);
        if (p.is_relative())
            cert.image = (fs::path(o.cert_path).parent_path() / p).string();
    }
    const MonitorVerdict v = check_certificate(cert, o.tol.tolerance(), o.tol.box_mode());
    std::cout << verdict_to_json(v, o.timing) << '\n';
    if (!v.accepted && v.reason == VerdictReason::PipelineError)
        std::cerr << "pipeline error: " << v.detail << '\n';
    return v.accepted ? 0 : 3;
}

int run_eval(EvalOpts& o) {
    if (!o.config_path.empty()) {
        const auto j = load_config_file(o.config_path);
        o.tol.apply_file(j);
        if (!o.o_miss->count() && j.contains("miss_rate")) o.em.miss_rate = j["miss_rate"];
        if (!o.o_fp->count() && j.contains("fp_rate")) o.em.fp_rate = j["fp_rate"];
        if (!o.o_conf->count() && j.contains("confusion_rate"))
            o.em.confusion_rate = j["confusion_rate"];
        if (!o.o_jitter->count() && j.contains("bbox_jitter")) o.em.bbox_jitter = j["bbox_jitter"];
        if (!o.o_iou->count() && j.contains("iou_threshold")) o.iou_threshold = j["iou_threshold"];
    }
    const DatasetManifest manifest = load_manifest(o.data_dir);
    const ExperimentReport report = run_experiment(manifest, o.data_dir, o.em, o.tol.tolerance(),
                                                   o.seed, o.iou_threshold);
    const std::string doc = report_to_json(report, o.timing);
    std::cout << doc << '\n';
    std::cerr << report_to_table(report);
    if (!o.out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(o.out_dir, ec);
        if (ec) throw IoError("cannot create " + o.out_dir + ": " + ec.message());
        std::ofstream rf(fs::path(o.out_dir) / "report.json", std::ios::binary);
        rf << doc << '\n';
        std::ofstream tf(fs::path(o.out_dir) / "table.txt", std::ios::binary);
        tf << report_to_table(report);
        if (!rf || !tf) throw IoError("failed writing reports to " + o.out_dir);
    }
    return 0;
}

int run_bench(BenchOpts& o) {
    if (!o.config_path.empty()) o.tol.apply_file(load_config_file(o.config_path));
    if (o.count < 1) throw ConfigError("count must be positive");
    const DatasetManifest manifest = load_manifest(o.data_dir);

    // Work items: every ground-truth box in manifest order, cycled to the
    // requested count, with a seeded off-sign patch mixed in every fifth
    // slot to exercise the reject path.
    std::vector<Certificate> certs;
    certs.reserve(static_cast<std::size_t>(o.count));
    std::vector<std::pair<const ManifestEntry*, const Truth*>> pool;
    for (const auto& e : manifest.entries)
        for (const auto& t : e.truths) pool.emplace_back(&e, &t);
    if (pool.empty()) throw ConfigError("dataset has no ground-truth signs");

    for (int i = 0; certs.size() < static_cast<std::size_t>(o.count); ++i) {
        const auto& [entry, truth] = pool[static_cast<std::size_t>(i) % pool.size()];
        Certificate c;
        c.image = (fs::path(o.data_dir) / entry->image).string();
        if (i % 5 == 4) {
            Rng rng(mix_seed(o.seed, static_cast<std::uint64_t>(i)));
            const double side = rng.uniform(0.1, 0.2);
            c.bbox = NormBox{rng.uniform(side, 1.0 - side), rng.uniform(side, 1.0 - side), side,
                             side};
            c.claimed_class = kAllClasses[rng.below(3)];
        } else {
            c.bbox = truth->bbox;
            c.claimed_class = truth->cls;
        }
        certs.push_back(std::move(c));
    }

    const auto verdicts = batch_check(certs, o.tol.tolerance(), o.tol.box_mode());
    std::vector<std::int64_t> lat;
    lat.reserve(verdicts.size());
    long long accepted = 0;
    for (const auto& v : verdicts) {
        lat.push_back(v.elapsed_us);
        if (v.accepted) ++accepted;
    }
    std::sort(lat.begin(), lat.end());
    const auto rank = [&lat](double q) {
        const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(lat.size())));
        return lat[std::max<std::size_t>(r, 1) - 1];
    };
    const double mean = static_cast<double>(std::accumulate(lat.begin(), lat.end(), 0LL)) /
                        static_cast<double>(lat.size());

    nlohmann::ordered_json j;
    j["count"] = verdicts.size();
    j["accepted"] = accepted;
    j["p50_us"] = rank(0.50);
    j["p95_us"] = rank(0.95);
    j["mean_us"] = mean;
    std::cout << j.dump() << '\n';
    return 0;
}

int run_render(const RenderOpts& o) {
    const auto cls = class_from_name(o.cls_name);
    if (!cls) throw ConfigError("unknown class: " + o.cls_name); // guarded by CLI validator
    const SignTemplate tpl = render_sign(*cls, o.side, o.seed);
    write_png(o.out_path, tpl.face);
    nlohmann::ordered_json j;
    j["class"] = o.cls_name;
    j["side"] = o.side;
    j["seed"] = o.seed;
    j["out"] = o.out_path;
    std::cout << j.dump() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"runtime monitor for shunting-sign detection certificates"};
    app.require_subcommand(1);

    GenOpts gen;
    auto* cmd_gen = app.add_subcommand("gen", "generate a synthetic labeled dataset");
    cmd_gen->add_option("--config", gen.config_path, "flat JSON config file");
    cmd_gen->add_option("--out", gen.out_dir, "output dataset directory")->required();
    gen.o_scenes = cmd_gen->add_option("--scenes", gen.cfg.scenes, "number of scenes");
    gen.o_seed = cmd_gen->add_option("--seed", gen.cfg.master_seed, "master seed");
    gen.o_background =
        cmd_gen->add_option("--background", gen.cfg.background, "procedural | PNG directory");
    gen.o_width = cmd_gen->add_option("--width", gen.cfg.scene_width, "scene width");
    gen.o_height = cmd_gen->add_option("--height", gen.cfg.scene_height, "scene height");
    gen.o_smin = cmd_gen->add_option("--side-min", gen.cfg.sign_side_min, "min pasted sign side");
    gen.o_smax = cmd_gen->add_option("--side-max", gen.cfg.sign_side_max, "max pasted sign side");
    gen.o_pert = cmd_gen
                     ->add_option("--perturbations", gen.cfg.perturbations,
                                  "perturbation families to draw from")
                     ->delimiter(',');

    CheckOpts check;
    auto* cmd_check = app.add_subcommand("check", "check one certificate");
    cmd_check->add_option("certificate", check.cert_path, "certificate JSON path")->required();
    cmd_check->add_option("--config", check.config_path, "flat JSON config file");
    cmd_check->add_flag("--timing", check.timing, "include elapsed_us in the verdict");
    check.tol.add_to(cmd_check);

    EvalOpts eval;
    auto* cmd_eval = app.add_subcommand("eval", "run the with/without-monitor experiment");
    cmd_eval->add_option("--config", eval.config_path, "flat JSON config file");
    cmd_eval->add_option("--data", eval.data_dir, "dataset directory (from gen)")->required();
    cmd_eval->add_option("--out", eval.out_dir, "directory for report.json + table.txt");
    cmd_eval->add_option("--seed", eval.seed, "simulation seed");
    eval.o_miss = cmd_eval->add_option("--miss-rate", eval.em.miss_rate, "P(miss) per truth");
    eval.o_fp = cmd_eval->add_option("--fp-rate", eval.em.fp_rate, "expected false boxes/scene");
    eval.o_conf =
        cmd_eval->add_option("--confusion-rate", eval.em.confusion_rate, "P(wrong class)");
    eval.o_jitter = cmd_eval->add_option("--bbox-jitter", eval.em.bbox_jitter, "bbox noise stddev");
    eval.o_iou = cmd_eval->add_option("--iou-threshold", eval.iou_threshold, "match threshold");
    cmd_eval->add_flag("--timing", eval.timing, "include latency_us in the report");
    eval.tol.add_to(cmd_eval);

    BenchOpts bench;
    auto* cmd_bench = app.add_subcommand("bench", "latency stats over a certificate batch");
    cmd_bench->add_option("--config", bench.config_path, "flat JSON config file");
    cmd_bench->add_option("--data", bench.data_dir, "dataset directory (from gen)")->required();
    cmd_bench->add_option("--count", bench.count, "batch size");
    cmd_bench->add_option("--seed", bench.seed, "mix-in seed for reject-path patches");
    bench.tol.add_to(cmd_bench);

    RenderOpts render;
    auto* cmd_render = app.add_subcommand("render", "emit one sign template PNG");
    cmd_render->add_option("class", render.cls_name, "Sh0 | Sh1 | Wn7")
        ->required()
        ->check(CLI::IsMember({"Sh0", "Sh1", "Wn7"}));
    cmd_render->add_option("--out", render.out_path, "output PNG path")->required();
    cmd_render->add_option("--side", render.side, "template side in pixels")
        ->check(CLI::Range(32, 4096));
    cmd_render->add_option("--seed", render.seed, "render seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*cmd_gen) return run_gen(gen);
        if (*cmd_check) return run_check(check);
        if (*cmd_eval) return run_eval(eval);
        if (*cmd_bench) return run_bench(bench);
        if (*cmd_render) return run_render(render);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1; // no subcommand — unreachable behind require_subcommand
}

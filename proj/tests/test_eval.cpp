#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "signmon/eval.hpp"
#include "signmon/rng.hpp"
#include "signmon/scenegen.hpp"

#include "json.hpp"
#include "oracles.hpp"

#include <cmath>
#include <filesystem>

using namespace signmon;
namespace fs = std::filesystem;

namespace {

Truth truth_at(double x, double y, double w, double h, SignClass cls = SignClass::Sh0) {
    return Truth{NormBox{x, y, w, h}, cls};
}

Detection det_at(double x, double y, double w, double h, SignClass cls = SignClass::Sh0) {
    Detection d;
    d.bbox = NormBox{x, y, w, h};
    d.cls = cls;
    return d;
}

} // namespace

TEST_CASE("iou arithmetic") {
    const NormBox unit{0.5, 0.5, 0.2, 0.2};
    CHECK(iou(unit, unit) == doctest::Approx(1.0));
    CHECK(iou(unit, NormBox{0.9, 0.9, 0.1, 0.1}) == 0.0);
    // half-shifted square: overlap 0.1x0.2, union 0.06
    CHECK(iou(unit, NormBox{0.6, 0.5, 0.2, 0.2}) == doctest::Approx(1.0 / 3.0));
    // corner mode golden
    CHECK(iou(NormBox{0.0, 0.0, 0.2, 0.2}, NormBox{0.1, 0.0, 0.2, 0.2}, BoxMode::Corner) ==
          doctest::Approx(1.0 / 3.0));
    // degenerate boxes do not divide by zero
    CHECK(iou(NormBox{0.5, 0.5, 0.0, 0.0}, NormBox{0.5, 0.5, 0.0, 0.0}) == 0.0);
}

TEST_CASE("error model validation") {
    CHECK_NOTHROW(validate_error_model(ErrorModel{}));
    ErrorModel em;
    em.miss_rate = -0.1;
    CHECK_THROWS_AS(validate_error_model(em), std::invalid_argument);
    em = ErrorModel{};
    em.miss_rate = 1.1;
    CHECK_THROWS_AS(validate_error_model(em), std::invalid_argument);
    em = ErrorModel{};
    em.fp_rate = -1.0;
    CHECK_THROWS_AS(validate_error_model(em), std::invalid_argument);
    em = ErrorModel{};
    em.bbox_jitter = -0.01;
    CHECK_THROWS_AS(validate_error_model(em), std::invalid_argument);
}

TEST_CASE("a perfect controller reproduces the truths verbatim") {
    std::vector<Truth> truths{truth_at(0.3, 0.4, 0.2, 0.2, SignClass::Sh1),
                              truth_at(0.7, 0.6, 0.15, 0.15, SignClass::Wn7)};
    ErrorModel em;
    em.miss_rate = 0.0;
    em.fp_rate = 0.0;
    em.confusion_rate = 0.0;
    em.bbox_jitter = 0.0;
    const auto dets = simulate_controller(truths, em, 11);
    REQUIRE(dets.size() == truths.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
        CHECK(dets[i].bbox.x == truths[i].bbox.x);
        CHECK(dets[i].bbox.y == truths[i].bbox.y);
        CHECK(dets[i].bbox.w == truths[i].bbox.w);
        CHECK(dets[i].bbox.h == truths[i].bbox.h);
        CHECK(dets[i].cls == truths[i].cls);
        CHECK(dets[i].source == DetectionSource::TruthSim);
    }
}

TEST_CASE("miss rate one drops every truth") {
    std::vector<Truth> truths{truth_at(0.3, 0.4, 0.2, 0.2)};
    ErrorModel em;
    em.miss_rate = 1.0;
    em.fp_rate = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        CHECK(simulate_controller(truths, em, seed).empty());
}

TEST_CASE("confusion flips the class and tags the source") {
    std::vector<Truth> truths{truth_at(0.3, 0.4, 0.2, 0.2, SignClass::Sh1)};
    ErrorModel em;
    em.miss_rate = 0.0;
    em.fp_rate = 0.0;
    em.confusion_rate = 1.0;
    em.bbox_jitter = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto dets = simulate_controller(truths, em, seed);
        REQUIRE(dets.size() == 1);
        CHECK(dets[0].cls != SignClass::Sh1);
        CHECK(dets[0].source == DetectionSource::ClassConfused);
    }
}

TEST_CASE("injected false positives follow the configured rate") {
    std::vector<Truth> truths{truth_at(0.3, 0.4, 0.2, 0.2)};
    ErrorModel em;
    em.miss_rate = 1.0; // isolate the injections
    em.fp_rate = 0.5;
    long long total = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        for (const auto& d : simulate_controller(truths, em, mix_seed(900, seed))) {
            CHECK(d.source == DetectionSource::InjectedFp);
            ++total;
        }
    }
    // Poisson sum: mean 500, sigma ~22.4
    CHECK(total > 500 - 3 * 23);
    CHECK(total < 500 + 3 * 23);
}

TEST_CASE("jitter stays within plausible bounds") {
    std::vector<Truth> truths{truth_at(0.5, 0.5, 0.2, 0.2)};
    ErrorModel em;
    em.miss_rate = 0.0;
    em.fp_rate = 0.0;
    em.confusion_rate = 0.0;
    em.bbox_jitter = 0.01;
    int moved = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto dets = simulate_controller(truths, em, seed);
        REQUIRE(dets.size() == 1);
        CHECK(std::abs(dets[0].bbox.x - 0.5) < 0.08); // far beyond 6 sigma would fail
        CHECK(dets[0].bbox.w >= 0.01);
        if (dets[0].bbox.x != 0.5) ++moved;
    }
    CHECK(moved > 40); // jitter actually does something
}

TEST_CASE("matching basics") {
    std::vector<Truth> truths{truth_at(0.3, 0.3, 0.2, 0.2, SignClass::Sh0),
                              truth_at(0.7, 0.7, 0.2, 0.2, SignClass::Sh1)};

    SUBCASE("exact detections all match") {
        std::vector<Detection> dets{det_at(0.3, 0.3, 0.2, 0.2, SignClass::Sh0),
                                    det_at(0.7, 0.7, 0.2, 0.2, SignClass::Sh1)};
        const auto m = match_detections(dets, truths);
        CHECK(m.tp == 2);
        CHECK(m.fp == 0);
        CHECK(m.fn == 0);
        CHECK(m.det_to_truth == std::vector<int>{0, 1});
    }
    SUBCASE("class must agree even with perfect overlap") {
        std::vector<Detection> dets{det_at(0.3, 0.3, 0.2, 0.2, SignClass::Wn7)};
        const auto m = match_detections(dets, truths);
        CHECK(m.tp == 0);
        CHECK(m.fp == 1);
        CHECK(m.fn == 2);
        CHECK(m.det_to_truth == std::vector<int>{-1});
    }
    SUBCASE("a truth can absorb only one detection") {
        std::vector<Detection> dets{det_at(0.3, 0.3, 0.2, 0.2, SignClass::Sh0),
                                    det_at(0.31, 0.3, 0.2, 0.2, SignClass::Sh0)};
        const auto m = match_detections(dets, truths);
        CHECK(m.tp == 1);
        CHECK(m.fp == 1);
        CHECK(m.fn == 1); // the Sh1 truth stays unmatched
    }
    SUBCASE("below-threshold overlap does not match") {
        std::vector<Detection> dets{det_at(0.42, 0.3, 0.2, 0.2, SignClass::Sh0)};
        // offset 0.12 of 0.2: IoU = 0.08/0.32 = 0.25
        const auto m = match_detections(dets, truths);
        CHECK(m.tp == 0);
        CHECK(m.fp == 1);
    }
    SUBCASE("threshold is validated") {
        CHECK_THROWS_AS(match_detections({}, truths, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(match_detections({}, truths, 1.5), std::invalid_argument);
    }
    SUBCASE("empty inputs") {
        const auto none = match_detections({}, truths);
        CHECK(none.tp == 0);
        CHECK(none.fn == 2);
        const auto no_truths = match_detections({det_at(0.3, 0.3, 0.2, 0.2)}, {});
        CHECK(no_truths.fp == 1);
        CHECK(no_truths.fn == 0);
    }
}

TEST_CASE("greedy matching is near-optimal and never better") {
    // Crafted divergence: detection A overlaps truths 1 and 2, detection B
    // only truth 1, and greedy burns truth 1 on A. One-to-one optimum is 2.
    std::vector<Truth> truths{truth_at(0.15, 0.05, 0.30, 0.10),
                              truth_at(0.25, 0.05, 0.30, 0.10)};
    std::vector<Detection> dets{det_at(0.17, 0.05, 0.30, 0.10),
                                det_at(0.12, 0.05, 0.24, 0.10)};
    const auto greedy = match_detections(dets, truths, 0.5);
    CHECK(greedy.tp == 1);
    CHECK(oracles::optimal_tp(dets, truths, 0.5) == 2);

    // and across random instances: greedy <= optimal, usually equal
    Rng rng(313);
    int equal = 0, total = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Truth> ts;
        std::vector<Detection> ds;
        const auto nt = 1 + rng.below(4);
        const auto nd = 1 + rng.below(4);
        for (std::uint64_t i = 0; i < nt; ++i)
            ts.push_back(truth_at(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8),
                                  rng.uniform(0.1, 0.3), rng.uniform(0.1, 0.3),
                                  kAllClasses[rng.below(3)]));
        for (std::uint64_t i = 0; i < nd; ++i) {
            if (rng.chance(0.7) && i < ts.size()) {
                const auto& t = ts[i];
                ds.push_back(det_at(t.bbox.x + rng.uniform(-0.05, 0.05),
                                    t.bbox.y + rng.uniform(-0.05, 0.05), t.bbox.w,
                                    t.bbox.h, rng.chance(0.9) ? t.cls
                                                              : kAllClasses[rng.below(3)]));
            } else {
                ds.push_back(det_at(rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8),
                                    rng.uniform(0.1, 0.3), rng.uniform(0.1, 0.3),
                                    kAllClasses[rng.below(3)]));
            }
        }
        const auto m = match_detections(ds, ts, 0.5);
        const long long best = oracles::optimal_tp(ds, ts, 0.5);
        CHECK(m.tp <= best);
        CHECK(m.tp + m.fp == static_cast<long long>(ds.size()));
        CHECK(m.tp + m.fn == static_cast<long long>(ts.size()));
        if (m.tp == best) ++equal;
        ++total;
    }
    CHECK(equal > total * 9 / 10); // divergence is the rare case
}

TEST_CASE("metric arithmetic and conventions") {
    const auto m = compute_metrics(25514, 30111 - 25514, 43638 - 25514);
    CHECK(m.detected == 30111);
    CHECK(m.precision == doctest::Approx(25514.0 / 30111.0));
    CHECK(m.recall == doctest::Approx(25514.0 / 43638.0));
    const auto r = rounded_view(m);
    CHECK(r.precision == doctest::Approx(0.85));
    CHECK(r.recall == doctest::Approx(0.58));
    CHECK(r.f1 == doctest::Approx(0.69));

    // zero detections: vacuous precision, zero recall
    const auto empty = compute_metrics(0, 0, 10);
    CHECK(empty.precision == 1.0);
    CHECK(empty.recall == 0.0);
    CHECK(empty.f1 == 0.0);

    // zero truths and zero detections: vacuously perfect
    const auto none = compute_metrics(0, 0, 0);
    CHECK(none.precision == 1.0);
    CHECK(none.recall == 1.0);
}

TEST_CASE("rounded presentation can differ from exact f1") {
    // near-perfect precision, recall just under half: exact f1 rounds to
    // 0.66 but the two-decimal presentation computes 0.67 from 1.00/0.50
    const auto m = compute_metrics(21714, 2, 43638 - 21714);
    const double exact_f1 = m.f1;
    CHECK(std::round(exact_f1 * 100.0) / 100.0 == doctest::Approx(0.66));
    const auto r = rounded_view(m);
    CHECK(r.precision == doctest::Approx(1.00));
    CHECK(r.recall == doctest::Approx(0.50));
    CHECK(r.f1 == doctest::Approx(0.67));
}

TEST_CASE("experiment over a small dataset filters, never invents") {
    const fs::path dir = fs::temp_directory_path() / "signmon-eval-exp";
    fs::remove_all(dir);
    GenerationConfig gen;
    gen.scenes = 6;
    gen.master_seed = 77;
    gen.scene_width = 320;
    gen.scene_height = 240;
    gen.sign_side_min = 64;
    gen.sign_side_max = 96;
    const auto manifest = generate_dataset(gen, dir.string());

    const ErrorModel em; // defaults
    const auto report = run_experiment(manifest, dir.string(), em, ToleranceConfig{}, 5);

    CHECK(report.without_monitor.tp + report.without_monitor.fp ==
          report.without_monitor.detected);
    CHECK(report.with_monitor.tp <= report.without_monitor.tp);
    CHECK(report.with_monitor.fp <= report.without_monitor.fp);
    CHECK(report.with_monitor.detected <= report.without_monitor.detected);
    CHECK(report.latency.p50_us > 0);
    CHECK(report.latency.p95_us >= report.latency.p50_us);

    // deterministic given (dataset, model, seed)
    const auto again = run_experiment(manifest, dir.string(), em, ToleranceConfig{}, 5);
    CHECK(report_to_json(again) == report_to_json(report));

    const auto j = nlohmann::json::parse(report_to_json(report));
    CHECK(j.contains("without"));
    CHECK(j.contains("with"));
    CHECK_FALSE(j.contains("latency_us"));
    CHECK(j["without"].contains("precision"));
    CHECK(j["with"]["tp"].is_number());
    const auto timed = nlohmann::json::parse(report_to_json(report, true));
    CHECK(timed.contains("latency_us"));

    const std::string table = report_to_table(report);
    CHECK(table.find("without") != std::string::npos);
    CHECK(table.find("with") != std::string::npos);
    fs::remove_all(dir);
}

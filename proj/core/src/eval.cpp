#include "signmon/eval.hpp"

#include "signmon/monitor.hpp"
#include "signmon/png_io.hpp"
#include "signmon/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace signmon {

ErrorModel validate_error_model(const ErrorModel& em) {
    if (!(em.miss_rate >= 0.0 && em.miss_rate <= 1.0))
        throw std::invalid_argument("miss_rate must be in [0,1]");
    if (!(em.confusion_rate >= 0.0 && em.confusion_rate <= 1.0))
        throw std::invalid_argument("confusion_rate must be in [0,1]");
    if (!(em.fp_rate >= 0.0)) throw std::invalid_argument("fp_rate must be nonnegative");
    if (!(em.bbox_jitter >= 0.0)) throw std::invalid_argument("bbox_jitter must be nonnegative");
    return em;
}

namespace {

struct Extent {
    double x0, y0, x1, y1;
};

Extent corners_of(const NormBox& b, BoxMode mode) {
    if (mode == BoxMode::Center)
        return {b.x - b.w / 2.0, b.y - b.h / 2.0, b.x + b.w / 2.0, b.y + b.h / 2.0};
    return {b.x, b.y, b.x + b.w, b.y + b.h};
}

SignClass other_class(SignClass cls, std::uint64_t pick) {
    std::array<SignClass, 2> others{};
    std::size_t n = 0;
    for (SignClass c : kAllClasses)
        if (c != cls) others[n++] = c;
    return others[pick % 2];
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

} // namespace

double iou(const NormBox& a, const NormBox& b, BoxMode mode) {
    const Extent ea = corners_of(a, mode);
    const Extent eb = corners_of(b, mode);
    const double ix = std::max(0.0, std::min(ea.x1, eb.x1) - std::max(ea.x0, eb.x0));
    const double iy = std::max(0.0, std::min(ea.y1, eb.y1) - std::max(ea.y0, eb.y0));
    const double inter = ix * iy;
    const double area_a = (ea.x1 - ea.x0) * (ea.y1 - ea.y0);
    const double area_b = (eb.x1 - eb.x0) * (eb.y1 - eb.y0);
    const double uni = area_a + area_b - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<Detection> simulate_controller(const std::vector<Truth>& truths,
                                           const ErrorModel& em, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Detection> dets;

    for (const Truth& t : truths) {
        if (rng.chance(em.miss_rate)) continue;
        Detection d;
        d.bbox.x = std::clamp(t.bbox.x + rng.normal() * em.bbox_jitter, 0.0, 1.0);
        d.bbox.y = std::clamp(t.bbox.y + rng.normal() * em.bbox_jitter, 0.0, 1.0);
        d.bbox.w = std::clamp(t.bbox.w + rng.normal() * em.bbox_jitter, 0.01, 1.0);
        d.bbox.h = std::clamp(t.bbox.h + rng.normal() * em.bbox_jitter, 0.01, 1.0);
        if (rng.chance(em.confusion_rate)) {
            d.cls = other_class(t.cls, rng.below(2));
            d.source = DetectionSource::ClassConfused;
        } else {
            d.cls = t.cls;
            d.source = DetectionSource::TruthSim;
        }
        dets.push_back(d);
    }

    const int injected = rng.poisson(em.fp_rate);
    for (int k = 0; k < injected; ++k) {
        Detection d;
        d.source = DetectionSource::InjectedFp;
        const bool fragment = !truths.empty() && rng.chance(0.5);
        if (fragment) {
            // an off-spec crop over a real sign, claimed as a wrong class —
            // the class-aware matcher can never score it
            const Truth& t = truths[rng.below(truths.size())];
            const double scale = rng.uniform(0.8, 1.2);
            d.bbox.x = std::clamp(t.bbox.x + rng.uniform(-0.15, 0.15) * t.bbox.w, 0.0, 1.0);
            d.bbox.y = std::clamp(t.bbox.y + rng.uniform(-0.15, 0.15) * t.bbox.h, 0.0, 1.0);
            d.bbox.w = std::clamp(t.bbox.w * scale, 0.01, 1.0);
            d.bbox.h = std::clamp(t.bbox.h * scale, 0.01, 1.0);
            d.cls = other_class(t.cls, rng.below(2));
        } else {
            // a sign-free patch; steer away from truths so it cannot match
            for (int attempt = 0; attempt < 20; ++attempt) {
                const double side = rng.uniform(0.08, 0.2);
                const double aspect = rng.uniform(0.9, 1.1);
                d.bbox.w = side * aspect;
                d.bbox.h = side / aspect;
                d.bbox.x = rng.uniform(d.bbox.w / 2.0, 1.0 - d.bbox.w / 2.0);
                d.bbox.y = rng.uniform(d.bbox.h / 2.0, 1.0 - d.bbox.h / 2.0);
                const auto overlaps = [&](const Truth& t) { return iou(d.bbox, t.bbox) > 0.25; };
                if (std::none_of(truths.begin(), truths.end(), overlaps)) break;
            }
            d.cls = kAllClasses[rng.below(3)];
        }
        dets.push_back(d);
    }
    return dets;
}

std::vector<Detection> simulate_controller(const Scene& scene, const ErrorModel& em,
                                           std::uint64_t seed) {
    return simulate_controller(scene.truths, em, seed);
}

MatchCounts match_detections(const std::vector<Detection>& dets,
                             const std::vector<Truth>& truths, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw std::invalid_argument("iou_threshold must be in (0,1]");

    struct Candidate {
        double score;
        std::size_t det, truth;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < dets.size(); ++i)
        for (std::size_t j = 0; j < truths.size(); ++j) {
            if (dets[i].cls != truths[j].cls) continue;
            const double score = iou(dets[i].bbox, truths[j].bbox);
            if (score >= iou_threshold) candidates.push_back({score, i, j});
        }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

    MatchCounts out;
    out.det_to_truth.assign(dets.size(), -1);
    std::vector<bool> truth_used(truths.size(), false);
    for (const Candidate& c : candidates) {
        if (out.det_to_truth[c.det] != -1 || truth_used[c.truth]) continue;
        out.det_to_truth[c.det] = static_cast<int>(c.truth);
        truth_used[c.truth] = true;
        ++out.tp;
    }
    out.fp = static_cast<long long>(dets.size()) - out.tp;
    out.fn = static_cast<long long>(truths.size()) - out.tp;
    return out;
}

MetricsReport compute_metrics(long long tp, long long fp, long long fn) {
    MetricsReport m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.detected = tp + fp;
    m.precision = m.detected > 0 ? static_cast<double>(tp) / static_cast<double>(m.detected) : 1.0;
    m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

RoundedMetrics rounded_view(const MetricsReport& m) {
    RoundedMetrics r;
    r.precision = round2(m.precision);
    r.recall = round2(m.recall);
    r.f1 = r.precision + r.recall > 0.0
               ? round2(2.0 * r.precision * r.recall / (r.precision + r.recall))
               : 0.0;
    return r;
}

ExperimentReport run_experiment(const DatasetManifest& manifest, const std::string& dataset_dir,
                                const ErrorModel& em, const ToleranceConfig& cfg,
                                std::uint64_t seed, double iou_threshold) {
    validate_error_model(em);
    validate_config(cfg);

    long long tp_raw = 0, fp_raw = 0, fn_raw = 0;
    long long tp_mon = 0, fp_mon = 0, fn_mon = 0;
    std::vector<std::int64_t> latencies;

    for (std::size_t idx = 0; idx < manifest.entries.size(); ++idx) {
        const ManifestEntry& entry = manifest.entries[idx];
        const Image frame =
            read_png((std::filesystem::path(dataset_dir) / entry.image).string());
        const std::vector<Detection> dets =
            simulate_controller(entry.truths, em, mix_seed(seed, idx));

        const MatchCounts raw = match_detections(dets, entry.truths, iou_threshold);
        tp_raw += raw.tp;
        fp_raw += raw.fp;
        fn_raw += raw.fn;

        std::vector<Detection> kept;
        for (const Detection& d : dets) {
            const MonitorVerdict v = check_image(frame, d.cls, d.bbox, cfg);
            latencies.push_back(v.elapsed_us);
            if (v.accepted) kept.push_back(d);
        }
        const MatchCounts mon = match_detections(kept, entry.truths, iou_threshold);
        tp_mon += mon.tp;
        fp_mon += mon.fp;
        fn_mon += mon.fn;
    }

    ExperimentReport report;
    report.without_monitor = compute_metrics(tp_raw, fp_raw, fn_raw);
    report.with_monitor = compute_metrics(tp_mon, fp_mon, fn_mon);
    if (!latencies.empty()) {
        std::sort(latencies.begin(), latencies.end());
        const auto rank = [&](double q) {
            const auto n = static_cast<double>(latencies.size());
            const auto r = static_cast<std::size_t>(std::ceil(q * n));
            return latencies[std::max<std::size_t>(r, 1) - 1];
        };
        report.latency.p50_us = rank(0.50);
        report.latency.p95_us = rank(0.95);
    }
    return report;
}

namespace {

nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
    nlohmann::ordered_json j;
    j["detected"] = m.detected;
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["fn"] = m.fn;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    return j;
}

} // namespace

std::string report_to_json(const ExperimentReport& report, bool include_timing) {
    nlohmann::ordered_json j;
    j["without"] = metrics_to_json(report.without_monitor);
    j["with"] = metrics_to_json(report.with_monitor);
    if (include_timing) {
        j["latency_us"]["p50"] = report.latency.p50_us;
        j["latency_us"]["p95"] = report.latency.p95_us;
    }
    return j.dump(2);
}

std::string report_to_table(const ExperimentReport& report) {
    std::string out = "            Detected        TP        FP  Precision    Recall        F1\n";
    const auto row = [&out](const char* label, const MetricsReport& m) {
        const RoundedMetrics r = rounded_view(m);
        char line[128];
        std::snprintf(line, sizeof(line), "%-8s %11lld %9lld %9lld %10.2f %9.2f %9.2f\n", label,
                      m.detected, m.tp, m.fp, r.precision, r.recall, r.f1);
        out += line;
    };
    row("without", report.without_monitor);
    row("with", report.with_monitor);
    return out;
}

} // namespace signmon

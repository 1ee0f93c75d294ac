#pragma once

#include "signmon/image.hpp"
#include "signmon/ontology.hpp"
#include "signmon/scenegen.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace signmon {

/// Where a simulated detection came from. Internal bookkeeping only — the
/// monitor never sees it.
enum class DetectionSource { TruthSim, InjectedFp, ClassConfused };

struct Detection {
    NormBox bbox; // center form, like certificates
    SignClass cls = SignClass::Sh0;
    DetectionSource source = DetectionSource::TruthSim;
};

/// Failure knobs of the simulated detector standing in for a trained one.
struct ErrorModel {
    double miss_rate = 0.25;      // P(truth produces no detection)
    double fp_rate = 0.35;        // expected injected false boxes per scene
    double confusion_rate = 0.03; // P(surviving truth gets a wrong class)
    double bbox_jitter = 0.008;   // normalized stddev on surviving boxes
};

ErrorModel validate_error_model(const ErrorModel& em); // throws std::invalid_argument

struct MetricsReport {
    long long detected = 0;
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 0.0;
};

/// Two-decimal presentation; f1 is recomputed from the rounded precision
/// and recall, the way the reference tables print it.
struct RoundedMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

double iou(const NormBox& a, const NormBox& b, BoxMode mode = BoxMode::Center);

std::vector<Detection> simulate_controller(const std::vector<Truth>& truths,
                                           const ErrorModel& em, std::uint64_t seed);
std::vector<Detection> simulate_controller(const Scene& scene, const ErrorModel& em,
                                           std::uint64_t seed);

struct MatchCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    std::vector<int> det_to_truth; // truth index per detection, -1 if unmatched
};

/// Greedy one-to-one matching in descending IoU order, class-aware,
/// threshold default 0.5.
MatchCounts match_detections(const std::vector<Detection>& dets,
                             const std::vector<Truth>& truths, double iou_threshold = 0.5);

MetricsReport compute_metrics(long long tp, long long fp, long long fn);
RoundedMetrics rounded_view(const MetricsReport& m);

struct LatencyStats {
    std::int64_t p50_us = 0;
    std::int64_t p95_us = 0;
};

struct ExperimentReport {
    MetricsReport without_monitor;
    MetricsReport with_monitor;
    LatencyStats latency;
};

/// The with/without-monitor experiment over a generated dataset on disk:
/// per scene, simulate the controller, score raw detections, then score the
/// subset whose certificates the monitor accepts.
ExperimentReport run_experiment(const DatasetManifest& manifest, const std::string& dataset_dir,
                                const ErrorModel& em, const ToleranceConfig& cfg,
                                std::uint64_t seed, double iou_threshold = 0.5);

/// {"without": {...}, "with": {...}} plus "latency_us" when include_timing
/// is set (timing is run-dependent, so it is opt-in).
std::string report_to_json(const ExperimentReport& report, bool include_timing = false);

/// Plain-text twin table, two-decimal values.
std::string report_to_table(const ExperimentReport& report);

} // namespace signmon

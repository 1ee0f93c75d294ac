#pragma once

#include "signmon/image.hpp"
#include "signmon/ontology.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace signmon {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BoundsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownClass : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inline PNG bytes, or a filesystem path to a PNG.
using ImageSource = std::variant<std::vector<std::uint8_t>, std::string>;

struct Certificate {
    ImageSource image;
    SignClass claimed_class = SignClass::Sh0;
    NormBox bbox;
};

enum class VerdictReason { Accepted, NoContourPair, ConditionFailure, PipelineError };

std::string reason_name(VerdictReason reason);

struct MonitorVerdict {
    bool accepted = false;
    VerdictReason reason = VerdictReason::PipelineError;
    std::vector<int> failing_conditions;        // near-miss indices, 1-based
    std::optional<ConditionReport> diagnostics; // witness or best near-miss
    std::string detail;                         // cause text for pipeline errors
    std::int64_t elapsed_us = 0;
};

/// Side length of the square working frame every crop is resized to.
constexpr int monitor_frame_side() { return 206; }

/// Accepts a JSON document {"image": <base64 PNG string | {"path": str}>,
/// "class": str, "bbox": [x,y,w,h]}. Never crashes on malformed bytes;
/// throws ParseError / SchemaError / BoundsError / UnknownClass instead.
Certificate parse_certificate(const std::string& doc);

/// Runs the check pipeline on an already-decoded frame: crop -> resize to
/// the working frame -> grayscale -> binarize -> contours -> membership.
/// elapsed_us covers exactly these stages.
MonitorVerdict check_image(const Image& frame, SignClass claimed, const NormBox& bbox,
                           const ToleranceConfig& cfg, BoxMode mode = BoxMode::Center);

/// check_image plus image decoding. Decode and pipeline failures come back
/// as pipeline-error verdicts, never exceptions.
MonitorVerdict check_certificate(const Certificate& cert, const ToleranceConfig& cfg,
                                 BoxMode mode = BoxMode::Center);

/// Element-wise check_certificate, output order = input order.
std::vector<MonitorVerdict> batch_check(const std::vector<Certificate>& certs,
                                        const ToleranceConfig& cfg,
                                        BoxMode mode = BoxMode::Center);

/// Wire form {"accepted":..., "reason":..., "failing_conditions":[...]};
/// "elapsed_us" is added only when include_timing is set so that default
/// output stays byte-stable across runs.
std::string verdict_to_json(const MonitorVerdict& v, bool include_timing = false);

std::string encode_base64(const std::uint8_t* data, std::size_t len);
std::string encode_base64(const std::vector<std::uint8_t>& data);
/// Strict RFC 4648 alphabet with padding; throws ParseError on anything else.
std::vector<std::uint8_t> decode_base64(const std::string& text);

} // namespace signmon

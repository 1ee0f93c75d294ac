#include "signmon/monitor.hpp"

#include "signmon/contour.hpp"
#include "signmon/png_io.hpp"

#include "json.hpp"

#include <array>
#include <chrono>

namespace signmon {

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::array<int, 256> build_b64_reverse() {
    std::array<int, 256> rev{};
    rev.fill(-1);
    for (int i = 0; i < 64; ++i)
        rev[static_cast<unsigned char>(kB64Alphabet[i])] = i;
    return rev;
}

} // namespace

std::string encode_base64(const std::uint8_t* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= len; i += 3) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out += kB64Alphabet[(v >> 18) & 0x3f];
        out += kB64Alphabet[(v >> 12) & 0x3f];
        out += kB64Alphabet[(v >> 6) & 0x3f];
        out += kB64Alphabet[v & 0x3f];
    }
    const std::size_t rest = len - i;
    if (rest == 1) {
        const unsigned v = data[i] << 16;
        out += kB64Alphabet[(v >> 18) & 0x3f];
        out += kB64Alphabet[(v >> 12) & 0x3f];
        out += "==";
    } else if (rest == 2) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8);
        out += kB64Alphabet[(v >> 18) & 0x3f];
        out += kB64Alphabet[(v >> 12) & 0x3f];
        out += kB64Alphabet[(v >> 6) & 0x3f];
        out += '=';
    }
    return out;
}

std::string encode_base64(const std::vector<std::uint8_t>& data) {
    return encode_base64(data.data(), data.size());
}

std::vector<std::uint8_t> decode_base64(const std::string& text) {
    static const std::array<int, 256> rev = build_b64_reverse();
    if (text.size() % 4 != 0) throw ParseError("base64 length not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char ch = text[i + k];
            if (ch == '=') {
                // padding is only legal in the last two slots of the last group
                if (i + 4 != text.size() || k < 2) throw ParseError("stray base64 padding");
                vals[k] = 0;
                ++pad;
            } else {
                if (pad > 0) throw ParseError("base64 data after padding");
                const int v = rev[static_cast<unsigned char>(ch)];
                if (v < 0) throw ParseError("invalid base64 character");
                vals[k] = v;
            }
        }
        const unsigned v = (static_cast<unsigned>(vals[0]) << 18) |
                           (static_cast<unsigned>(vals[1]) << 12) |
                           (static_cast<unsigned>(vals[2]) << 6) |
                           static_cast<unsigned>(vals[3]);
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v & 0xff));
    }
    return out;
}

std::string reason_name(VerdictReason reason) {
    switch (reason) {
    case VerdictReason::Accepted: return "accepted";
    case VerdictReason::NoContourPair: return "no-contour-pair";
    case VerdictReason::ConditionFailure: return "condition-failure";
    case VerdictReason::PipelineError: return "pipeline-error";
    }
    return "pipeline-error"; // unreachable
}

Certificate parse_certificate(const std::string& doc) {
    const nlohmann::json j = nlohmann::json::parse(doc, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ParseError("certificate is not valid JSON");
    if (!j.is_object()) throw SchemaError("certificate must be a JSON object");

    if (!j.contains("class")) throw SchemaError("missing field: class");
    if (!j["class"].is_string()) throw SchemaError("field class must be a string");
    const auto cls = class_from_name(j["class"].get<std::string>());
    if (!cls) throw UnknownClass("unknown class: " + j["class"].get<std::string>());

    if (!j.contains("bbox")) throw SchemaError("missing field: bbox");
    const auto& jb = j["bbox"];
    if (!jb.is_array() || jb.size() != 4) throw SchemaError("field bbox must be [x,y,w,h]");
    double comps[4];
    for (std::size_t k = 0; k < 4; ++k) {
        if (!jb[k].is_number()) throw SchemaError("field bbox must be [x,y,w,h]");
        comps[k] = jb[k].get<double>();
    }
    for (double v : comps)
        if (!(v >= 0.0 && v <= 1.0)) throw BoundsError("bbox component outside [0,1]");
    if (!(comps[2] * comps[3] > 0.0)) throw BoundsError("bbox has zero area");

    if (!j.contains("image")) throw SchemaError("missing field: image");
    const auto& ji = j["image"];
    Certificate cert;
    if (ji.is_string()) {
        cert.image = decode_base64(ji.get<std::string>());
    } else if (ji.is_object() && ji.contains("path") && ji["path"].is_string()) {
        cert.image = ji["path"].get<std::string>();
    } else {
        throw SchemaError("field image must be a base64 string or {\"path\": string}");
    }
    cert.claimed_class = *cls;
    cert.bbox = NormBox{comps[0], comps[1], comps[2], comps[3]};
    return cert;
}

MonitorVerdict check_image(const Image& frame, SignClass claimed, const NormBox& bbox,
                           const ToleranceConfig& cfg, BoxMode mode) {
    MonitorVerdict out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Image crop = crop_normalized(frame, bbox, mode);
        const Image sized = resize_bilinear(crop, monitor_frame_side(), monitor_frame_side());
        const Image gray = to_grayscale(sized);
        const auto [threshold, binary] = binarize_otsu(gray);
        (void)threshold;
        const std::vector<Contour> contours = detect_contours(binary);
        const Verdict verdict =
            check_membership(contours, claimed, cfg, binary.width, binary.height);
        if (verdict.accepted) {
            out.accepted = true;
            out.reason = VerdictReason::Accepted;
            out.diagnostics = verdict.witness->report;
        } else if (verdict.best_near_miss) {
            out.reason = VerdictReason::ConditionFailure;
            out.diagnostics = verdict.best_near_miss->report;
            out.failing_conditions = verdict.best_near_miss->report.failing_conditions();
        } else {
            out.reason = VerdictReason::NoContourPair;
        }
    } catch (const std::exception& e) {
        out = MonitorVerdict{};
        out.reason = VerdictReason::PipelineError;
        out.detail = e.what();
    }
    const auto t1 = std::chrono::steady_clock::now();
    out.elapsed_us = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
    return out;
}

MonitorVerdict check_certificate(const Certificate& cert, const ToleranceConfig& cfg,
                                 BoxMode mode) {
    Image frame;
    try {
        if (std::holds_alternative<std::vector<std::uint8_t>>(cert.image))
            frame = decode_png(std::get<std::vector<std::uint8_t>>(cert.image));
        else
            frame = read_png(std::get<std::string>(cert.image));
    } catch (const std::exception& e) {
        MonitorVerdict out;
        out.reason = VerdictReason::PipelineError;
        out.detail = e.what();
        return out;
    }
    return check_image(frame, cert.claimed_class, cert.bbox, cfg, mode);
}

std::vector<MonitorVerdict> batch_check(const std::vector<Certificate>& certs,
                                        const ToleranceConfig& cfg, BoxMode mode) {
    std::vector<MonitorVerdict> out;
    out.reserve(certs.size());
    for (const Certificate& cert : certs) out.push_back(check_certificate(cert, cfg, mode));
    return out;
}

std::string verdict_to_json(const MonitorVerdict& v, bool include_timing) {
    nlohmann::ordered_json j;
    j["accepted"] = v.accepted;
    j["reason"] = reason_name(v.reason);
    j["failing_conditions"] = v.failing_conditions;
    if (include_timing) j["elapsed_us"] = v.elapsed_us;
    return j.dump();
}

} // namespace signmon

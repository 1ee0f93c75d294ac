#include "signmon/ontology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace signmon {

double expected_angle_deg(SignClass cls) {
    switch (cls) {
    case SignClass::Sh0: return 0.0;
    case SignClass::Sh1: return 45.0;
    case SignClass::Wn7: return 90.0;
    }
    return 0.0; // unreachable
}

std::string class_name(SignClass cls) {
    switch (cls) {
    case SignClass::Sh0: return "Sh0";
    case SignClass::Sh1: return "Sh1";
    case SignClass::Wn7: return "Wn7";
    }
    return "Sh0"; // unreachable
}

std::optional<SignClass> class_from_name(const std::string& name) {
    if (name == "Sh0") return SignClass::Sh0;
    if (name == "Sh1") return SignClass::Sh1;
    if (name == "Wn7") return SignClass::Wn7;
    return std::nullopt;
}

ToleranceConfig validate_config(const ToleranceConfig& cfg) {
    std::string problems;
    auto complain = [&problems](const std::string& msg) {
        if (!problems.empty()) problems += "; ";
        problems += msg;
    };
    if (!(cfg.delta1 >= 0.0)) complain("delta1 must be nonnegative");
    if (!(cfg.delta2 >= 0.0)) complain("delta2 must be nonnegative");
    if (!(cfg.delta3 >= 0.0)) complain("delta3 must be nonnegative");
    if (!(cfg.delta4 >= 0.0)) complain("delta4 must be nonnegative");
    if (!(cfg.delta5 >= 0.0)) complain("delta5 must be nonnegative");
    if (!(cfg.delta3 < cfg.delta4)) complain("delta3 must be less than delta4");
    if (!(cfg.delta5 <= 1.0)) complain("delta5 must not exceed 1");
    if (!(cfg.angle_floor_deg >= 0.0)) complain("angle_floor_deg must be nonnegative");
    if (!problems.empty()) throw ConfigError("invalid tolerance config: " + problems);
    return cfg;
}

bool ConditionReport::all_passed() const {
    return std::all_of(passed.begin(), passed.end(), [](bool b) { return b; });
}

int ConditionReport::passed_count() const {
    return static_cast<int>(std::count(passed.begin(), passed.end(), true));
}

std::vector<int> ConditionReport::failing_conditions() const {
    std::vector<int> out;
    for (int i = 0; i < 6; ++i)
        if (!passed[static_cast<std::size_t>(i)]) out.push_back(i + 1);
    return out;
}

namespace {

bool area_in_bounds_low(double area, const ToleranceConfig& cfg, int w, int h) {
    if (cfg.area_mode == AreaMode::Literal)
        return area >= cfg.delta3 * h && area >= cfg.delta3 * w;
    return area >= cfg.delta3 * w * h;
}

bool area_in_bounds_high(double area, const ToleranceConfig& cfg, int w, int h) {
    if (cfg.area_mode == AreaMode::Literal)
        return area <= cfg.delta4 * h && area <= cfg.delta4 * w;
    return area <= cfg.delta4 * w * h;
}

bool orientations_similar(double s1, double s2, const ToleranceConfig& cfg) {
    if (cfg.angle_mode == AngleMode::PaperLiteral)
        return (1.0 - cfg.delta2) * s1 <= s2 && s2 <= (1.0 + cfg.delta2) * s1;
    return std::abs(s1 - s2) <= std::max(cfg.delta2 * s1, cfg.angle_floor_deg);
}

} // namespace

ConditionReport evaluate_measurements(double area1, double area2, double orient1,
                                      double orient2, bool disjoint, SignClass cls,
                                      const ToleranceConfig& cfg, int w, int h) {
    ConditionReport rep;
    rep.area1 = area1;
    rep.area2 = area2;
    rep.orientation1 = orient1;
    rep.orientation2 = orient2;

    const double a = expected_angle_deg(cls);
    const double band = 90.0 * cfg.delta5;

    rep.passed[0] = area1 * (1.0 - cfg.delta1) <= area2 && area2 <= (1.0 + cfg.delta1) * area1;
    rep.passed[1] = orientations_similar(orient1, orient2, cfg);
    rep.passed[2] = area_in_bounds_low(area1, cfg, w, h) && area_in_bounds_low(area2, cfg, w, h);
    rep.passed[3] = area_in_bounds_high(area1, cfg, w, h) && area_in_bounds_high(area2, cfg, w, h);
    rep.passed[4] = disjoint;
    rep.passed[5] = std::abs(orient1 - a) <= band && std::abs(orient2 - a) <= band;
    return rep;
}

ConditionReport evaluate_pair(const Contour& c1, const Contour& c2, SignClass cls,
                              const ToleranceConfig& cfg, int w, int h) {
    const double a1 = contour_area(c1);
    const double a2 = contour_area(c2);
    const double s1 = orientation_deg(c1);
    const double s2 = orientation_deg(c2);
    const bool disjoint = regions_disjoint(c1, c2, w, h);
    return evaluate_measurements(a1, a2, s1, s2, disjoint, cls, cfg, w, h);
}

Verdict check_membership(const std::vector<Contour>& contours, SignClass cls,
                         const ToleranceConfig& cfg, int w, int h) {
    Verdict verdict;

    // Keep only contours long enough to carry a principal axis, remembering
    // their positions in the incoming list for witness reporting.
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < contours.size(); ++i)
        if (distinct_point_count(contours[i]) >= min_contour_points()) kept.push_back(i);

    const std::size_t n = kept.size();
    if (n < 2) return verdict;

    // Measurements are reused across every pair the contour appears in.
    std::vector<double> areas(n), orients(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Contour& c = contours[kept[k]];
        areas[k] = contour_area(c);
        orients[k] = orientation_deg(c);
    }

    // Disjointness is by far the most expensive condition, so fill masks are
    // memoized and the check runs only when the outcome can matter: either
    // the other five conditions hold (possible acceptance) or the pair could
    // displace the current near-miss leader.
    std::vector<BinaryImage> masks(n);
    auto mask_of = [&](std::size_t k) -> const BinaryImage& {
        if (masks[k].bits.empty()) masks[k] = fill_contour(contours[kept[k]], w, h);
        return masks[k];
    };
    auto disjoint = [&](std::size_t i, std::size_t j) {
        const auto& m1 = mask_of(i).bits;
        const auto& m2 = mask_of(j).bits;
        for (std::size_t p = 0; p < m1.size(); ++p)
            if (m1[p] && m2[p]) return false;
        return true;
    };

    int best_count = -1;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            ConditionReport rep = evaluate_measurements(areas[i], areas[j], orients[i],
                                                        orients[j], /*disjoint=*/false,
                                                        cls, cfg, w, h);
            int others = rep.passed_count(); // condition 5 still counted false
            if (others == 5 || others + 1 > best_count) {
                rep.passed[4] = disjoint(i, j);
                if (rep.all_passed()) {
                    verdict.accepted = true;
                    verdict.witness = PairWitness{kept[i], kept[j], rep};
                    return verdict;
                }
            }
            if (rep.passed_count() > best_count) {
                best_count = rep.passed_count();
                verdict.best_near_miss = PairWitness{kept[i], kept[j], rep};
            }
        }
    }
    return verdict;
}

} // namespace signmon

#pragma once

#include "signmon/contour.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace signmon {

/// The three shunting-sign classes under verification. Each is a pair of
/// semicircles whose split diameter sits at the expected angle.
enum class SignClass { Sh0, Sh1, Wn7 };

constexpr std::array<SignClass, 3> kAllClasses{SignClass::Sh0, SignClass::Sh1, SignClass::Wn7};

double expected_angle_deg(SignClass cls);
std::string class_name(SignClass cls);
std::optional<SignClass> class_from_name(const std::string& name);

/// How conditions 3-4 read the area bounds: against the bare side lengths
/// (Literal) or against the frame area (AreaFraction, the default — see
/// ToleranceConfig notes).
enum class AreaMode { Literal, AreaFraction };

/// How condition 2 compares orientations. PaperLiteral keeps the pure
/// multiplicative band, which collapses to exact equality at 0 degrees;
/// Robust adds an additive floor so near-horizontal pairs stay checkable.
enum class AngleMode { PaperLiteral, Robust };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ToleranceConfig {
    double delta1 = 0.2; // pair area similarity
    double delta2 = 0.2; // pair orientation similarity
    double delta3 = 0.1; // area lower bound factor
    double delta4 = 0.3; // area upper bound factor
    double delta5 = 0.2; // expected-angle tolerance, as a fraction of 90
    AreaMode area_mode = AreaMode::AreaFraction;
    AngleMode angle_mode = AngleMode::Robust;
    double angle_floor_deg = 5.0;

    bool operator==(const ToleranceConfig&) const = default;
};

/// Returns cfg unchanged if all invariants hold; throws ConfigError naming
/// every violated one.
ToleranceConfig validate_config(const ToleranceConfig& cfg);

/// Outcome of one contour pair against the six class conditions.
struct ConditionReport {
    std::array<bool, 6> passed{}; // conditions 1..6
    double area1 = 0.0;
    double area2 = 0.0;
    double orientation1 = 0.0;
    double orientation2 = 0.0;

    bool all_passed() const;
    int passed_count() const;
    /// 1-based indices of failing conditions.
    std::vector<int> failing_conditions() const;
};

struct PairWitness {
    std::size_t index1 = 0; // positions in the scanned contour list
    std::size_t index2 = 0;
    ConditionReport report;
};

struct Verdict {
    bool accepted = false;
    std::optional<PairWitness> witness;        // present iff accepted
    std::optional<PairWitness> best_near_miss; // highest passed-count loser
};

/// Pure arithmetic of conditions 1-4 and 6 on already-measured values;
/// condition 5 (disjointness) is supplied by the caller. Factored out so the
/// inequality layer is testable on exact numbers.
ConditionReport evaluate_measurements(double area1, double area2, double orient1,
                                      double orient2, bool disjoint, SignClass cls,
                                      const ToleranceConfig& cfg, int w, int h);

/// Measures both contours in the w x h frame and evaluates all six
/// conditions. Propagates DegenerateContour from the orientation fit.
ConditionReport evaluate_pair(const Contour& c1, const Contour& c2, SignClass cls,
                              const ToleranceConfig& cfg, int w, int h);

/// Scans all ordered pairs of distinct contours (raster-scan order, after
/// dropping contours with fewer than min_contour_points() distinct points)
/// and accepts on the first pair passing all six conditions. A rejection
/// carries the near-miss report with the most conditions passed.
Verdict check_membership(const std::vector<Contour>& contours, SignClass cls,
                         const ToleranceConfig& cfg, int w, int h);

/// Contours with fewer distinct points than this have no meaningful
/// principal axis and are dropped before pairing.
constexpr std::size_t min_contour_points() { return 5; }

} // namespace signmon

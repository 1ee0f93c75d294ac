#pragma once

#include "signmon/image.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace signmon {

struct PointI {
    int x = 0;
    int y = 0;
    bool operator==(const PointI&) const = default;
};

enum class ContourKind { OuterBorder, HoleBorder };

/// Closed pixel traversal of one region border; consecutive points are
/// 8-neighbors and every point lies inside the source frame.
struct Contour {
    std::vector<PointI> points;
    ContourKind kind = ContourKind::OuterBorder;
};

struct FittedLine {
    double cx = 0.0; // centroid
    double cy = 0.0;
    double dx = 1.0; // unit direction
    double dy = 0.0;
};

struct DegenerateContour : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// All outer and hole borders of the 8-connected foreground regions, by
/// border following, in deterministic raster-scan order.
std::vector<Contour> detect_contours(const BinaryImage& bin);

/// Absolute shoelace area of the point polygon, in square pixels.
double contour_area(const Contour& c);

/// Principal axis of the point cloud (total least squares). Throws
/// DegenerateContour when all points coincide.
FittedLine fit_line(const Contour& c);

/// Acute angle between the fitted line and the horizontal axis, in [0, 90].
double orientation_deg(const Contour& c);

/// Number of distinct points; contours below the ontology's minimum are
/// filtered before pair evaluation.
std::size_t distinct_point_count(const Contour& c);

/// Rasterized filled region of the contour in a w x h frame: even-odd
/// scanline interior plus the border pixels themselves.
BinaryImage fill_contour(const Contour& c, int w, int h);

/// True iff the filled regions of the two contours share no pixel.
bool regions_disjoint(const Contour& c1, const Contour& c2, int w, int h);

} // namespace signmon

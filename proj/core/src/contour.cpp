#include "signmon/contour.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace signmon {

namespace {

// 8-neighborhood, index increasing counterclockwise from east:
// 0=E 1=NE 2=N 3=NW 4=W 5=SW 6=S 7=SE (row axis points down).
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

int direction_from(const PointI& from, const PointI& to) {
    int dx = to.x - from.x, dy = to.y - from.y;
    for (int d = 0; d < 8; ++d)
        if (kDx[d] == dx && kDy[d] == dy) return d;
    return -1;
}

} // namespace

std::vector<Contour> detect_contours(const BinaryImage& bin) {
    // Border following over an int copy padded with one background row and
    // column on each side. nbd marking follows the usual scheme: visited
    // border pixels whose east neighbor was seen as background go negative,
    // which stops the raster scan from starting the same border twice.
    const int w = bin.width, h = bin.height;
    const int pw = w + 2, ph = h + 2;
    std::vector<int> f(static_cast<std::size_t>(pw) * ph, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            f[static_cast<std::size_t>(y + 1) * pw + (x + 1)] = bin.at(x, y) ? 1 : 0;

    auto px = [&](int x, int y) -> int& { return f[static_cast<std::size_t>(y) * pw + x]; };

    std::vector<Contour> contours;
    int nbd = 1;

    for (int y = 1; y <= h; ++y) {
        for (int x = 1; x <= w; ++x) {
            bool outer = px(x, y) == 1 && px(x - 1, y) == 0;
            bool hole = px(x, y) >= 1 && px(x + 1, y) == 0;
            if (!outer && !hole) continue;
            ++nbd;

            Contour contour;
            contour.kind = outer ? ContourKind::OuterBorder : ContourKind::HoleBorder;

            const PointI start{x, y};
            const PointI from{outer ? x - 1 : x + 1, y};

            // Clockwise sweep from the starting background neighbor for the
            // first nonzero neighbor.
            int d0 = direction_from(start, from);
            int first = -1;
            for (int k = 1; k <= 8; ++k) {
                int d = (d0 - k + 16) % 8;
                if (px(start.x + kDx[d], start.y + kDy[d]) != 0) {
                    first = d;
                    break;
                }
            }
            if (first < 0) {
                // Isolated pixel.
                px(x, y) = -nbd;
                contour.points.push_back({x - 1, y - 1});
                contours.push_back(std::move(contour));
                continue;
            }

            PointI p1{start.x + kDx[first], start.y + kDy[first]};
            PointI p2 = p1;    // previously found neighbor
            PointI p3 = start; // current border pixel
            while (true) {
                // Counterclockwise sweep around p3, starting just past p2.
                int back = direction_from(p3, p2);
                int next = -1;
                bool east_seen_zero = false;
                for (int k = 1; k <= 8; ++k) {
                    int d = (back + k) % 8;
                    if (px(p3.x + kDx[d], p3.y + kDy[d]) != 0) {
                        next = d;
                        break;
                    }
                    if (d == 0) east_seen_zero = true;
                }
                PointI p4{p3.x + kDx[next], p3.y + kDy[next]};

                if (east_seen_zero)
                    px(p3.x, p3.y) = -nbd;
                else if (px(p3.x, p3.y) == 1)
                    px(p3.x, p3.y) = nbd;
                contour.points.push_back({p3.x - 1, p3.y - 1});

                if (p4 == start && p3 == p1) break;
                p2 = p3;
                p3 = p4;
            }
            contours.push_back(std::move(contour));
        }
    }
    return contours;
}

double contour_area(const Contour& c) {
    const auto& pts = c.points;
    const std::size_t n = pts.size();
    if (n < 3) return 0.0;
    long long twice = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const PointI& a = pts[i];
        const PointI& b = pts[(i + 1) % n];
        twice += static_cast<long long>(a.x) * b.y - static_cast<long long>(b.x) * a.y;
    }
    return std::abs(static_cast<double>(twice)) / 2.0;
}

FittedLine fit_line(const Contour& c) {
    const auto& pts = c.points;
    if (pts.empty()) throw DegenerateContour("fit_line: empty contour");

    double mx = 0.0, my = 0.0;
    for (const auto& p : pts) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : pts) {
        double dx = p.x - mx, dy = p.y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }

    if (sxx == 0.0 && syy == 0.0)
        throw DegenerateContour("fit_line: all points coincide");

    // Major axis of the scatter matrix; theta in (-90, 90].
    double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    FittedLine line;
    line.cx = mx;
    line.cy = my;
    line.dx = std::cos(theta);
    line.dy = std::sin(theta);
    return line;
}

double orientation_deg(const Contour& c) {
    FittedLine line = fit_line(c);
    double cosang = std::clamp(std::abs(line.dx), 0.0, 1.0);
    return std::acos(cosang) * 180.0 / M_PI;
}

std::size_t distinct_point_count(const Contour& c) {
    std::set<std::pair<int, int>> uniq;
    for (const auto& p : c.points) uniq.insert({p.x, p.y});
    return uniq.size();
}

BinaryImage fill_contour(const Contour& c, int w, int h) {
    BinaryImage mask(w, h);
    const auto& pts = c.points;
    if (pts.empty()) return mask;

    // Even-odd scanline fill over the closed polygon through the border
    // pixels, then the border pixels themselves.
    const std::size_t n = pts.size();
    std::vector<double> crossings;
    for (int y = 0; y < h; ++y) {
        crossings.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const PointI& a = pts[i];
            const PointI& b = pts[(i + 1) % n];
            if (a.y == b.y) continue;
            // Half-open span so shared vertices count once.
            if ((a.y <= y && y < b.y) || (b.y <= y && y < a.y)) {
                double t = static_cast<double>(y - a.y) / (b.y - a.y);
                crossings.push_back(a.x + t * (b.x - a.x));
            }
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
            int x0 = static_cast<int>(std::ceil(crossings[i] - 1e-9));
            int x1 = static_cast<int>(std::floor(crossings[i + 1] + 1e-9));
            x0 = std::max(x0, 0);
            x1 = std::min(x1, w - 1);
            for (int x = x0; x <= x1; ++x) mask.at(x, y) = 1;
        }
    }
    for (const auto& p : pts)
        if (p.x >= 0 && p.x < w && p.y >= 0 && p.y < h) mask.at(p.x, p.y) = 1;
    return mask;
}

bool regions_disjoint(const Contour& c1, const Contour& c2, int w, int h) {
    BinaryImage m1 = fill_contour(c1, w, h);
    BinaryImage m2 = fill_contour(c2, w, h);
    for (std::size_t i = 0; i < m1.bits.size(); ++i)
        if (m1.bits[i] && m2.bits[i]) return false;
    return true;
}

} // namespace signmon

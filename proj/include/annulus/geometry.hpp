#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <vector>

#include "annulus/core.hpp"

namespace annulus {

template <typename Scalar>
using Vertices = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

enum class CurveKind { Jordan, Line, CrossingArc, HalfLine };

/// Oriented polyline in the strip (cover coordinates) or annulus.
struct PolyCurve {
    Vertices<double> vertices;
    CurveKind kind = CurveKind::CrossingArc;
    bool essential = false;

    Eigen::Index size() const { return vertices.cols(); }
    StripPoint vertex(Eigen::Index i) const { return vertices.col(i); }
    StripPoint front() const { return vertices.col(0); }
    StripPoint back() const { return vertices.col(vertices.cols() - 1); }
};

PolyCurve make_curve(const std::vector<StripPoint>& pts, CurveKind kind);
std::vector<StripPoint> curve_points(const PolyCurve& c);
PolyCurve translated(const PolyCurve& c, double dtheta);
PolyCurve reversed(const PolyCurve& c);
/// Applies a point map to every vertex (no refinement).
PolyCurve mapped(const PolyCurve& c, const PointMap& f);
double curve_length(const PolyCurve& c);

/// Signed area enclosed by a closed polygon (counterclockwise positive).
template <typename Derived>
typename Derived::Scalar shoelace_area(const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    Scalar acc(0);
    const Eigen::Index n = v.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = (i + 1) % n;
        acc += v(0, i) * v(1, j) - v(0, j) * v(1, i);
    }
    return acc / Scalar(2);
}

/// Winding number of a closed polygon around p (crossing rule).
template <typename Derived>
int winding_number(const Eigen::Matrix<typename Derived::Scalar, 2, 1>& p, const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    auto is_left = [&](Eigen::Index a, Eigen::Index b) {
        return (v(0, b) - v(0, a)) * (p.y() - v(1, a)) - (p.x() - v(0, a)) * (v(1, b) - v(1, a));
    };
    int wn = 0;
    const Eigen::Index n = v.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = (i + 1) % n;
        if (v(1, i) <= p.y()) {
            if (v(1, j) > p.y() && is_left(i, j) > Scalar(0)) ++wn;
        } else if (v(1, j) <= p.y() && is_left(i, j) < Scalar(0)) {
            --wn;
        }
    }
    return wn;
}

template <typename Scalar>
Scalar point_segment_distance(const Eigen::Matrix<Scalar, 2, 1>& p, const Eigen::Matrix<Scalar, 2, 1>& a,
                              const Eigen::Matrix<Scalar, 2, 1>& b) {
    const Eigen::Matrix<Scalar, 2, 1> ab = b - a;
    const Scalar len2 = ab.squaredNorm();
    Scalar t = len2 > Scalar(0) ? (p - a).dot(ab) / len2 : Scalar(0);
    t = std::clamp(t, Scalar(0), Scalar(1));
    return (p - (a + t * ab)).norm();
}

/// Closed-segment intersection test; collinear overlaps count.
bool segments_intersect(const StripPoint& a, const StripPoint& b, const StripPoint& c, const StripPoint& d);

/// Intersection parameters (s on ab, t on cd) of two non-parallel segments, or
/// the first overlap point for collinear ones. Returns false when disjoint.
bool segment_intersection(const StripPoint& a, const StripPoint& b, const StripPoint& c, const StripPoint& d,
                          double& s, double& t);

double segment_distance(const StripPoint& a, const StripPoint& b, const StripPoint& c, const StripPoint& d);

/// Bucketed segment set for nearest-distance queries against polylines.
class SegmentIndex {
public:
    explicit SegmentIndex(double cell = 0.05) : cell_(cell) {}
    void add_polyline(const std::vector<StripPoint>& pts, bool closed = false);
    void add_segment(const StripPoint& a, const StripPoint& b);
    /// Distance from p to the nearest segment, searching at most `radius`
    /// away; returns +inf when nothing is that close.
    double distance(const StripPoint& p, double radius) const;
    /// True when some segment meets the closed segment ab.
    bool intersects(const StripPoint& a, const StripPoint& b) const;
    std::size_t segment_count() const { return segs_.size(); }

private:
    std::vector<long long> keys_for(const StripPoint& a, const StripPoint& b, double pad) const;
    long long key(long ix, long iy) const { return (static_cast<long long>(ix) << 32) ^ (iy & 0xffffffffLL); }
    double cell_;
    std::vector<std::pair<StripPoint, StripPoint>> segs_;
    std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

/// Points along the polyline with spacing at most `spacing` (vertices kept).
std::vector<StripPoint> densify(const std::vector<StripPoint>& pts, double spacing, bool closed = false);

/// Simple-curve check (non-adjacent segments disjoint; for closed curves the
/// wrap segment is adjacent to both ends).
bool is_simple(const std::vector<StripPoint>& pts, bool closed);

/// Parity of crossings of the vertical ray from p upward with an essential
/// loop given over one period in cover coordinates (translates included).
/// Odd means p lies below the loop.
bool below_essential_loop(const StripPoint& p, const std::vector<StripPoint>& loop);

/// Side of a crossing arc (oriented bottom to top): +1 when p is in the
/// domain on the right of the arc, -1 on the left, 0 on the arc.
int side_of_crossing_arc(const StripPoint& p, const std::vector<StripPoint>& arc);

}  // namespace annulus

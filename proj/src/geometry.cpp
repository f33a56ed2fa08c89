#include "annulus/geometry.hpp"

#include <unordered_set>

namespace annulus {

PolyCurve make_curve(const std::vector<StripPoint>& pts, CurveKind kind) {
    PolyCurve c;
    c.kind = kind;
    c.vertices.resize(2, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) c.vertices.col(static_cast<Eigen::Index>(i)) = pts[i];
    return c;
}

std::vector<StripPoint> curve_points(const PolyCurve& c) {
    std::vector<StripPoint> out(static_cast<std::size_t>(c.size()));
    for (Eigen::Index i = 0; i < c.size(); ++i) out[static_cast<std::size_t>(i)] = c.vertex(i);
    return out;
}

PolyCurve translated(const PolyCurve& c, double dtheta) {
    PolyCurve out = c;
    out.vertices.row(0).array() += dtheta;
    return out;
}

PolyCurve reversed(const PolyCurve& c) {
    PolyCurve out = c;
    out.vertices = c.vertices.rowwise().reverse();
    return out;
}

PolyCurve mapped(const PolyCurve& c, const PointMap& f) {
    PolyCurve out = c;
    for (Eigen::Index i = 0; i < c.size(); ++i) out.vertices.col(i) = f(c.vertex(i));
    return out;
}

double curve_length(const PolyCurve& c) {
    double len = 0.0;
    for (Eigen::Index i = 0; i + 1 < c.size(); ++i) len += (c.vertex(i + 1) - c.vertex(i)).norm();
    return len;
}

namespace {

double cross(const StripPoint& a, const StripPoint& b) { return a.x() * b.y() - a.y() * b.x(); }

int orient(const StripPoint& a, const StripPoint& b, const StripPoint& c) {
    const double v = cross(b - a, c - a);
    const double scale = (b - a).lpNorm<Eigen::Infinity>() * (c - a).lpNorm<Eigen::Infinity>();
    if (std::abs(v) <= 1e-14 * std::max(scale, 1e-300)) return 0;
    return v > 0 ? 1 : -1;
}

bool on_segment(const StripPoint& a, const StripPoint& b, const StripPoint& p) {
    return std::min(a.x(), b.x()) - 1e-15 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-15 &&
           std::min(a.y(), b.y()) - 1e-15 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-15;
}

}  // namespace

bool segments_intersect(const StripPoint& a, const StripPoint& b, const StripPoint& c, const StripPoint& d) {
    const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4 && o1 * o2 <= 0 && o3 * o4 <= 0) {
        if (o1 != 0 || o2 != 0) return true;
    }
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

bool segment_intersection(const StripPoint& a, const StripPoint& b, const StripPoint& c, const StripPoint& d,
                          double& s, double& t) {
    if (!segments_intersect(a, b, c, d)) return false;
    const StripPoint r = b - a, q = d - c;
    const double den = cross(r, q);
    if (std::abs(den) > 1e-18) {
        s = std::clamp(cross(c - a, q) / den, 0.0, 1.0);
        t = std::clamp(cross(c - a, r) / den, 0.0, 1.0);
        return true;
    }
    // Collinear overlap: earliest point along ab that lies on cd.
    const double rr = r.squaredNorm(), qq = q.squaredNorm();
    double best = 2.0;
    for (const StripPoint& p : {a, c, d}) {
        if (!on_segment(c, d, p) && !(p == c || p == d)) continue;
        if (!on_segment(a, b, p)) continue;
        const double sp = rr > 0 ? (p - a).dot(r) / rr : 0.0;
        best = std::min(best, sp);
    }
    if (best > 1.0) return false;
    s = std::clamp(best, 0.0, 1.0);
    const StripPoint p = a + s * r;
    t = qq > 0 ? std::clamp((p - c).dot(q) / qq, 0.0, 1.0) : 0.0;
    return true;
}

double segment_distance(const StripPoint& a, const StripPoint& b, const StripPoint& c, const StripPoint& d) {
    if (segments_intersect(a, b, c, d)) return 0.0;
    return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                     point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

std::vector<long long> SegmentIndex::keys_for(const StripPoint& a, const StripPoint& b, double pad) const {
    const long x0 = static_cast<long>(std::floor((std::min(a.x(), b.x()) - pad) / cell_));
    const long x1 = static_cast<long>(std::floor((std::max(a.x(), b.x()) + pad) / cell_));
    const long y0 = static_cast<long>(std::floor((std::min(a.y(), b.y()) - pad) / cell_));
    const long y1 = static_cast<long>(std::floor((std::max(a.y(), b.y()) + pad) / cell_));
    std::vector<long long> keys;
    keys.reserve(static_cast<std::size_t>((x1 - x0 + 1) * (y1 - y0 + 1)));
    for (long ix = x0; ix <= x1; ++ix)
        for (long iy = y0; iy <= y1; ++iy) keys.push_back(key(ix, iy));
    return keys;
}

void SegmentIndex::add_segment(const StripPoint& a, const StripPoint& b) {
    const std::size_t id = segs_.size();
    segs_.emplace_back(a, b);
    for (long long k : keys_for(a, b, 0.0)) buckets_[k].push_back(id);
}

void SegmentIndex::add_polyline(const std::vector<StripPoint>& pts, bool closed) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) add_segment(pts[i], pts[i + 1]);
    if (closed && pts.size() > 2) add_segment(pts.back(), pts.front());
}

double SegmentIndex::distance(const StripPoint& p, double radius) const {
    double best = std::numeric_limits<double>::infinity();
    for (long long k : keys_for(p, p, radius)) {
        auto it = buckets_.find(k);
        if (it == buckets_.end()) continue;
        for (std::size_t id : it->second)
            best = std::min(best, point_segment_distance(p, segs_[id].first, segs_[id].second));
    }
    return best <= radius ? best : std::numeric_limits<double>::infinity();
}

bool SegmentIndex::intersects(const StripPoint& a, const StripPoint& b) const {
    for (long long k : keys_for(a, b, 0.0)) {
        auto it = buckets_.find(k);
        if (it == buckets_.end()) continue;
        for (std::size_t id : it->second)
            if (segments_intersect(a, b, segs_[id].first, segs_[id].second)) return true;
    }
    return false;
}

std::vector<StripPoint> densify(const std::vector<StripPoint>& pts, double spacing, bool closed) {
    std::vector<StripPoint> out;
    if (pts.empty()) return out;
    const std::size_t n = pts.size();
    const std::size_t segs = closed ? n : n - 1;
    for (std::size_t i = 0; i < segs; ++i) {
        const StripPoint& a = pts[i];
        const StripPoint& b = pts[(i + 1) % n];
        const int k = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing)));
        for (int j = 0; j < k; ++j) out.push_back(a + (b - a) * (static_cast<double>(j) / k));
    }
    if (!closed) out.push_back(pts.back());
    return out;
}

bool is_simple(const std::vector<StripPoint>& pts, bool closed) {
    const std::size_t n = pts.size();
    if (n < 3) return true;
    const std::size_t segs = closed ? n : n - 1;
    double extent = 0.0;
    for (std::size_t i = 0; i < segs; ++i) extent = std::max(extent, (pts[(i + 1) % n] - pts[i]).norm());
    SegmentIndex index(std::max(extent, 1e-6));
    for (std::size_t i = 0; i < segs; ++i) index.add_segment(pts[i], pts[(i + 1) % n]);
    // Pairwise check restricted to bucket neighbours.
    for (std::size_t i = 0; i < segs; ++i) {
        for (std::size_t j = i + 1; j < segs; ++j) {
            const bool adjacent = j == i + 1 || (closed && i == 0 && j == segs - 1);
            const StripPoint &a = pts[i], &b = pts[(i + 1) % n], &c = pts[j], &d = pts[(j + 1) % n];
            if (std::max(a.x(), b.x()) < std::min(c.x(), d.x()) || std::max(c.x(), d.x()) < std::min(a.x(), b.x()) ||
                std::max(a.y(), b.y()) < std::min(c.y(), d.y()) || std::max(c.y(), d.y()) < std::min(a.y(), b.y()))
                continue;
            if (adjacent) {
                // Adjacent segments may only share their common vertex.
                const StripPoint shared = (j == i + 1) ? b : a;
                const StripPoint other_i = (j == i + 1) ? a : b;
                const StripPoint other_j = (j == i + 1) ? d : c;
                if (orient(shared, other_i, other_j) == 0 && (other_i - shared).dot(other_j - shared) > 0)
                    return false;
                continue;
            }
            if (segments_intersect(a, b, c, d)) return false;
        }
    }
    return true;
}

bool below_essential_loop(const StripPoint& p, const std::vector<StripPoint>& loop) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& v : loop) {
        lo = std::min(lo, v.x());
        hi = std::max(hi, v.x());
    }
    const long k0 = static_cast<long>(std::floor(p.x() - hi)) - 1;
    const long k1 = static_cast<long>(std::ceil(p.x() - lo)) + 1;
    int crossings = 0;
    for (long k = k0; k <= k1; ++k) {
        for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
            const StripPoint a = deck(loop[i], k), b = deck(loop[i + 1], k);
            if ((a.x() <= p.x()) == (b.x() <= p.x())) continue;
            const double y = a.y() + (b.y() - a.y()) * (p.x() - a.x()) / (b.x() - a.x());
            if (y > p.y()) ++crossings;
        }
    }
    return crossings % 2 == 1;
}

int side_of_crossing_arc(const StripPoint& p, const std::vector<StripPoint>& arc) {
    for (std::size_t i = 0; i + 1 < arc.size(); ++i)
        if (point_segment_distance(p, arc[i], arc[i + 1]) < 1e-14) return 0;
    const double py = std::clamp(p.y(), -1.0 + 1e-12, 1.0 - 1e-12);
    int crossings = 0;
    for (std::size_t i = 0; i + 1 < arc.size(); ++i) {
        const StripPoint &a = arc[i], &b = arc[i + 1];
        if ((a.y() <= py) == (b.y() <= py)) continue;
        const double x = a.x() + (b.x() - a.x()) * (py - a.y()) / (b.y() - a.y());
        if (x > p.x()) ++crossings;
    }
    return crossings % 2 == 1 ? -1 : 1;
}

}  // namespace annulus

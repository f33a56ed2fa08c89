#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "annulus/core.hpp"

namespace annulus {

/// Closed axis-aligned rectangle [x0, x1] x [y0, y1] in the strip.
struct Rect {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double diameter() const { return std::hypot(width(), height()); }
    bool contains(const StripPoint& p, double slack = 0.0) const {
        return p.x() >= x0 - slack && p.x() <= x1 + slack && p.y() >= y0 - slack && p.y() <= y1 + slack;
    }
    /// Euclidean distance from p to the rectangle (0 inside).
    double distance(const StripPoint& p) const {
        const double dx = std::max({x0 - p.x(), 0.0, p.x() - x1});
        const double dy = std::max({y0 - p.y(), 0.0, p.y() - y1});
        return std::hypot(dx, dy);
    }
    bool intersects(const Rect& o) const { return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1; }
    Rect translated(long n) const { return {x0 + static_cast<double>(n), x1 + static_cast<double>(n), y0, y1}; }
    StripPoint centre() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

/// Cut points a_0 < ... < a_{P-1} of one period, extended by a_{k+P} = a_k + 1.
struct IntervalDecomposition {
    std::vector<double> cut_points;

    int period_count() const { return static_cast<int>(cut_points.size()); }
    double cut(long k) const;
    /// [a_k, a_{k+1}] for any integer k.
    std::pair<double, double> interval(long k) const { return {cut(k), cut(k + 1)}; }
};

/// Brick of one period; the translate by tau^n is the same brick with deck
/// power n.
struct Brick {
    int id = 0;
    Rect rect;
    bool collar = false;
    int depth = 0;
    double margin = 0.0;
    /// Bricks sharing an edge of positive length, as (id, deck power).
    std::vector<std::pair<int, long>> adjacency;
};

/// Reference to the translate tau^shift(B_id).
struct BrickRef {
    int id = 0;
    long shift = 0;
    bool operator==(const BrickRef&) const = default;
    auto operator<=>(const BrickRef&) const = default;
};

struct BrickOptions {
    int grid_n = 16;
    int max_depth = 12;
    /// Cells meeting this ball around a fixed point are left out of the tiling
    /// once their side is no larger than the radius. 0 selects 1/(2 grid_n).
    double exclusion_radius = 0.0;
};

struct BrickDecomposition {
    std::vector<Brick> bricks;
    double epsilon = 0.5;
    IntervalDecomposition boundary;
    /// Ids of the lower boundary rectangles B-_0, ..., B-_{P-1} of period 0.
    std::vector<int> boundary_chain;
    /// x_n on B-_n with H(x_n) in B-_{n+1}.
    std::vector<StripPoint> chain_witnesses;
    /// Fixed points (sheet 0) whose neighbourhoods were left out.
    std::vector<StripPoint> excluded_points;
    double exclusion_radius = 0.0;
    int grid_n = 0;

    Rect rect(const BrickRef& b) const { return bricks[static_cast<std::size_t>(b.id)].rect.translated(b.shift); }
    /// Every brick translate containing p (closed bricks).
    std::vector<BrickRef> locate(const StripPoint& p) const;
    /// Every brick translate meeting the closed rectangle r.
    std::vector<BrickRef> overlapping(const Rect& r) const;
    /// Rebuilds the lookup tables; called by the builder and the loader.
    void index();

private:
    double bucket_ = 0.0;
    std::unordered_map<long long, std::vector<int>> buckets_;
    long long key(long ix, long iy) const { return (static_cast<long long>(ix) << 32) ^ (iy & 0xffffffffLL); }
};

/// Smallest n >= 3 such that the n equal intervals of the lower boundary are
/// h-free. Throws BoundaryFixedPoint or NormalizationError.
IntervalDecomposition boundary_interval_decomposition(const LiftedMap& h);

/// True when h maps [a, b] x {-1} off itself; exact for lifts of circle maps.
bool boundary_interval_free(const LiftedMap& h, double a, double b);

/// Greedy left-to-right merge of neighbouring intervals while the lifted
/// intervals stay H-free in the strip.
IntervalDecomposition maximal_merge(const IntervalDecomposition& d, const LiftedMap& h);

/// Certified margin m with dist(H(B), B) >= m; throws NotCertifiablyFree.
double certify_free(const LiftedMap& h, const Rect& b);

BrickDecomposition build_brick_decomposition(const LiftedMap& h, const BrickOptions& opts,
                                             const std::vector<StripPoint>& fixed_points);
/// Locates the fixed points itself at the options' grid size.
BrickDecomposition build_brick_decomposition(const LiftedMap& h, int grid_n);

struct DecompositionCheck {
    bool equivariant = false;
    bool margins_positive = false;
    bool boundary_rectangles = false;
    bool chain = false;
    bool disjoint_interiors = false;
    /// Sampled points of the strip away from excluded neighbourhoods lie in
    /// some brick.
    bool covers = false;
    bool ok() const {
        return equivariant && margins_positive && boundary_rectangles && chain && disjoint_interiors && covers;
    }
};

/// Re-checks the stored invariants against h.
DecompositionCheck check_decomposition(const LiftedMap& h, const BrickDecomposition& d);

void write_decomposition(std::ostream& out, const BrickDecomposition& d);
BrickDecomposition read_decomposition(std::istream& in);

}  // namespace annulus

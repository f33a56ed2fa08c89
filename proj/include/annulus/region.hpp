#pragma once

#include <vector>

#include "annulus/brickwork.hpp"
#include "annulus/flowgraph.hpp"
#include "annulus/geometry.hpp"

namespace annulus {

/// Cells of a non-uniform grid on the strip. In periodic mode the columns
/// cover one period [xs.front(), xs.front() + 1) and wrap.
struct RectComplex {
    std::vector<double> xs, ys;
    bool periodic = false;
    std::vector<char> cells;

    int nx() const { return static_cast<int>(xs.size()) - 1; }
    int ny() const { return static_cast<int>(ys.size()) - 1; }
    bool at(int i, int j) const;
    void set(int i, int j, bool v);
    /// Cell containing p (periodic mode reduces x), or false when outside.
    bool lookup(const StripPoint& p, int& i, int& j) const;
    bool contains(const StripPoint& p) const;
};

/// Union of rectangles on the grid spanned by their edges. Window mode keeps
/// x in [x_lo, x_hi]; periodic mode reduces modulo 1.
RectComplex rasterize(const std::vector<Rect>& rects, bool periodic, double x_lo = 0.0, double x_hi = 1.0);

/// Fills the complementary components (4-connected) that neither touch the
/// window sides nor wrap around the annulus. Returns the number of cells set.
int fill_bounded_components(RectComplex& c);

/// Frontier of the occupied set, oriented with the set on the right. Edges on
/// r = +-1 and on the window sides are not part of the frontier. Closed
/// loops are Jordan (or essential Line in periodic mode with one period of
/// vertices, last = first + (+-1, 0)); open paths are CrossingArc when both
/// ends lie on r = +-1, HalfLine when one end is on a window side.
std::vector<PolyCurve> trace_frontier(const RectComplex& c);

/// Fill and trace for a brick set. With `saturate` the set is replaced by
/// the union of its deck translates.
std::vector<PolyCurve> fill_and_frontier(const BrickSet& s, const BrickDecomposition& d, bool saturate);

}  // namespace annulus

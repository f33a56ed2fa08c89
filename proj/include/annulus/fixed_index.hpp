#pragma once

#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "annulus/core.hpp"
#include "annulus/geometry.hpp"

namespace annulus {

struct FixedPointRecord {
    AnnulusPoint location;
    /// n such that tau^{-n} o H fixes the lift of `location` on sheet 0.
    long nielsen_shift = 0;
    int index = 0;
    bool on_boundary = false;
    double refinement_residual = 0.0;

    StripPoint lifted() const { return lift_point(location, 0); }
};

struct FixedPointOptions {
    int grid_n = 512;
    double tol = 1e-10;
    bool compute_indices = true;
    /// A refined point with this many distinct neighbours within three grid
    /// cells is treated as part of a non-isolated fixed set.
    int cluster_neighbours = 3;
};

/// Fixed points of h on the annulus over all lifts tau^{-n} o H, sorted by
/// (theta, r). Throws NonIsolatedFixedSet for clustered candidates.
std::vector<FixedPointRecord> find_fixed_points(const LiftedMap& h, const FixedPointOptions& opts = {});
inline std::vector<FixedPointRecord> find_fixed_points(const LiftedMap& h, int grid_n, double tol) {
    FixedPointOptions o;
    o.grid_n = grid_n;
    o.tol = tol;
    return find_fixed_points(h, o);
}

/// Winding number of p -> f(p) - p along a closed polyline (the wrap segment
/// from the last vertex back to the first is implied).
int curve_index(const PlaneMap& f, const PolyCurve& curve);

/// Closed polygon approximating the circle of radius rho around c,
/// counterclockwise.
PolyCurve circle_curve(const StripPoint& c, double rho, int vertices = 64);

/// Lefschetz index of a fixed point of tau^{-shift} o H. Boundary points use
/// the reflected double of the map; an odd doubled index raises
/// IndexHalvingError.
int lefschetz_index(const LiftedMap& h, const FixedPointRecord& fp, double rho);

struct NielsenClassTable {
    std::map<long, std::vector<FixedPointRecord>> classes;
    std::map<long, int> index_sums;
    LiftedMap reference_lift;
    /// Set when the reference lift declares area preservation: every finite
    /// class is then expected to have index sum 0.
    bool index_sums_asserted = false;

    bool empty() const { return classes.empty(); }
    std::size_t total() const;
};

NielsenClassTable nielsen_partition(const LiftedMap& h, const std::vector<FixedPointRecord>& fps);

/// Pairs (n, n + 1) of nonempty classes.
std::vector<std::pair<long, long>> consecutive_classes(const NielsenClassTable& t);

/// Structured-text report, one record per fixed point.
void write_fixed_point_report(std::ostream& out, const NielsenClassTable& t);

/// 0 no fixed points, 1 classes present but none consecutive, 2 consecutive
/// classes present.
int fixed_point_exit_code(const NielsenClassTable& t);

}  // namespace annulus

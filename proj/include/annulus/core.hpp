#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <string>

namespace annulus {

/// Point of the strip R x [-1, 1]: x() is the cover coordinate theta, y() is r.
using StripPoint = Eigen::Vector2d;
/// Point of the plane, used by the extension of a lift beyond |r| <= 1.
using PlanePoint = Eigen::Vector2d;

/// Point of S^1 x [-1, 1] with the circle coordinate normalised to [0, 1).
struct AnnulusPoint {
    double theta_mod1 = 0.0;
    double r = 0.0;
    bool operator==(const AnnulusPoint&) const = default;
};

using PointMap = std::function<StripPoint(const StripPoint&)>;

/// A lift H of an annulus homeomorphism isotopic to the identity. Evaluators
/// must be pure so that they can be shared between workers.
struct LiftedMap {
    PointMap forward;
    PointMap inverse;
    double lipschitz_bound = 1.0;
    double inverse_lipschitz_bound = 1.0;
    /// sup |p1(H(z)) - p1(z)|.
    double displacement_bound = 0.0;
    std::string label;
    bool preserves_area = false;

    StripPoint operator()(const StripPoint& p) const { return forward(p); }
};

struct PlaneMap {
    std::function<PlanePoint(const PlanePoint&)> forward;
    PlanePoint operator()(const PlanePoint& p) const { return forward(p); }
};

/// tau^n(p).
inline StripPoint deck(const StripPoint& p, long n) {
    return {p.x() + static_cast<double>(n), p.y()};
}

/// tau^n o H.
LiftedMap deck_shift(const LiftedMap& map, long n);

/// The lift H^{-1} (forward and inverse swapped).
LiftedMap inverse_of(const LiftedMap& map);

/// R o H o R with R(theta, r) = (-theta, -r). R is orientation preserving,
/// swaps the boundary circles and satisfies R o tau = tau^{-1} o R.
LiftedMap flip_boundaries(const LiftedMap& map);
inline StripPoint flip_point(const StripPoint& p) { return {-p.x(), -p.y()}; }

AnnulusPoint project(const StripPoint& p);
StripPoint lift_point(const AnnulusPoint& a, long sheet);

/// Horizontal displacement D_H(a) = p1(H(z)) - p1(z) for z over a.
double displacement(const LiftedMap& map, const AnnulusPoint& a);
double displacement(const LiftedMap& map, const StripPoint& z);

/// f(x, y) = H(x, y/|y|) + (0, y - y/|y|) for |y| >= 1, H on the strip.
PlaneMap plane_extension(const LiftedMap& map);

/// Wrapped distance on the annulus between the projections of two strip points.
double annulus_distance(const StripPoint& a, const StripPoint& b);

}  // namespace annulus

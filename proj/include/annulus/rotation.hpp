#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "annulus/core.hpp"
#include "annulus/geometry.hpp"

namespace annulus {

struct RotationEstimate {
    /// (p1(H^n(z)) - p1(z)) / n.
    double value = 0.0;
    /// Spread of the running averages over [n/2, n].
    double tail_spread = 0.0;
};

RotationEstimate birkhoff_rotation_number(const LiftedMap& h, const StripPoint& z, long n);

struct OrbitEstimate {
    StripPoint start;
    long horizon = 0;
    double estimate = 0.0;
    double spread = 0.0;
};

struct RotationReport {
    std::vector<OrbitEstimate> orbits;
    /// [a, b] = [min, max] of the per-orbit estimates.
    double a = 0.0, b = 0.0;
    /// Largest tail spread; every estimate lies in [a - widening, b + widening].
    double widening = 0.0;
};

/// Seeded uniform starts plus points of both boundary circles.
RotationReport rotation_set_estimate(const LiftedMap& h, int samples, long horizon, std::uint64_t seed);

enum class Quadrature { Grid, MonteCarlo };

struct MeanDisplacement {
    /// Integral of D_H against Lebesgue measure of total mass 2.
    double value = 0.0;
    double error = 0.0;
};

/// Grid: midpoint rule at `resolution` and `resolution / 2` per side,
/// Richardson-extrapolated. Monte Carlo: `resolution`^2 seeded samples with a
/// CLT error bar.
MeanDisplacement mean_displacement(const LiftedMap& h, Quadrature method, int resolution, std::uint64_t seed = 1);

/// Signed area between a crossing arc (bottom to top) and its image, positive
/// when the image lies to the right.
double signed_area_between(const LiftedMap& h, const PolyCurve& arc);

/// Vertical arc theta = x from r = -1 to r = 1.
PolyCurve vertical_arc(double x, int vertices = 2);

struct OrbitProbe {
    StripPoint start;
    long horizon = 0;
    double max_right_excursion = 0.0;
    double max_left_excursion = 0.0;
    bool unbounded_right = false;
    bool unbounded_left = false;
};

std::vector<OrbitProbe> unbounded_orbit_probe(const LiftedMap& h, const std::vector<StripPoint>& starts,
                                              long horizon = 10000, double threshold = 5.0);
/// Some start flags right and another flags left.
bool twist_evidence(const std::vector<OrbitProbe>& probes);

/// CSV "n,theta" of p1(H^n(z)) for n = 0..horizon.
void write_orbit_csv(std::ostream& out, const LiftedMap& h, const StripPoint& z, long horizon);

}  // namespace annulus

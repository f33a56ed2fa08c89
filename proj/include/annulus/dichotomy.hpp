#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "annulus/brickwork.hpp"
#include "annulus/fixed_index.hpp"
#include "annulus/flowgraph.hpp"
#include "annulus/geometry.hpp"

namespace annulus {

enum class Alternative { OnePrime, TwoPrime, NoneFound };
enum class Side { Lower, Upper };
enum class Direction { Forward, Backward };

std::string to_string(Alternative a);
std::string to_string(Side s);
std::string to_string(Direction d);

struct Certificates {
    /// 2': min distance between the arc and its image outside the fixed-point
    /// balls. 1': min distance between J and h(J) outside the balls.
    double gap = 0.0;
    double neighbourhood_radius = 1e-3;
    /// 2': image strictly between the arc and its deck translate.
    /// 1': every sample of the image strictly inside the subannulus.
    bool one_sided = false;
    /// 1': Monte Carlo estimate of the area of B minus its image (mass 2).
    double area_deficit = 0.0;
    double area_error = 0.0;
    std::size_t samples = 0;
    /// 2': gap of the arc as constructed, before the straighter candidates
    /// were tried (0 when it did not certify).
    double constructed_gap = 0.0;
};

struct DichotomyResult {
    Alternative alternative = Alternative::NoneFound;
    /// Cover coordinates: a crossing arc from r = -1 to r = 1, or one period
    /// of an essential loop (last vertex = first + (1, 0)).
    PolyCurve witness;
    Side side = Side::Lower;
    Direction direction = Direction::Forward;
    Certificates certificates;
    long nielsen_class_id = 0;
    /// Which construction produced the witness.
    std::string branch;
};

struct ConstructionOptions {
    double neighbourhood_radius = 1e-3;
    std::size_t mc_samples = 100000;
    std::uint64_t seed = 1;
    /// Sample spacing along curves.
    double spacing = 1e-3;
};

/// Dense samples of `image` outside the balls are checked against J.
/// Throws NotProper when neither h(J) nor h^{-1}(J) lies strictly inside the
/// subannulus bounded by J and the chosen boundary circle.
DichotomyResult test_subannulus(const LiftedMap& h, const PolyCurve& j, Side side,
                                const std::vector<StripPoint>& fixed_points = {},
                                const ConstructionOptions& opts = {});

/// The essential component of a frontier computed from a deck-saturated set,
/// oriented left to right. Throws NoSeparatingComponent.
PolyCurve extract_essential_curve(const std::vector<PolyCurve>& lines);

/// One period of an essential loop cut from a crossing arc that meets its
/// deck translate: from the first z with z + 1 on the arc to z + 1.
/// Throws CertificateFailure when no such point exists.
PolyCurve loop_from_tau_overlap(const PolyCurve& beta);

struct ArcCertificate {
    bool simple = false;
    /// H(arc) strictly between arc and tau(arc) away from the balls.
    bool right_side = false;
    /// H(arc) strictly between tau^{-1}(arc) and arc away from the balls.
    bool left_side = false;
    double gap = 0.0;
    bool ok() const { return simple && (right_side || left_side) && gap > 0.0; }
};

ArcCertificate certify_crossing_arc(const LiftedMap& h, const PolyCurve& arc,
                                    const std::vector<StripPoint>& fixed_points, const ConstructionOptions& opts = {});

struct CrossingArcTrace {
    PolyCurve alpha;  ///< frontier arc of the filled attractor
    PolyCurve beta;   ///< frontier of the left domain of V
    int horizon = 0;  ///< m
    int reductions = 0;
    int intersection_depth = 0;  ///< N of the returned arc
};

/// Crossing arc built from a lower boundary attractor that is bounded on the
/// left and meets the upper boundary. Throws TauOverlap (trace->beta set),
/// HorizonOverflow, WindowTooSmall or CertificateFailure.
PolyCurve extract_crossing_arc(const LiftedMap& H, const LiftedMap& G, const BrickSet& a,
                               const BrickDecomposition& d, CrossingArcTrace* trace = nullptr);

/// Left-pushed copy of the arc around the sample runs flagged in `mask`
/// (one flag per vertex), offset by `step`.
PolyCurve detour_left(const PolyCurve& arc, const std::vector<char>& mask, double step);

struct HypothesisReport {
    bool holds = true;
    std::vector<std::string> failures;
    NielsenClassTable table;
    bool lower_boundary_free = false;
    bool upper_boundary_free = false;
    std::string summary;
};

struct ClassifyOptions {
    int grid_n = 16;
    int window = 16;
    int max_window = 128;
    int fixed_point_grid = 256;
    double fixed_point_tol = 1e-10;
    ConstructionOptions construction;
};

struct Verdict {
    HypothesisReport hypotheses;
    std::optional<DichotomyResult> result;
    std::string probe;
    std::string message;
    /// 0 witness found, 2 hypotheses fail, 3 inconclusive.
    int exit_code = 3;
};

Verdict classify(const LiftedMap& h, const ClassifyOptions& opts = {});

void write_verdict(std::ostream& out, const Verdict& v);
/// CSV "index,theta,r" with theta reduced to [0, 1).
void write_curve_csv(std::ostream& out, const PolyCurve& c);

}  // namespace annulus

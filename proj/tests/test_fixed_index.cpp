#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "annulus/errors.hpp"
#include "annulus/families.hpp"
#include "annulus/fixed_index.hpp"

using namespace annulus;

namespace {

// Plain discrete winding number: unwrapped atan2 over many samples.
double oracle_winding(const PlaneMap& f, const StripPoint& c, double rho, int samples) {
    double total = 0.0;
    auto disp = [&](int k) {
        const double a = 2 * std::numbers::pi * k / samples;
        const PlanePoint p = c + rho * PlanePoint{std::cos(a), std::sin(a)};
        return PlanePoint(f(p) - p);
    };
    PlanePoint prev = disp(0);
    for (int k = 1; k <= samples; ++k) {
        const PlanePoint cur = disp(k);
        total += std::atan2(prev.x() * cur.y() - prev.y() * cur.x(), prev.dot(cur));
        prev = cur;
    }
    return total / (2 * std::numbers::pi);
}

FixedPointOptions coarse() {
    FixedPointOptions o;
    o.grid_n = 128;
    return o;
}

}  // namespace

TEST_CASE("rigid rotation has no fixed points") {
    CHECK(find_fixed_points(rigid_rotation(0.3), coarse()).empty());
    const auto table = nielsen_partition(rigid_rotation(0.3), {});
    CHECK(fixed_point_exit_code(table) == 0);
}

TEST_CASE("linear twist has a non-isolated fixed set") {
    CHECK_THROWS_AS(find_fixed_points(linear_twist(), coarse()), NonIsolatedFixedSet);
}

TEST_CASE("bump map: saddle and centre in class 0") {
    const LiftedMap h = hamiltonian_bump();
    const auto fps = find_fixed_points(h, coarse());
    REQUIRE(fps.size() == 2);
    CHECK(fps[0].location.theta_mod1 == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(fps[1].location.theta_mod1 == doctest::Approx(0.5).epsilon(1e-8));
    for (const auto& fp : fps) {
        CHECK(fp.nielsen_shift == 0);
        CHECK(std::abs(fp.location.r) < 1e-8);
        CHECK(!fp.on_boundary);
        CHECK(fp.refinement_residual < 1e-10);
        CHECK((h(fp.lifted()) - fp.lifted()).norm() < 1e-9);
    }
    CHECK(fps[0].index == -1);
    CHECK(fps[1].index == 1);
    const auto table = nielsen_partition(h, fps);
    CHECK(table.index_sums.at(0) == 0);
    CHECK(consecutive_classes(table).empty());
    CHECK(fixed_point_exit_code(table) == 1);

    for (const auto& fp : fps) {
        const double w = oracle_winding(plane_extension(h), fp.lifted(), 1e-3, 10000);
        CHECK(w == doctest::Approx(fp.index).epsilon(1e-6));
    }
}

TEST_CASE("deck_shift relabels the classes") {
    const LiftedMap h = deck_shift(hamiltonian_bump(), 2);
    const auto fps = find_fixed_points(h, coarse());
    REQUIRE(fps.size() == 2);
    for (const auto& fp : fps) CHECK(fp.nielsen_shift == 2);
    const auto table = nielsen_partition(h, fps);
    CHECK(table.classes.count(2) == 1);
    CHECK(table.index_sums.at(2) == 0);
}

TEST_CASE("curve_index examples") {
    const PlaneMap doubling{[](const PlanePoint& p) { return PlanePoint(2 * p); }};
    const PolyCurve unit = circle_curve({0, 0}, 1.0, 64);
    CHECK(curve_index(doubling, unit) == 1);
    CHECK(oracle_winding(doubling, {0, 0}, 1.0, 10000) == doctest::Approx(1.0));

    // Rectangle [a, a+1] x [-2, 2] around no fixed point of the extended rotation.
    const PlaneMap rot = plane_extension(rigid_rotation(0.3));
    const double a = 0.17;
    std::vector<StripPoint> rect{{a, -2}, {a + 1, -2}, {a + 1, 2}, {a, 2}};
    CHECK(curve_index(rot, make_curve(rect, CurveKind::Jordan)) == 0);

    // Orientation reversal negates, refinement and reparameterisation preserve.
    const PlaneMap saddle{[](const PlanePoint& p) { return PlanePoint{2 * p.x(), 0.5 * p.y()}; }};
    const PolyCurve c = circle_curve({0, 0}, 0.3, 64);
    CHECK(curve_index(saddle, c) == -1);
    CHECK(curve_index(saddle, reversed(c)) == 1);
    CHECK(curve_index(saddle, circle_curve({0, 0}, 0.3, 7)) == -1);
    std::vector<StripPoint> shifted;
    for (int k = 0; k < 64; ++k) shifted.push_back(c.vertex((k + 13) % 64));
    CHECK(curve_index(saddle, make_curve(shifted, CurveKind::Jordan)) == -1);

    const PlaneMap ident{[](const PlanePoint& p) { return p; }};
    CHECK_THROWS_AS(curve_index(ident, unit), CurveHitsFixedPoint);
}

TEST_CASE("consecutive_classes") {
    NielsenClassTable t;
    FixedPointRecord fp;
    t.classes[0] = {fp};
    t.classes[2] = {fp};
    CHECK(consecutive_classes(t).empty());
    CHECK(fixed_point_exit_code(t) == 1);
    t.classes[1] = {fp};
    const auto pairs = consecutive_classes(t);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == std::pair<long, long>{0, 1});
    CHECK(pairs[1] == std::pair<long, long>{1, 2});
    CHECK(fixed_point_exit_code(t) == 2);
    t.classes[-1] = {};
    CHECK(consecutive_classes(t).size() == 2);
}

TEST_CASE("boundary fixed points come from the circle scan") {
    // Interior points drift upward; the lower circle carries a sine flow with
    // fixed points at theta = 0 and 1/2.
    LiftedMap h;
    h.forward = [](const StripPoint& p) {
        return StripPoint{p.x() + 0.05 * std::sin(2 * std::numbers::pi * p.x()) * (1 - p.y()) / 2 + 0.1 * (1 + p.y()),
                          p.y() + 0.1 * (1 - p.y() * p.y())};
    };
    h.label = "boundary-sine";
    h.displacement_bound = 0.25;
    FixedPointOptions o = coarse();
    o.compute_indices = false;
    const auto fps = find_fixed_points(h, o);
    REQUIRE(fps.size() == 2);
    for (const auto& fp : fps) {
        CHECK(fp.on_boundary);
        CHECK(fp.location.r == -1.0);
    }
    CHECK(fps[0].location.theta_mod1 == doctest::Approx(0.0));
    CHECK(fps[1].location.theta_mod1 == doctest::Approx(0.5));
    // A transverse boundary point doubles to an odd index.
    CHECK_THROWS_AS(lefschetz_index(h, fps[0], 1e-3), IndexHalvingError);
    o.compute_indices = true;
    CHECK_THROWS_AS(find_fixed_points(h, o), IndexHalvingError);
}

TEST_CASE("tangential boundary point halves to index 0") {
    LiftedMap h;
    h.forward = [](const StripPoint& p) {
        return StripPoint{p.x() + 0.05 * (1 - std::cos(2 * std::numbers::pi * p.x())) + 0.1 * (1 + p.y()),
                          p.y() + 0.1 * (1 - p.y() * p.y())};
    };
    h.label = "boundary-tangent";
    FixedPointRecord fp;
    fp.location = {0.0, -1.0};
    fp.on_boundary = true;
    CHECK(lefschetz_index(h, fp, 1e-3) == 0);
}

TEST_CASE("report lists every point") {
    const LiftedMap h = hamiltonian_bump();
    const auto table = nielsen_partition(h, find_fixed_points(h, coarse()));
    std::ostringstream os;
    write_fixed_point_report(os, table);
    CHECK(os.str().find("count = 2") != std::string::npos);
    CHECK(os.str().find("index_sum = 0") != std::string::npos);
}

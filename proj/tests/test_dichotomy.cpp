#include <doctest.h>

#include <cmath>
#include <sstream>

#include "annulus/dichotomy.hpp"
#include "annulus/errors.hpp"
#include "annulus/families.hpp"
#include "annulus/region.hpp"
#include "annulus/rotation.hpp"

using namespace annulus;

namespace {

PolyCurve circle_at(double r) {
    PolyCurve c = make_curve({{0.0, r}, {0.5, r}, {1.0, r}}, CurveKind::Line);
    c.essential = true;
    return c;
}

// (theta, r) -> (theta + f(r), r), inverse by subtraction.
LiftedMap shear(double (*f)(double)) {
    LiftedMap m;
    m.forward = [f](const StripPoint& p) { return StripPoint{p.x() + f(p.y()), p.y()}; };
    m.inverse = [f](const StripPoint& p) { return StripPoint{p.x() - f(p.y()), p.y()}; };
    m.lipschitz_bound = m.inverse_lipschitz_bound = 2.0;
    m.displacement_bound = 1.0;
    m.label = "shear";
    return m;
}

}  // namespace

TEST_CASE("drift subannulus below r = -1/2 shrinks under h") {
    const LiftedMap h = drift_contraction();
    const DichotomyResult res = test_subannulus(h, circle_at(-0.5), Side::Lower);
    CHECK(res.alternative == Alternative::OnePrime);
    CHECK(res.direction == Direction::Forward);
    // h(J) is the circle r = -1/2 - (1/4)(3/4).
    CHECK(res.certificates.gap == doctest::Approx(0.1875).epsilon(1e-6));
    // Lebesgue area (mass 2 convention) of the band between the circles.
    CHECK(std::abs(res.certificates.area_deficit - 0.1875) < 4 * res.certificates.area_error + 1e-9);
    CHECK(res.certificates.samples == 100000);
}

TEST_CASE("drift subannulus above r = 1/2 shrinks under h^-1") {
    const LiftedMap h = drift_contraction();
    const DichotomyResult res = test_subannulus(h, circle_at(0.5), Side::Upper);
    CHECK(res.direction == Direction::Backward);
    // B \ h^-1(B) = {1/2 < r < r*} with r* - (1 - r*^2)/4 = 1/2.
    const double r_star = (-1.0 + std::sqrt(1.75)) / 0.5;
    CHECK(std::abs(res.certificates.area_deficit - (r_star - 0.5)) < 4 * res.certificates.area_error + 1e-9);
}

TEST_CASE("subannulus test rejects invariant circles") {
    CHECK_THROWS_AS(test_subannulus(rigid_rotation(0.3), circle_at(0.2), Side::Lower), NotProper);
    LiftedMap fix_j;
    fix_j.forward = [](const StripPoint& p) { return StripPoint{p.x(), p.y() + 0.1 * p.y() * (1 - p.y() * p.y())}; };
    fix_j.inverse = fix_j.forward;
    CHECK_THROWS_AS(test_subannulus(fix_j, circle_at(0.0), Side::Lower), NotProper);
    CHECK_THROWS_AS(test_subannulus(drift_contraction(), make_curve({{0.0, -0.5}, {0.5, 0.0}}, CurveKind::Line),
                                    Side::Lower),
                    NotProper);
}

TEST_CASE("essential curve selection") {
    RectComplex collar = rasterize({{0.0, 1.0, -1.0, -0.5}}, true);
    const PolyCurve j = extract_essential_curve(trace_frontier(collar));
    CHECK(j.back().x() - j.front().x() == doctest::Approx(1.0));
    CHECK(j.front().y() == doctest::Approx(-0.5));

    // A set meeting both boundaries has no separating line.
    RectComplex column = rasterize({{0.2, 0.4, -1.0, 1.0}}, true);
    CHECK_THROWS_AS(extract_essential_curve(trace_frontier(column)), NoSeparatingComponent);
}

TEST_CASE("rigid rotation attractors meet the top, so no separating line") {
    const LiftedMap h = rigid_rotation(0.3);
    const BrickDecomposition d = build_brick_decomposition(h, BrickOptions{8, 12, 0.0}, {});
    const BrickGraph g = build_brick_graph(h, d);
    CHECK_THROWS_AS(extract_essential_curve(fill_and_frontier(attractor(g, d, 0), d, true)), NoSeparatingComponent);
    CHECK_THROWS_AS(extract_essential_curve(fill_and_frontier(repeller(g, d, 0), d, true)), NoSeparatingComponent);
}

TEST_CASE("loop cut from an arc meeting its translate") {
    const PolyCurve beta =
        make_curve({{0.0, -1.0}, {0.0, 0.0}, {1.5, 0.0}, {1.5, 1.0}}, CurveKind::CrossingArc);
    const PolyCurve j = loop_from_tau_overlap(beta);
    CHECK(j.essential);
    CHECK(j.front().isApprox(StripPoint{0.0, 0.0}));
    CHECK(j.back().isApprox(StripPoint{1.0, 0.0}));
    // Point-in-region oracle: the subannulus below the loop is {r < 0}.
    const std::vector<StripPoint> pts = curve_points(j);
    for (double x : {0.1, 0.7, 3.3})
        for (double y : {-0.9, -0.1, 0.1, 0.9}) CHECK(below_essential_loop({x, y}, pts) == (y < 0));

    CHECK_THROWS_AS(loop_from_tau_overlap(make_curve({{0.2, -1.0}, {0.2, 1.0}}, CurveKind::CrossingArc)), CertificateFailure);
}

TEST_CASE("crossing arc certificates against analytic witnesses") {
    const PolyCurve vertical = make_curve({{0.1, -1.0}, {0.1, 1.0}}, CurveKind::CrossingArc);
    const ArcCertificate right = certify_crossing_arc(rigid_rotation(0.3), vertical, {});
    CHECK(right.ok());
    CHECK(right.right_side);
    CHECK_FALSE(right.left_side);
    CHECK(right.gap == doctest::Approx(0.3));
    // 0.8 to the right is 0.2 to the left of the next translate.
    const ArcCertificate wrap = certify_crossing_arc(rigid_rotation(0.8), vertical, {});
    CHECK(wrap.gap == doctest::Approx(0.2));
    const ArcCertificate left = certify_crossing_arc(rigid_rotation(-0.3), vertical, {});
    CHECK(left.left_side);
    CHECK_FALSE(left.right_side);
    // A twist pushes the two halves to opposite sides.
    CHECK_FALSE(certify_crossing_arc(linear_twist(0.5, 0.0), vertical, {}).ok());
}

TEST_CASE("crossing arc touching a fixed point is certified outside its ball") {
    const LiftedMap h = shear([](double r) { return 0.2 * r * r; });
    const PolyCurve arc = make_curve({{0.0, -1.0}, {0.0, 0.0}, {0.0, 1.0}}, CurveKind::CrossingArc);
    CHECK_FALSE(certify_crossing_arc(h, arc, {}).ok());
    const ArcCertificate cert = certify_crossing_arc(h, arc, {StripPoint{0.0, 0.0}});
    CHECK(cert.ok());
    CHECK(cert.gap > 0.0);
    CHECK(cert.gap < 1e-6);
}

TEST_CASE("left detour keeps the endpoints and moves flagged vertices") {
    std::vector<StripPoint> pts;
    for (int i = 0; i <= 20; ++i) pts.emplace_back(0.5, -1.0 + i * 0.1);
    std::vector<char> mask(pts.size(), 0);
    mask[10] = 1;
    const PolyCurve out = detour_left(make_curve(pts, CurveKind::CrossingArc), mask, 0.05);
    CHECK(out.front().isApprox(pts.front()));
    CHECK(out.back().isApprox(pts.back()));
    CHECK(is_simple(curve_points(out), false));
    int moved = 0;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        CHECK(out.vertex(i).x() <= 0.5 + 1e-15);
        if (out.vertex(i).x() < 0.5) {
            ++moved;
            CHECK(out.vertex(i).x() == doctest::Approx(0.45));
        }
    }
    CHECK(moved == 3);
}

TEST_CASE("rigid rotation arc construction") {
    const LiftedMap H = rigid_rotation(0.3);
    const LiftedMap G = rigid_rotation(0.7);
    const BrickDecomposition d = build_brick_decomposition(H, BrickOptions{8, 12, 0.0}, {});
    const BrickGraph g = build_brick_graph(H, d);
    CrossingArcTrace trace;
    const PolyCurve arc = extract_crossing_arc(H, G, attractor(g, d, 0), d, &trace);
    CHECK(trace.horizon == 0);
    CHECK(trace.intersection_depth == 1);
    CHECK(trace.reductions == 0);
    CHECK(arc.front().y() == doctest::Approx(-1.0));
    CHECK(arc.back().y() == doctest::Approx(1.0));
    const ArcCertificate cert = certify_crossing_arc(H, arc, {});
    CHECK(cert.ok());
    CHECK(cert.right_side);
    // Staircase with treads of 1/4 under a shift of 0.3.
    CHECK(cert.gap == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("a backward-moving G overflows the horizon") {
    const LiftedMap H = rigid_rotation(0.3);
    const BrickDecomposition d = build_brick_decomposition(H, BrickOptions{8, 12, 0.0}, {});
    const BrickGraph g = build_brick_graph(H, d);
    CHECK_THROWS_AS(extract_crossing_arc(H, rigid_rotation(-0.2), attractor(g, d, 0), d), HorizonOverflow);
}

TEST_CASE("classify rigid rotation") {
    const Verdict v = classify(rigid_rotation(0.3));
    CHECK(v.exit_code == 0);
    REQUIRE(v.result);
    CHECK(v.result->alternative == Alternative::TwoPrime);
    CHECK(v.probe == "P3");
    CHECK(v.result->certificates.gap > 0.05);
    CHECK(v.result->certificates.constructed_gap > 0.0);
    // Oracle: any vertical segment is a witness with gap min(c, 1 - c).
    const ArcCertificate oracle = certify_crossing_arc(rigid_rotation(0.3), vertical_arc(0.0), {});
    CHECK(v.result->certificates.gap <= oracle.gap + 1e-9);
    CHECK(certify_crossing_arc(rigid_rotation(0.3), v.result->witness, {}).ok());
}

TEST_CASE("classify dissipative drift") {
    const Verdict v = classify(drift_contraction());
    CHECK(v.exit_code == 0);
    REQUIRE(v.result);
    CHECK(v.result->alternative == Alternative::OnePrime);
    CHECK(v.result->side == Side::Lower);
    CHECK(v.result->direction == Direction::Forward);
    CHECK(v.result->certificates.area_deficit > 0.1);
    for (Eigen::Index i = 0; i < v.result->witness.size(); ++i)
        CHECK(v.result->witness.vertex(i).y() == doctest::Approx(-0.5));
}

TEST_CASE("classify reports the two fixed points of the bump") {
    const Verdict v = classify(hamiltonian_bump());
    CHECK(v.exit_code == 2);
    CHECK_FALSE(v.hypotheses.holds);
    CHECK(v.hypotheses.summary == "two fixed points present");
    CHECK(v.hypotheses.table.total() == 2);
    CHECK_FALSE(v.result);
}

TEST_CASE("classify is deterministic and writes its artefacts") {
    const Verdict a = classify(rigid_rotation(0.3));
    const Verdict b = classify(rigid_rotation(0.3));
    REQUIRE(a.result);
    REQUIRE(b.result);
    CHECK(a.result->witness.vertices == b.result->witness.vertices);
    std::ostringstream csv, report;
    write_curve_csv(csv, a.result->witness);
    write_verdict(report, a);
    CHECK(csv.str().rfind("index,theta,r\n0,", 0) == 0);
    CHECK(report.str().find("alternative = 2prime") != std::string::npos);
}

TEST_CASE("slow G: the raster of V reproduces the staircase") {
    const LiftedMap H = rigid_rotation(0.3);
    const BrickDecomposition d = build_brick_decomposition(H, BrickOptions{8, 12, 0.0}, {});
    const BrickGraph g = build_brick_graph(H, d);
    CrossingArcTrace trace;
    try {
        const PolyCurve arc = extract_crossing_arc(H, rigid_rotation(0.2), attractor(g, d, 0), d, &trace);
        CHECK(is_simple(curve_points(arc), false));
    } catch (const CertificateFailure&) {
        // Treads longer than the shift overlap their images along segments.
    }
    CHECK(trace.horizon == 1);
    // V is U_r itself, so its left domain is bounded by the same staircase.
    REQUIRE(trace.beta.size() == trace.alpha.size());
    CHECK(trace.beta.vertices.isApprox(trace.alpha.vertices));
}

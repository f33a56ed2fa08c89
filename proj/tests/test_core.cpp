#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "annulus/core.hpp"
#include "annulus/errors.hpp"
#include "annulus/families.hpp"

using namespace annulus;

namespace {

std::vector<LiftedMap> registered() {
    return {rigid_rotation(0.3), linear_twist(), drift_contraction(), hamiltonian_bump()};
}

}  // namespace

TEST_CASE("deck_shift composes with the translation") {
    const LiftedMap id = rigid_rotation(0.0);
    CHECK(deck_shift(id, 1)(StripPoint{0, 0}).isApprox(StripPoint{1, 0}));
    const StripPoint p = deck_shift(rigid_rotation(0.3), -1)(StripPoint{0, 0});
    CHECK(p.x() == doctest::Approx(-0.7));
    CHECK(p.y() == 0.0);
    const LiftedMap bump = hamiltonian_bump();
    const LiftedMap same = deck_shift(bump, 0);
    const StripPoint z{0.37, -0.2};
    CHECK((same(z) - bump(z)).norm() == 0.0);
    CHECK(deck_shift(bump, -3).displacement_bound == doctest::Approx(bump.displacement_bound + 3));
    CHECK((deck_shift(bump, 2).inverse(deck_shift(bump, 2)(z)) - z).norm() < 1e-9);
}

TEST_CASE("project and lift_point") {
    const AnnulusPoint a = project({2.25, 0.5});
    CHECK(a.theta_mod1 == doctest::Approx(0.25));
    CHECK(a.r == 0.5);
    CHECK(lift_point({0.25, 0.5}, 2).isApprox(StripPoint{2.25, 0.5}));
    const AnnulusPoint b = project({-0.1, -1});
    CHECK(b.theta_mod1 == doctest::Approx(0.9));
    CHECK(b.r == -1.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> th(-50, 50), rr(-1, 1);
    for (int i = 0; i < 500; ++i) {
        const StripPoint p{th(rng), rr(rng)};
        const AnnulusPoint q = project(p);
        CHECK(q.theta_mod1 >= 0.0);
        CHECK(q.theta_mod1 < 1.0);
        CHECK((lift_point(q, static_cast<long>(std::floor(p.x()))) - p).norm() < 1e-12);
        for (long k : {-4L, 0L, 7L}) {
            const AnnulusPoint back = project(lift_point(q, k));
            CHECK(back.theta_mod1 == doctest::Approx(q.theta_mod1).epsilon(1e-12));
        }
    }
}

TEST_CASE("displacement") {
    CHECK(displacement(rigid_rotation(0.3), AnnulusPoint{0.8, -0.4}) == doctest::Approx(0.3));
    CHECK(displacement(linear_twist(), AnnulusPoint{0.1, 1.0}) == doctest::Approx(0.5));
    CHECK(displacement(linear_twist(), AnnulusPoint{0.6, 0.0}) == 0.0);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> th(0, 1), rr(-1, 1);
    for (const auto& m : registered()) {
        for (int i = 0; i < 200; ++i) {
            const AnnulusPoint a{th(rng), rr(rng)};
            const double d0 = displacement(m, lift_point(a, 0));
            const double d5 = displacement(m, lift_point(a, -5));
            CHECK(std::abs(d0 - d5) < 1e-12);
            CHECK(std::abs(d0) <= m.displacement_bound + 1e-12);
        }
    }
}

TEST_CASE("plane extension") {
    const PlaneMap tau = plane_extension(deck_shift(rigid_rotation(0.0), 1));
    CHECK(tau(PlanePoint{0, 2}).isApprox(PlanePoint{1, 2}));
    const PlaneMap rot = plane_extension(rigid_rotation(0.3));
    const PlanePoint q = rot(PlanePoint{0, -3});
    CHECK(q.x() == doctest::Approx(0.3));
    CHECK(q.y() == doctest::Approx(-3.0));
    for (const auto& m : registered()) {
        const PlaneMap f = plane_extension(m);
        for (double x : {-1.3, 0.0, 0.42}) {
            CHECK((f(PlanePoint{x, 0.25}) - m(StripPoint{x, 0.25})).norm() == 0.0);
            for (double s : {-1.0, 1.0}) {
                // Continuity across |y| = 1: branch formula with y/|y| = s.
                const PlanePoint branch = m(StripPoint{x, s}) + PlanePoint{0, 0};
                CHECK((f(PlanePoint{x, s}) - branch).norm() == 0.0);
                const PlanePoint near = f(PlanePoint{x, s * (1.0 + 1e-9)});
                CHECK((near - branch).norm() < 1e-8);
            }
        }
    }
}

TEST_CASE("registered families pass registration") {
    for (const auto& m : registered()) {
        const ValidationReport rep = validate_map(m, 1000, 5);
        CHECK(rep.equivariance_residual < 1e-12);
        CHECK(rep.boundary_residual < 1e-12);
        CHECK(rep.inverse_residual < 1e-9);
        CHECK(rep.worst_lipschitz_ratio <= m.lipschitz_bound * (1 + 1e-9));
        CHECK_FALSE(rep.area_check_warning);
    }
}

TEST_CASE("understated Lipschitz bound fails registration") {
    LiftedMap m = linear_twist(2.0);
    m.lipschitz_bound = 1.0;
    CHECK_THROWS_AS(validate_map(m), MapRegistrationError);
}

TEST_CASE("make_family rejects unknown names and keys") {
    CHECK_THROWS_AS(make_family("nope", {}), ConfigError);
    CHECK_THROWS_AS(make_family("rigid", {{"c", "0.3"}, {"speed", "1"}}), ConfigError);
    CHECK_THROWS_AS(make_family("rigid", {{"c", "abc"}}), ConfigError);
    const LiftedMap m = make_family("rigid", {{"c", "0.25"}});
    CHECK(m(StripPoint{0, 0}).x() == doctest::Approx(0.25));
}

TEST_CASE("grid maps load from CSV and interpolate") {
    const LiftedMap source = drift_contraction(0.4, 0.2);
    const auto path = std::filesystem::temp_directory_path() / "annulus_grid_test.csv";
    {
        std::ofstream out(path);
        out << "theta_in,r_in,theta_out,r_out\n";
        const int nt = 32, nr = 33;
        for (int j = 0; j < nr; ++j)
            for (int i = 0; i < nt; ++i) {
                const StripPoint p{static_cast<double>(i) / nt, -1.0 + 2.0 * j / (nr - 1)};
                const StripPoint q = source(p);
                out.precision(17);
                out << p.x() << "," << p.y() << "," << q.x() << "," << q.y() << "\n";
            }
    }
    const LiftedMap g = make_family("grid", {{"file", path.string()}});
    // Exact at nodes, close in between, Lipschitz declared with 1.25 safety.
    CHECK((g(StripPoint{0.25, 0.0}) - source(StripPoint{0.25, 0.0})).norm() < 1e-12);
    CHECK((g(StripPoint{0.3, 0.11}) - source(StripPoint{0.3, 0.11})).norm() < 1e-3);
    CHECK(g.lipschitz_bound >= 1.25 * 1.0);
    CHECK(g.displacement_bound == doctest::Approx(0.4));
    std::filesystem::remove(path);
}

TEST_CASE("flip conjugation swaps the boundary circles") {
    const LiftedMap d = drift_contraction();
    const LiftedMap f = flip_boundaries(d);
    validate_map(f);
    // The lower boundary of the flipped map is the upper boundary of d, run backwards.
    CHECK(f(StripPoint{0.1, -1.0}).x() == doctest::Approx(0.1 - 0.4));
    CHECK(f(StripPoint{0.1, 0.5}).y() > 0.5);
}

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "annulus/brickwork.hpp"
#include "annulus/dichotomy.hpp"
#include "annulus/errors.hpp"
#include "annulus/families.hpp"
#include "annulus/fixed_index.hpp"
#include "annulus/flowgraph.hpp"
#include "annulus/rotation.hpp"
#include "annulus/scenario.hpp"

using namespace annulus;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

// Winding number of f(p) - p around a circle, by unwrapped atan2 over many
// samples. Independent of curve_index.
double winding_oracle(const PlaneMap& f, const StripPoint& c, double rho, int samples = 20000) {
    auto disp = [&](int k) {
        const double a = 2 * std::numbers::pi * k / samples;
        const PlanePoint p = c + rho * PlanePoint{std::cos(a), std::sin(a)};
        return PlanePoint(f(p) - p);
    };
    double total = 0.0;
    PlanePoint prev = disp(0);
    for (int k = 1; k <= samples; ++k) {
        const PlanePoint cur = disp(k);
        total += std::atan2(prev.x() * cur.y() - prev.y() * cur.x(), prev.dot(cur));
        prev = cur;
    }
    return total / (2 * std::numbers::pi);
}

struct Named {
    std::string name;
    LiftedMap map;
};

std::vector<Named> registered_families() {
    return {{"rigid", rigid_rotation(0.3)},
            {"twist", linear_twist()},
            {"drift", drift_contraction()},
            {"bump", hamiltonian_bump()},
            {"grid", grid_map(sample_grid(hamiltonian_bump(), 128, 65), "grid(bump)")}};
}

// Families without fixed points in the open annulus or on its boundary.
bool fixed_point_free(const LiftedMap& h, std::string& why) {
    try {
        const auto fps = find_fixed_points(h, 256, 1e-10);
        if (fps.empty()) return true;
        why = std::to_string(fps.size()) + " fixed points";
    } catch (const NonIsolatedFixedSet&) {
        why = "non-isolated fixed set";
    }
    return false;
}

Outcome mean_equals_area() {
    Outcome o;
    const std::vector<Named> fams{{"rigid", rigid_rotation(0.3)}, {"twist", linear_twist()},
                                  {"bump", hamiltonian_bump()}};
    for (const auto& f : fams) {
        const Stopwatch sw;
        const MeanDisplacement mean = mean_displacement(f.map, Quadrature::Grid, 512);
        double worst = 0.0;
        for (double x : {0.0, 0.25, 0.61})
            worst = std::max(worst, std::abs(mean.value - signed_area_between(f.map, vertical_arc(x))));
        const double t = sw.seconds();
        o.detail << " " << f.name << ": |diff| " << worst << " in " << t << " s;";
        o.require(worst < 1e-6, f.name + " difference");
        o.require(t < 10.0, f.name + " runtime");
    }
    return o;
}

Outcome index_suite() {
    Outcome o;
    int rectangles = 0;
    for (const auto& f : registered_families()) {
        const PlaneMap ext = plane_extension(f.map);
        int skipped = 0;
        for (double a : {-0.87, 0.13, 0.37, 0.71, 2.29}) {
            const std::vector<StripPoint> rect{{a, -2}, {a + 1, -2}, {a + 1, 2}, {a, 2}};
            try {
                const int idx = curve_index(ext, make_curve(rect, CurveKind::Jordan));
                ++rectangles;
                o.require(idx == 0, f.name + " rectangle index " + std::to_string(idx));
            } catch (const CurveHitsFixedPoint&) {
                ++skipped;
            }
        }
        if (skipped) o.detail << " " << f.name << ": " << skipped << " rectangles meet fixed points, skipped;";
    }
    o.detail << " " << rectangles << " rectangles with index 0;";

    // Lefschetz indices against the winding oracle, and class sums.
    int points = 0;
    const std::vector<Named> conservative{{"bump", hamiltonian_bump()},
                                          {"bump(c=0.12)", make_family("bump", {{"c", "0.12"}})},
                                          {"tau o bump", deck_shift(hamiltonian_bump(), 1)},
                                          {"grid(bump)", registered_families()[4].map}};
    for (const auto& f : conservative) {
        const auto fps = find_fixed_points(f.map, 256, 1e-10);
        o.require(!fps.empty(), f.name + " has fixed points");
        for (const auto& fp : fps) {
            ++points;
            // The lift that fixes the sheet-0 point.
            const LiftedMap fixing = deck_shift(f.map, -fp.nielsen_shift);
            const double w = winding_oracle(plane_extension(fixing), fp.lifted(), 1e-3);
            o.require(std::abs(w - std::round(w)) < 1e-6, f.name + " winding is an integer");
            o.require(std::lround(w) == fp.index, f.name + " index matches the oracle");
        }
        const NielsenClassTable t = nielsen_partition(f.map, fps);
        for (const auto& [cls, sum] : t.index_sums)
            o.require(sum == 0, f.name + " class " + std::to_string(cls) + " sum");
    }
    o.detail << " " << points << " Lefschetz indices exact, class sums 0; twist excluded from class sums (fixed circle)";
    return o;
}

Outcome brick_certification() {
    Outcome o;
    const Stopwatch total;
    for (const Named& f : {Named{"rigid", rigid_rotation(0.3)}, Named{"drift", drift_contraction()}}) {
        for (int n : {8, 16, 32}) {
            const BrickDecomposition d = build_brick_decomposition(f.map, n);
            const DecompositionCheck c = check_decomposition(f.map, d);
            o.detail << " " << f.name << "/" << n << ": " << d.bricks.size() << (c.ok() ? " ok;" : " BAD;");
            o.require(c.ok(), f.name + " invariants at " + std::to_string(n));
            o.require(d.bricks.size() < 10000, f.name + " brick count");
        }
    }
    o.detail << " " << total.seconds() << " s";
    o.require(total.seconds() < 30.0, "runtime");
    return o;
}

bool same_restricted(const BrickSet& a, const BrickSet& b, int half) {
    for (const BrickRef& m : a.members)
        if (std::abs(m.shift) <= half && !b.contains(m)) return false;
    for (const BrickRef& m : b.members)
        if (std::abs(m.shift) <= half && !a.contains(m)) return false;
    return a.bounded_left == b.bounded_left && a.bounded_right == b.bounded_right &&
           a.meets_upper_boundary == b.meets_upper_boundary;
}

Outcome p1_property() {
    Outcome o;
    for (const auto& f : registered_families()) {
        std::string why;
        if (!fixed_point_free(f.map, why)) {
            o.detail << " " << f.name << " excluded (" << why << ");";
            continue;
        }
        const BrickDecomposition d = build_brick_decomposition(f.map, 16);
        const BrickGraph g = build_brick_graph(f.map, d);
        const int n = static_cast<int>(d.bricks.size());
        int passed = 0;
        bool stable = true;
        for (int s = 0; s < 5; ++s) {
            const int b0 = s * n / 5 + s;
            passed += check_p1(g, b0, 16).pass() ? 1 : 0;
            stable = stable && same_restricted(attractor(g, d, b0, 16), attractor(g, d, b0, 32), 8) &&
                     same_restricted(repeller(g, d, b0, 16), repeller(g, d, b0, 32), 8);
        }
        o.detail << " " << f.name << ": " << passed << "/5 seeds, window " << (stable ? "stable;" : "UNSTABLE;");
        o.require(passed == 5, f.name + " P1");
        o.require(stable, f.name + " window stability");
    }
    return o;
}

Outcome dichotomy_exhaustive() {
    Outcome o;
    const Verdict rigid = classify(rigid_rotation(0.3));
    o.require(rigid.result && rigid.result->alternative == Alternative::TwoPrime, "rigid gives 2prime");
    if (rigid.result) {
        const auto& c = rigid.result->certificates;
        const ArcCertificate recheck = certify_crossing_arc(rigid_rotation(0.3), rigid.result->witness, {});
        o.detail << " rigid 2prime gap " << c.gap << " (constructed " << c.constructed_gap << ");";
        o.require(c.gap > 0.05 && c.one_sided, "rigid gap");
        o.require(recheck.ok() && recheck.gap > 0.05, "rigid witness re-certifies");
    }

    ClassifyOptions opts;
    opts.construction.mc_samples = 100000;
    opts.construction.seed = 1;
    const Verdict drift = classify(drift_contraction(), opts);
    o.require(drift.result && drift.result->alternative == Alternative::OnePrime, "drift gives 1prime");
    if (drift.result) {
        const auto& c = drift.result->certificates;
        o.detail << " drift 1prime deficit " << c.area_deficit << " +- " << c.area_error << ";";
        o.require(c.area_deficit > 0.1 && c.one_sided && c.samples == 100000, "drift deficit");
    }

    const Verdict bump = classify(hamiltonian_bump());
    o.detail << " bump: " << bump.message << ";";
    o.require(bump.exit_code == 2 && bump.hypotheses.summary == "two fixed points present", "bump report");

    const Verdict twist = classify(linear_twist());
    o.detail << " twist: " << twist.message;
    for (const Verdict* v : {&rigid, &drift, &bump, &twist})
        o.require(!(v->result && v->result->alternative == Alternative::NoneFound) && v->exit_code != 3,
                  "no none-found verdict");
    return o;
}

Outcome bump_cross_check() {
    Outcome o;
    const Stopwatch sw;
    const LiftedMap h = hamiltonian_bump();
    const MeanDisplacement mean = mean_displacement(h, Quadrature::Grid, 512);
    const RotationReport rot = rotation_set_estimate(h, 100, 10000, 1);
    const auto fps = find_fixed_points(h, 512, 1e-10);
    int shift0 = 0;
    for (const auto& fp : fps) shift0 += fp.nielsen_shift == 0 ? 1 : 0;
    const double t = sw.seconds();
    o.detail << " |mean| " << std::abs(mean.value) << ", rotation set [" << rot.a << ", " << rot.b << "], " << shift0
             << " fixed points with shift 0, " << t << " s";
    o.require(std::abs(mean.value) < 1e-6, "mean");
    o.require(shift0 >= 2, "fixed points");
    o.require(t < 60.0, "runtime");
    return o;
}

Outcome probe_consistency() {
    Outcome o;
    const std::vector<StripPoint> starts{{0.0, 0.8}, {0.0, -0.8}};
    const LiftedMap h = hamiltonian_bump();
    const auto probes = unbounded_orbit_probe(h, starts, 10000, 5.0);
    const bool opposite = (probes[0].unbounded_right && probes[1].unbounded_left) ||
                          (probes[0].unbounded_left && probes[1].unbounded_right);
    const NielsenClassTable t = nielsen_partition(h, find_fixed_points(h, 512, 1e-10));
    const std::size_t in_class = t.classes.count(0) ? t.classes.at(0).size() : 0;
    o.detail << " bump: flags " << (opposite ? "opposite" : "not opposite") << ", " << in_class
             << " fixed points in class 0;";
    o.require(opposite, "bump flags");
    o.require(in_class >= 2, "bump class 0");

    const auto tw = unbounded_orbit_probe(linear_twist(), starts, 10000, 5.0);
    std::string why;
    fixed_point_free(linear_twist(), why);
    o.detail << " twist excluded (flags " << (twist_evidence(tw) ? "opposite" : "not opposite") << ", " << why << ")";
    return o;
}

Outcome determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "annulus_acceptance_determinism";
    fs::remove_all(root);
    std::string manifests[2];
    for (int i = 0; i < 2; ++i) {
        ScenarioConfig c;
        c.pipeline = "verify-all";
        c.seed = 1;
        c.out = (root / ("run" + std::to_string(i))).string();
        c.workers = i == 0 ? 1 : 0;
        const RunReport r = run_scenario(c);
        o.require(r.exit_code == 0, "verify-all exit code");
        std::ifstream in(fs::path(c.out) / "manifest.txt", std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        manifests[i] = s.str();
    }
    o.detail << " " << std::count(manifests[0].begin(), manifests[0].end(), '\n') - 1 << " artefacts, manifest hash "
             << std::hex << fnv1a64(manifests[0]) << std::dec;
    o.require(!manifests[0].empty() && manifests[0] == manifests[1], "identical manifests");
    fs::remove_all(root);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"mean displacement equals vertical-arc area", mean_equals_area},
        {"index suite", index_suite},
        {"brick decomposition invariants", brick_certification},
        {"P1 property and window stability", p1_property},
        {"dichotomy alternatives", dichotomy_exhaustive},
        {"conservative bump cross-check", bump_cross_check},
        {"orbit probe consistency", probe_consistency},
        {"verify-all determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " threw " << e.what();
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ":" << o.detail.str()
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}

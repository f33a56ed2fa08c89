#include "annulus/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>

#include "annulus/parallel.hpp"

namespace annulus {

RotationEstimate birkhoff_rotation_number(const LiftedMap& h, const StripPoint& z, long n) {
    n = std::max(1L, n);
    StripPoint p = z;
    double lo = 1e300, hi = -1e300;
    for (long k = 1; k <= n; ++k) {
        p = h(p);
        if (2 * k >= n) {
            const double avg = (p.x() - z.x()) / static_cast<double>(k);
            lo = std::min(lo, avg);
            hi = std::max(hi, avg);
        }
    }
    return {(p.x() - z.x()) / static_cast<double>(n), hi - lo};
}

RotationReport rotation_set_estimate(const LiftedMap& h, int samples, long horizon, std::uint64_t seed) {
    std::vector<StripPoint> starts;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(0.0, 1.0), ur(-1.0, 1.0);
    for (int i = 0; i < samples; ++i) {
        const double t = ut(rng);
        starts.emplace_back(t, ur(rng));
    }
    for (int i = 0; i < 16; ++i) {
        starts.emplace_back(i / 16.0, -1.0);
        starts.emplace_back(i / 16.0, 1.0);
    }
    RotationReport rep;
    rep.orbits.resize(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        const RotationEstimate e = birkhoff_rotation_number(h, starts[i], horizon);
        rep.orbits[i] = {starts[i], horizon, e.value, e.tail_spread};
    });
    rep.a = 1e300;
    rep.b = -1e300;
    for (const auto& o : rep.orbits) {
        rep.a = std::min(rep.a, o.estimate);
        rep.b = std::max(rep.b, o.estimate);
        rep.widening = std::max(rep.widening, o.spread);
    }
    return rep;
}

namespace {

double midpoint_sum(const LiftedMap& h, int res) {
    std::vector<double> rows(static_cast<std::size_t>(res));
    parallel_for(rows.size(), [&](std::size_t j) {
        const double r = -1.0 + (static_cast<double>(j) + 0.5) * 2.0 / res;
        double acc = 0.0;
        for (int i = 0; i < res; ++i) acc += displacement(h, StripPoint{(i + 0.5) / res, r});
        rows[j] = acc;
    });
    double total = 0.0;
    for (double v : rows) total += v;
    return total * (1.0 / res) * (2.0 / res);
}

}  // namespace

MeanDisplacement mean_displacement(const LiftedMap& h, Quadrature method, int resolution, std::uint64_t seed) {
    resolution = std::max(2, resolution);
    if (method == Quadrature::Grid) {
        const double fine = midpoint_sum(h, resolution);
        const double coarse = midpoint_sum(h, resolution / 2);
        return {fine + (fine - coarse) / 3.0, std::abs(fine - coarse) / 3.0};
    }
    // Fixed partition into blocks, one stream per block, so the result does
    // not depend on the worker count.
    const std::size_t total = static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
    constexpr std::size_t blocks = 64;
    std::vector<double> sum(blocks), sq(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        std::mt19937_64 rng(seed * 1000003ULL + b);
        std::uniform_real_distribution<double> ut(0.0, 1.0), ur(-1.0, 1.0);
        const std::size_t count = total / blocks + (b < total % blocks ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i) {
            const double t = ut(rng);
            const double v = displacement(h, StripPoint{t, ur(rng)});
            sum[b] += v;
            sq[b] += v * v;
        }
    });
    double s = 0.0, s2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        s += sum[b];
        s2 += sq[b];
    }
    const double n = static_cast<double>(total);
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    return {2.0 * mean, 2.0 * std::sqrt(var / n)};
}

PolyCurve vertical_arc(double x, int vertices) {
    vertices = std::max(2, vertices);
    std::vector<StripPoint> pts;
    for (int i = 0; i < vertices; ++i) pts.emplace_back(x, -1.0 + 2.0 * i / (vertices - 1));
    return make_curve(pts, CurveKind::CrossingArc);
}

double signed_area_between(const LiftedMap& h, const PolyCurve& arc) {
    const std::vector<StripPoint> base = curve_points(arc);
    auto area_at = [&](double spacing) {
        const std::vector<StripPoint> a = densify(base, spacing);
        std::vector<StripPoint> image(a.size());
        parallel_for(a.size(), [&](std::size_t i) { image[i] = h(a[i]); });
        Vertices<double> poly(2, static_cast<Eigen::Index>(2 * a.size()));
        Eigen::Index k = 0;
        for (const auto& p : a) poly.col(k++) = p;
        for (auto it = image.rbegin(); it != image.rend(); ++it) poly.col(k++) = *it;
        return -shoelace_area(poly);
    };
    double spacing = 0.05;
    double prev = area_at(spacing);
    for (int it = 0; it < 20; ++it) {
        spacing /= 2;
        const double cur = area_at(spacing);
        if (std::abs(cur - prev) < 1e-8) return cur;
        prev = cur;
    }
    return prev;
}

std::vector<OrbitProbe> unbounded_orbit_probe(const LiftedMap& h, const std::vector<StripPoint>& starts, long horizon,
                                              double threshold) {
    std::vector<OrbitProbe> out(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        OrbitProbe p;
        p.start = starts[i];
        p.horizon = horizon;
        StripPoint z = starts[i];
        for (long k = 0; k < horizon; ++k) {
            z = h(z);
            const double e = z.x() - starts[i].x();
            p.max_right_excursion = std::max(p.max_right_excursion, e);
            p.max_left_excursion = std::max(p.max_left_excursion, -e);
        }
        p.unbounded_right = p.max_right_excursion > threshold;
        p.unbounded_left = p.max_left_excursion > threshold;
        out[i] = p;
    });
    return out;
}

bool twist_evidence(const std::vector<OrbitProbe>& probes) {
    const bool right = std::any_of(probes.begin(), probes.end(), [](const OrbitProbe& p) { return p.unbounded_right; });
    const bool left = std::any_of(probes.begin(), probes.end(), [](const OrbitProbe& p) { return p.unbounded_left; });
    return right && left;
}

void write_orbit_csv(std::ostream& out, const LiftedMap& h, const StripPoint& z, long horizon) {
    out << "n,theta\n" << std::setprecision(17);
    StripPoint p = z;
    for (long n = 0; n <= horizon; ++n) {
        out << n << "," << p.x() << "\n";
        p = h(p);
    }
}

}  // namespace annulus

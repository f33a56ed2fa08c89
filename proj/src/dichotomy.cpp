#include "annulus/dichotomy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "annulus/errors.hpp"
#include "annulus/parallel.hpp"
#include "annulus/region.hpp"

namespace annulus {

std::string to_string(Alternative a) {
    switch (a) {
        case Alternative::OnePrime: return "1prime";
        case Alternative::TwoPrime: return "2prime";
        case Alternative::NoneFound: return "none-found";
    }
    return "?";
}

std::string to_string(Side s) { return s == Side::Lower ? "lower" : "upper"; }
std::string to_string(Direction d) { return d == Direction::Forward ? "h" : "h-inverse"; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool near_fixed(const StripPoint& p, const std::vector<StripPoint>& fixed, double radius) {
    for (const auto& f : fixed)
        if (annulus_distance(p, f) < radius) return true;
    return false;
}

double span_of(const std::vector<StripPoint>& pts, double& lo) {
    lo = kInf;
    double hi = -kInf;
    for (const auto& p : pts) {
        lo = std::min(lo, p.x());
        hi = std::max(hi, p.x());
    }
    return hi - lo;
}

// Deck translates k in [k0, k1] of a polyline.
SegmentIndex translates_index(const std::vector<StripPoint>& pts, long k0, long k1, double cell) {
    SegmentIndex idx(cell);
    for (long k = k0; k <= k1; ++k) {
        std::vector<StripPoint> t(pts);
        for (auto& p : t) p = deck(p, k);
        idx.add_polyline(t);
    }
    return idx;
}

std::vector<StripPoint> map_all(const PointMap& f, const std::vector<StripPoint>& pts) {
    std::vector<StripPoint> out(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { out[i] = f(pts[i]); });
    return out;
}

double reduce_into(double x, double base) { return x - std::floor(x - base); }

// Sub-polyline between fractional vertex parameters ta <= tb.
std::vector<StripPoint> sub_polyline(const std::vector<StripPoint>& pts, double ta, double tb) {
    auto at = [&](double t) {
        const std::size_t i = std::min(static_cast<std::size_t>(t), pts.size() - 2);
        const double s = t - static_cast<double>(i);
        return StripPoint(pts[i] + s * (pts[i + 1] - pts[i]));
    };
    std::vector<StripPoint> out{at(ta)};
    for (std::size_t i = static_cast<std::size_t>(std::floor(ta)) + 1; static_cast<double>(i) < tb; ++i)
        if ((pts[i] - out.back()).norm() > 1e-14) out.push_back(pts[i]);
    const StripPoint e = at(tb);
    if ((e - out.back()).norm() > 1e-14 || out.size() == 1) out.push_back(e);
    return out;
}

}  // namespace

DichotomyResult test_subannulus(const LiftedMap& h, const PolyCurve& j, Side side,
                                const std::vector<StripPoint>& fixed_points, const ConstructionOptions& opts) {
    std::vector<StripPoint> loop = curve_points(j);
    if (loop.size() < 2 || std::abs(std::abs(loop.back().x() - loop.front().x()) - 1.0) > 1e-9)
        throw NotProper("curve is not one period of an essential loop");
    if (loop.back().x() < loop.front().x()) std::reverse(loop.begin(), loop.end());
    const double base = loop.front().x();

    auto inside = [&](const StripPoint& p) {
        const bool below = below_essential_loop(p, loop);
        return side == Side::Lower ? below : !below;
    };
    const std::vector<StripPoint> dense = densify(loop, opts.spacing);
    std::vector<char> skip(dense.size());
    for (std::size_t i = 0; i < dense.size(); ++i)
        skip[i] = near_fixed(dense[i], fixed_points, opts.neighbourhood_radius) ? 1 : 0;
    const SegmentIndex j_index = translates_index(loop, -2, 2, 0.05);

    // Strictly inside for every sample away from the balls; returns the gap
    // or -1 on failure.
    auto strict_gap = [&](const PointMap& f) {
        const std::vector<StripPoint> image = map_all(f, dense);
        std::vector<double> d(dense.size(), kInf);
        std::vector<char> bad(dense.size(), 0);
        parallel_for(dense.size(), [&](std::size_t i) {
            if (skip[i]) return;
            const StripPoint q{reduce_into(image[i].x(), base), image[i].y()};
            if (!inside(q)) {
                bad[i] = 1;
                return;
            }
            d[i] = j_index.distance(q, 1.0);
        });
        if (std::any_of(bad.begin(), bad.end(), [](char b) { return b != 0; })) return -1.0;
        // Reverse direction: J samples against the image polyline.
        std::vector<StripPoint> shifted(image);
        for (auto& q : shifted) q = StripPoint{q.x() - std::floor(image.front().x() - base), q.y()};
        const SegmentIndex image_index = translates_index(shifted, -2, 2, 0.05);
        parallel_for(dense.size(), [&](std::size_t i) {
            if (!skip[i]) d[i] = std::min(d[i], image_index.distance(dense[i], 1.0));
        });
        const double gap = *std::min_element(d.begin(), d.end());
        return gap > 1e-12 ? gap : -1.0;
    };

    DichotomyResult res;
    res.alternative = Alternative::OnePrime;
    res.side = side;
    res.witness = make_curve(loop, CurveKind::Line);
    res.witness.essential = true;
    double gap = strict_gap(h.forward);
    res.direction = Direction::Forward;
    if (gap < 0.0) {
        gap = strict_gap(h.inverse);
        res.direction = Direction::Backward;
    }
    if (gap < 0.0) throw NotProper("neither h(J) nor h^-1(J) lies strictly inside the subannulus");

    // Area of B minus g(B), g = h or h^-1: points of B whose g-preimage left B.
    const PointMap& pre = res.direction == Direction::Forward ? h.inverse : h.forward;
    constexpr std::size_t blocks = 64;
    std::vector<std::size_t> hits(blocks, 0);
    const std::size_t n = opts.mc_samples;
    parallel_for(blocks, [&](std::size_t b) {
        std::mt19937_64 rng(opts.seed * 7919ULL + b);
        std::uniform_real_distribution<double> ut(0.0, 1.0), ur(-1.0, 1.0);
        const std::size_t count = n / blocks + (b < n % blocks ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i) {
            const double t = ut(rng);
            const StripPoint z{base + t, ur(rng)};
            if (inside(z) && !inside(StripPoint(pre(z)))) ++hits[b];
        }
    });
    std::size_t total = 0;
    for (auto x : hits) total += x;
    const double p = n > 0 ? static_cast<double>(total) / static_cast<double>(n) : 0.0;
    res.certificates.gap = gap;
    res.certificates.neighbourhood_radius = opts.neighbourhood_radius;
    res.certificates.one_sided = true;
    res.certificates.area_deficit = 2.0 * p;
    res.certificates.area_error = n > 0 ? 2.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
    res.certificates.samples = n;
    return res;
}

PolyCurve extract_essential_curve(const std::vector<PolyCurve>& lines) {
    for (const auto& c : lines) {
        if (!c.essential || c.size() < 2) continue;
        if (std::abs(std::abs(c.back().x() - c.front().x()) - 1.0) > 1e-9) continue;
        if (std::abs(c.back().y() - c.front().y()) > 1e-12) continue;
        PolyCurve out = c.back().x() < c.front().x() ? reversed(c) : c;
        out.kind = CurveKind::Line;
        out.essential = true;
        return out;
    }
    throw NoSeparatingComponent("no deck-invariant frontier line separates the boundary circles");
}

PolyCurve loop_from_tau_overlap(const PolyCurve& beta) {
    const std::vector<StripPoint> pts = curve_points(beta);
    double best = kInf, partner = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
            double s = 0.0, t = 0.0;
            if (!segment_intersection(pts[i], pts[i + 1], deck(pts[k], -1), deck(pts[k + 1], -1), s, t)) continue;
            const double ti = static_cast<double>(i) + s;
            if (ti < best) {
                best = ti;
                partner = static_cast<double>(k) + t;
            }
        }
    }
    if (!std::isfinite(best)) throw CertificateFailure("arc does not meet its deck translate");
    std::vector<StripPoint> loop = sub_polyline(pts, std::min(best, partner), std::max(best, partner));
    if (loop.back().x() < loop.front().x()) std::reverse(loop.begin(), loop.end());
    loop.back() = deck(loop.front(), 1);
    PolyCurve out = make_curve(loop, CurveKind::Line);
    out.essential = true;
    return out;
}

ArcCertificate certify_crossing_arc(const LiftedMap& h, const PolyCurve& arc,
                                    const std::vector<StripPoint>& fixed_points, const ConstructionOptions& opts) {
    ArcCertificate cert;
    const std::vector<StripPoint> pts = curve_points(arc);
    if (pts.size() < 2 || std::abs(pts.front().y() + 1.0) > 1e-12 || std::abs(pts.back().y() - 1.0) > 1e-12)
        return cert;
    double lo = 0.0;
    const double span = span_of(pts, lo);
    const long reach = static_cast<long>(std::ceil(span)) + 1;

    cert.simple = is_simple(pts, false);
    if (cert.simple) {
        SegmentIndex self(0.05);
        self.add_polyline(pts);
        for (long k = 1; k <= reach && cert.simple; ++k)
            for (std::size_t i = 0; i + 1 < pts.size() && cert.simple; ++i)
                if (self.intersects(deck(pts[i], k), deck(pts[i + 1], k))) cert.simple = false;
    }

    const std::vector<StripPoint> dense = densify(pts, opts.spacing);
    const std::vector<StripPoint> image = map_all(h.forward, dense);
    const long k_lo = static_cast<long>(std::floor(-span)) - 3;
    const long k_hi = static_cast<long>(std::ceil(span + h.displacement_bound)) + 3;
    const SegmentIndex arc_index = translates_index(pts, k_lo, k_hi, 0.05);
    const SegmentIndex image_index = translates_index(image, -reach - 2, reach + 2, 0.05);

    std::vector<char> right(dense.size(), 1), left(dense.size(), 1);
    std::vector<double> d(dense.size(), kInf);
    parallel_for(dense.size(), [&](std::size_t i) {
        if (near_fixed(dense[i], fixed_points, opts.neighbourhood_radius)) return;
        const StripPoint& q = image[i];
        const int s0 = side_of_crossing_arc(q, pts);
        right[i] = s0 > 0 && side_of_crossing_arc(deck(q, -1), pts) < 0;
        left[i] = s0 < 0 && side_of_crossing_arc(deck(q, 1), pts) > 0;
        d[i] = std::min(arc_index.distance(q, 1.0), image_index.distance(dense[i], 1.0));
    });
    cert.right_side = std::all_of(right.begin(), right.end(), [](char c) { return c != 0; });
    cert.left_side = std::all_of(left.begin(), left.end(), [](char c) { return c != 0; });
    cert.gap = dense.empty() ? 0.0 : *std::min_element(d.begin(), d.end());
    if (!std::isfinite(cert.gap)) cert.gap = 1.0;
    return cert;
}

PolyCurve detour_left(const PolyCurve& arc, const std::vector<char>& mask, double step) {
    const std::vector<StripPoint> pts = curve_points(arc);
    const std::size_t n = pts.size();
    std::vector<char> flag(n, 0);
    for (std::size_t i = 0; i < n && i < mask.size(); ++i)
        if (mask[i]) {
            for (std::size_t k = (i > 0 ? i - 1 : 0); k <= std::min(n - 1, i + 1); ++k) flag[k] = 1;
        }
    // End points stay on the boundary circles.
    flag[0] = 0;
    flag[n - 1] = 0;
    auto normal = [&](std::size_t a, std::size_t b) {
        const StripPoint t = (pts[b] - pts[a]).normalized();
        return StripPoint{-t.y(), t.x()};
    };
    std::vector<StripPoint> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!flag[i]) {
            out.push_back(pts[i]);
            continue;
        }
        const StripPoint n0 = normal(i - 1, i), n1 = normal(i, i + 1);
        StripPoint m = n0 + n1;
        const double len = m.norm();
        m = len > 1e-12 ? StripPoint(m / len) : n0;
        const double c = std::max(0.5, m.dot(n0));
        StripPoint p = pts[i] + (step / c) * m;
        p.y() = std::clamp(p.y(), -1.0 + step, 1.0 - step);
        out.push_back(p);
    }
    std::vector<StripPoint> clean;
    for (const auto& p : out)
        if (clean.empty() || (p - clean.back()).norm() > 1e-14) clean.push_back(p);
    return make_curve(clean, CurveKind::CrossingArc);
}


namespace {

// First frontier component leaving the lower boundary line, leftmost start.
const PolyCurve* lower_frontier_arc(const std::vector<PolyCurve>& fr) {
    const PolyCurve* best = nullptr;
    for (const auto& c : fr) {
        if (c.kind != CurveKind::CrossingArc && c.kind != CurveKind::HalfLine) continue;
        if (std::abs(c.front().y() + 1.0) > 1e-12) continue;
        if (!best || c.front().x() < best->front().x()) best = &c;
    }
    return best;
}

// Samples p of `dense` lying within the band of G^1(dense), ..., G^n(dense)
// for every n up to the first empty level. Returns the mask of the last
// nonempty level and sets `depth` to N.
std::vector<char> intersection_levels(const LiftedMap& G, const std::vector<StripPoint>& dense, double band,
                                      int max_depth, int& depth) {
    std::vector<char> level(dense.size(), 1), previous;
    std::vector<StripPoint> image(dense);
    double lip = 1.0;
    for (int n = 1; n <= max_depth; ++n) {
        image = map_all(G.forward, image);
        lip *= std::max(1.0, G.lipschitz_bound);
        SegmentIndex idx(0.05);
        idx.add_polyline(image);
        const double b = band * lip;
        previous = level;
        parallel_for(dense.size(), [&](std::size_t i) {
            if (level[i]) level[i] = idx.distance(dense[i], b) < b ? 1 : 0;
        });
        if (std::none_of(level.begin(), level.end(), [](char c) { return c != 0; })) {
            depth = n;
            return previous;
        }
    }
    throw CertificateFailure("arc keeps meeting its forward images");
}

}  // namespace

PolyCurve extract_crossing_arc(const LiftedMap& H, const LiftedMap& G, const BrickSet& a,
                               const BrickDecomposition& d, CrossingArcTrace* trace) {
    (void)H;
    CrossingArcTrace local;
    CrossingArcTrace& tr = trace ? *trace : local;
    const std::vector<PolyCurve> fr = fill_and_frontier(a, d, false);
    const PolyCurve* delta = lower_frontier_arc(fr);
    if (!delta) throw CertificateFailure("filled attractor has no frontier arc from the lower boundary");
    if (delta->kind == CurveKind::HalfLine) throw WindowTooSmall("frontier arc leaves the window before r = 1");
    tr.alpha = *delta;
    const std::vector<StripPoint> alpha = curve_points(tr.alpha);
    const double cell = 1.0 / (4.0 * std::max(1, d.grid_n));

    // Horizon m: every point of alpha enters U_r within m + 1 steps of G.
    const int limit = 10 * (1 + static_cast<int>(std::ceil(G.displacement_bound)));
    const std::vector<StripPoint> samples = densify(alpha, cell);
    std::vector<int> steps(samples.size(), 0);
    parallel_for(samples.size(), [&](std::size_t i) {
        StripPoint q = samples[i];
        for (int j = 1; j <= limit + 1; ++j) {
            q = G(q);
            if (side_of_crossing_arc(q, alpha) > 0) {
                steps[i] = j;
                return;
            }
        }
        steps[i] = limit + 2;
    });
    const int m = *std::max_element(steps.begin(), steps.end()) - 1;
    if (m > limit) throw HorizonOverflow("G-images of the arc do not return to its right side");
    tr.horizon = m;

    PolyCurve beta = tr.alpha;
    if (m > 0) {
        // Raster of V = union of G^k(U_r), k <= m, and the left domain W_l.
        double lo = 0.0;
        const double span = span_of(alpha, lo);
        const double x0 = lo - 1.0;
        const double x1 = lo + span + (m + 1) * G.displacement_bound + 1.0;
        RectComplex c;
        const int nx = static_cast<int>(std::ceil((x1 - x0) / cell));
        const int ny = static_cast<int>(std::lround(2.0 / cell));
        for (int i = 0; i <= nx; ++i) c.xs.push_back(x0 + i * cell);
        for (int j = 0; j <= ny; ++j) c.ys.push_back(-1.0 + 2.0 * j / ny);
        c.cells.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0);
        std::vector<char> in_v(c.cells.size(), 0);
        parallel_for(static_cast<std::size_t>(ny), [&](std::size_t j) {
            for (int i = 0; i < nx; ++i) {
                StripPoint q{x0 + (i + 0.5) * cell, c.ys[j] + 0.5 * (c.ys[j + 1] - c.ys[j])};
                for (int k = 0; k <= m; ++k) {
                    if (side_of_crossing_arc(q, alpha) > 0) {
                        in_v[j * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i)] = 1;
                        break;
                    }
                    q = G.inverse(q);
                }
            }
        });
        std::vector<char> left(c.cells.size(), 0);
        std::deque<std::pair<int, int>> queue;
        for (int j = 0; j < ny; ++j) {
            const std::size_t id = static_cast<std::size_t>(j) * static_cast<std::size_t>(nx);
            if (!in_v[id]) {
                left[id] = 1;
                queue.emplace_back(0, j);
            }
        }
        while (!queue.empty()) {
            const auto [i, j] = queue.front();
            queue.pop_front();
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int u = i + di[k], v = j + dj[k];
                if (u < 0 || u >= nx || v < 0 || v >= ny) continue;
                const std::size_t id = static_cast<std::size_t>(v) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(u);
                if (in_v[id] || left[id]) continue;
                left[id] = 1;
                queue.emplace_back(u, v);
            }
        }
        for (std::size_t k = 0; k < c.cells.size(); ++k) c.cells[k] = left[k] ? 0 : 1;
        const std::vector<PolyCurve> frontier = trace_frontier(c);
        const PolyCurve* b = lower_frontier_arc(frontier);
        if (!b || b->kind != CurveKind::CrossingArc)
            throw CertificateFailure("left domain of V has no crossing frontier");
        beta = *b;
    }
    tr.beta = beta;

    {
        const std::vector<StripPoint> pts = curve_points(beta);
        SegmentIndex idx(0.05);
        idx.add_polyline(pts);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            if (idx.intersects(deck(pts[i], 1), deck(pts[i + 1], 1)))
                throw TauOverlap("arc meets its deck translate");
    }

    // Push the arc off the deepest intersection level until it misses G(arc).
    const double band = cell / 4.0;
    for (int round = 0; round <= 8; ++round) {
        const std::vector<StripPoint> dense = densify(curve_points(beta), band);
        int depth = 0;
        const std::vector<char> mask = intersection_levels(G, dense, band, 16, depth);
        tr.intersection_depth = depth;
        if (depth == 1) {
            tr.beta = beta;
            return beta;
        }
        beta = detour_left(make_curve(dense, CurveKind::CrossingArc), mask, cell);
        ++tr.reductions;
        if (!is_simple(curve_points(beta), false)) throw CertificateFailure("detour made the arc self-intersect");
    }
    throw CertificateFailure("arc modification did not separate the arc from its image");
}

namespace {

struct Normalized {
    LiftedMap work;  // h or its boundary flip
    bool flipped = false;
    long k = 0;      // H0 = tau^k o work
    LiftedMap H0, H, G;
    bool h_is_inverse = false;
    long class_id = 0;
    std::vector<StripPoint> fixed;  // Fix(H) on sheet 0
};

std::pair<double, double> boundary_displacement_range(const LiftedMap& m, double r) {
    double lo = kInf, hi = -kInf;
    for (int i = 0; i < 4096; ++i) {
        const double d = displacement(m, StripPoint{i / 4096.0, r});
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return {lo, hi};
}

bool boundary_moves_right(const LiftedMap& m, double r) { return boundary_displacement_range(m, r).first > 0.0; }

std::vector<StripPoint> class_points(const std::vector<FixedPointRecord>& fps, long shift, bool flipped) {
    std::vector<StripPoint> out;
    for (const auto& f : fps) {
        const long s = flipped ? -f.nielsen_shift : f.nielsen_shift;
        if (s != shift) continue;
        const StripPoint p = f.lifted();
        out.push_back(flipped ? StripPoint{-p.x() - std::floor(-p.x()), -p.y()} : p);
    }
    return out;
}

// Essential horizontal circles r = const that are moved off themselves.
std::optional<DichotomyResult> free_circle_search(const LiftedMap& h, const std::vector<StripPoint>& fixed,
                                                  const ConstructionOptions& opts) {
    for (int i = 0; i < 200; ++i) {
        const double r = -1.0 + (i + 0.5) / 100.0;
        const PolyCurve j = make_curve({{0.0, r}, {1.0, r}}, CurveKind::Line);
        for (Side side : {Side::Lower, Side::Upper}) {
            try {
                DichotomyResult res = test_subannulus(h, j, side, fixed, opts);
                res.branch = "free circle";
                return res;
            } catch (const NotProper&) {
            }
        }
    }
    return std::nullopt;
}

PolyCurve flip_curve(const PolyCurve& c) {
    PolyCurve out = c;
    for (Eigen::Index i = 0; i < c.size(); ++i) out.vertices.col(i) = flip_point(c.vertex(i));
    return reversed(out);
}

}  // namespace

Verdict classify(const LiftedMap& h, const ClassifyOptions& opts) {
    Verdict v;
    HypothesisReport& hyp = v.hypotheses;
    std::vector<FixedPointRecord> fps;
    try {
        FixedPointOptions fo;
        fo.grid_n = opts.fixed_point_grid;
        fo.tol = opts.fixed_point_tol;
        fps = find_fixed_points(h, fo);
    } catch (const NonIsolatedFixedSet& e) {
        hyp.holds = false;
        hyp.failures.push_back(std::string("fixed set is not finite: ") + e.what());
    } catch (const IndexHalvingError& e) {
        hyp.holds = false;
        hyp.failures.push_back(std::string("boundary fixed point without a half-integer-free index: ") + e.what());
    }
    if (hyp.holds) {
        hyp.table = nielsen_partition(h, fps);
        hyp.lower_boundary_free = std::none_of(fps.begin(), fps.end(), [](const FixedPointRecord& f) {
            return f.on_boundary && f.location.r < 0.0;
        });
        hyp.upper_boundary_free = std::none_of(fps.begin(), fps.end(), [](const FixedPointRecord& f) {
            return f.on_boundary && f.location.r > 0.0;
        });
        if (!hyp.lower_boundary_free && !hyp.upper_boundary_free) {
            hyp.holds = false;
            hyp.failures.push_back("both boundary circles carry fixed points");
        }
        for (const auto& [a, b] : consecutive_classes(hyp.table)) {
            hyp.holds = false;
            hyp.failures.push_back("consecutive Nielsen classes " + std::to_string(a) + " and " + std::to_string(b));
        }
        for (const auto& f : fps) {
            if (f.index != 0) {
                hyp.holds = false;
                std::ostringstream s;
                s << "fixed point (" << f.location.theta_mod1 << ", " << f.location.r << ") has index " << f.index;
                hyp.failures.push_back(s.str());
            }
        }
    }
    if (!hyp.holds) {
        hyp.summary = hyp.table.total() >= 2 ? "two fixed points present" : "hypotheses fail";
        v.exit_code = 2;
        v.message = hyp.summary;
        return v;
    }
    hyp.summary = "hypotheses hold";

    Normalized nm;
    nm.flipped = !hyp.lower_boundary_free;
    nm.work = nm.flipped ? flip_boundaries(h) : h;
    const auto [lo, hi] = boundary_displacement_range(nm.work, -1.0);
    nm.k = -static_cast<long>(std::floor(lo));
    if (hi + static_cast<double>(nm.k) >= 1.0 || lo + static_cast<double>(nm.k) <= 0.0) {
        v.exit_code = 3;
        v.message = "lower boundary displacement does not fit in one period";
        return v;
    }
    nm.H0 = deck_shift(nm.work, nm.k);
    const std::vector<StripPoint> fix_h0 = class_points(fps, -nm.k, nm.flipped);
    const std::vector<StripPoint> fix_next = class_points(fps, 1 - nm.k, nm.flipped);
    if (fix_next.empty()) {
        nm.H = nm.H0;
        nm.G = deck_shift(inverse_of(nm.H0), 1);
        nm.fixed = fix_h0;
        nm.class_id = -nm.k;
    } else {
        nm.G = nm.H0;
        nm.H = deck_shift(inverse_of(nm.H0), 1);
        nm.h_is_inverse = true;
        nm.fixed = fix_next;
        nm.class_id = 1 - nm.k;
    }
    if (nm.flipped) nm.class_id = -nm.class_id;

    auto finish = [&](DichotomyResult res) {
        res.nielsen_class_id = nm.class_id;
        if (nm.flipped) {
            res.witness = flip_curve(res.witness);
            res.side = res.side == Side::Lower ? Side::Upper : Side::Lower;
        }
        v.result = std::move(res);
        v.exit_code = 0;
        v.message = "witness found";
        return v;
    };
    auto none_found = [&](const std::string& why) {
        DichotomyResult res;
        res.alternative = Alternative::NoneFound;
        res.nielsen_class_id = nm.class_id;
        res.branch = why;
        v.result = res;
        v.exit_code = 3;
        v.message = why;
        return v;
    };
    const ConstructionOptions& co = opts.construction;

    BrickDecomposition d;
    BrickGraph g;
    BrickSet a, r;
    try {
        d = build_brick_decomposition(nm.H, BrickOptions{opts.grid_n, 12, 0.0}, nm.fixed);
        g = build_brick_graph(nm.H, d);
        a = attractor_auto(g, d, d.boundary_chain.front(), opts.window, opts.max_window);
        r = repeller_auto(g, d, d.boundary_chain.front(), opts.window, opts.max_window);
    } catch (const Error& e) {
        return none_found(std::string("brick stage: ") + e.what());
    }
    const ProbeCase probe = boundedness_probe(a, r);
    v.probe = to_string(probe);

    if (probe == ProbeCase::P2Right || probe == ProbeCase::P2Left) {
        const BrickSet& s = probe == ProbeCase::P2Right ? a : r;
        try {
            const PolyCurve j = extract_essential_curve(fill_and_frontier(s, d, true));
            DichotomyResult res = test_subannulus(nm.work, j, Side::Lower, nm.fixed, co);
            res.branch = probe == ProbeCase::P2Right ? "essential curve from the attractor"
                                                     : "essential curve from the repeller";
            return finish(res);
        } catch (const Error& e) {
            return none_found(std::string("essential curve: ") + e.what());
        }
    }
    if (probe == ProbeCase::Inconclusive) return none_found("boundedness probe inconclusive");

    if (!boundary_moves_right(nm.G, -1.0) || !boundary_moves_right(nm.G, 1.0)) {
        if (auto res = free_circle_search(nm.work, nm.fixed, co)) return finish(*res);
        return none_found("G does not move both boundaries right and no free circle was found");
    }

    CrossingArcTrace trace;
    PolyCurve arc;
    try {
        arc = extract_crossing_arc(nm.H, nm.G, a, d, &trace);
    } catch (const TauOverlap&) {
        try {
            const PolyCurve j = loop_from_tau_overlap(trace.beta);
            for (Side side : {Side::Lower, Side::Upper}) {
                try {
                    DichotomyResult res = test_subannulus(nm.work, j, side, nm.fixed, co);
                    res.branch = "essential curve from an overlapping arc";
                    return finish(res);
                } catch (const NotProper&) {
                }
            }
            return none_found("overlap loop is not proper");
        } catch (const Error& e) {
            return none_found(std::string("overlap loop: ") + e.what());
        }
    } catch (const Error& e) {
        return none_found(std::string("crossing arc: ") + e.what());
    }

    // Candidates: the constructed arc, its chord, the vertical arc at its foot.
    std::vector<std::pair<PolyCurve, std::string>> candidates{{arc, "crossing arc"}};
    candidates.emplace_back(make_curve({arc.front(), arc.back()}, CurveKind::CrossingArc), "crossing arc chord");
    candidates.emplace_back(make_curve({arc.front(), StripPoint{arc.front().x(), 1.0}}, CurveKind::CrossingArc),
                            "vertical arc at the foot");
    std::optional<DichotomyResult> best;
    double constructed_gap = 0.0;
    for (const auto& [c, name] : candidates) {
        const ArcCertificate cert = certify_crossing_arc(nm.H0, c, nm.fixed, co);
        if (!cert.ok()) continue;
        if (&c == &candidates.front().first) constructed_gap = cert.gap;
        if (best && cert.gap <= best->certificates.gap) continue;
        DichotomyResult res;
        res.alternative = Alternative::TwoPrime;
        res.witness = c;
        res.witness.kind = CurveKind::CrossingArc;
        res.direction = nm.h_is_inverse ? Direction::Backward : Direction::Forward;
        res.certificates.gap = cert.gap;
        res.certificates.one_sided = true;
        res.certificates.neighbourhood_radius = co.neighbourhood_radius;
        res.branch = name;
        best = res;
    }
    if (!best) return none_found("crossing arc failed certification");
    best->certificates.constructed_gap = constructed_gap;
    return finish(*best);
}

void write_verdict(std::ostream& out, const Verdict& v) {
    out << std::setprecision(12);
    out << "[verdict]\n";
    out << "exit_code = " << v.exit_code << "\n";
    out << "message = " << v.message << "\n";
    if (!v.probe.empty()) out << "probe = " << v.probe << "\n";
    out << "[hypotheses]\n";
    out << "holds = " << (v.hypotheses.holds ? "true" : "false") << "\n";
    out << "summary = " << v.hypotheses.summary << "\n";
    out << "fixed_points = " << v.hypotheses.table.total() << "\n";
    for (const auto& f : v.hypotheses.failures) out << "failure = " << f << "\n";
    if (!v.result) return;
    const DichotomyResult& r = *v.result;
    out << "[result]\n";
    out << "alternative = " << to_string(r.alternative) << "\n";
    out << "branch = " << r.branch << "\n";
    out << "nielsen_class = " << r.nielsen_class_id << "\n";
    if (r.alternative == Alternative::NoneFound) return;
    if (r.alternative == Alternative::OnePrime) out << "side = " << to_string(r.side) << "\n";
    out << "direction = " << to_string(r.direction) << "\n";
    out << "vertices = " << r.witness.size() << "\n";
    out << "[certificates]\n";
    out << "gap = " << r.certificates.gap << "\n";
    out << "neighbourhood_radius = " << r.certificates.neighbourhood_radius << "\n";
    out << "one_sided = " << (r.certificates.one_sided ? "true" : "false") << "\n";
    if (r.alternative == Alternative::TwoPrime) out << "constructed_gap = " << r.certificates.constructed_gap << "\n";
    if (r.alternative == Alternative::OnePrime) {
        out << "area_deficit = " << r.certificates.area_deficit << "\n";
        out << "area_error = " << r.certificates.area_error << "\n";
        out << "samples = " << r.certificates.samples << "\n";
    }
}

void write_curve_csv(std::ostream& out, const PolyCurve& c) {
    out << "index,theta,r\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const StripPoint p = c.vertex(i);
        out << i << "," << p.x() - std::floor(p.x()) << "," << p.y() << "\n";
    }
}

}  // namespace annulus

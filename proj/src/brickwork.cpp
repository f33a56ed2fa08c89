#include "annulus/brickwork.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "annulus/errors.hpp"
#include "annulus/fixed_index.hpp"
#include "annulus/parallel.hpp"

namespace annulus {

double IntervalDecomposition::cut(long k) const {
    const long p = period_count();
    const long q = k >= 0 ? k / p : -((-k + p - 1) / p);
    return cut_points[static_cast<std::size_t>(k - q * p)] + static_cast<double>(q);
}

void BrickDecomposition::index() {
    bucket_ = grid_n > 0 ? 1.0 / grid_n : 0.0625;
    buckets_.clear();
    for (const Brick& b : bricks) {
        const long ix0 = static_cast<long>(std::floor(b.rect.x0 / bucket_));
        const long ix1 = static_cast<long>(std::floor(b.rect.x1 / bucket_));
        const long iy0 = static_cast<long>(std::floor((b.rect.y0 + 1) / bucket_));
        const long iy1 = static_cast<long>(std::floor((b.rect.y1 + 1) / bucket_));
        for (long ix = ix0; ix <= ix1; ++ix)
            for (long iy = iy0; iy <= iy1; ++iy) buckets_[key(ix, iy)].push_back(b.id);
    }
}

std::vector<BrickRef> BrickDecomposition::locate(const StripPoint& p) const {
    std::vector<BrickRef> out;
    const long base = static_cast<long>(std::floor(p.x()));
    for (long n = base - 2; n <= base + 1; ++n) {
        const StripPoint q = deck(p, -n);
        const auto it = buckets_.find(key(static_cast<long>(std::floor(q.x() / bucket_)),
                                          static_cast<long>(std::floor((q.y() + 1) / bucket_))));
        if (it == buckets_.end()) continue;
        for (int id : it->second)
            if (bricks[static_cast<std::size_t>(id)].rect.contains(q)) out.push_back({id, n});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<BrickRef> BrickDecomposition::overlapping(const Rect& r) const {
    std::set<BrickRef> found;
    const long lo = static_cast<long>(std::floor(r.x0)) - 2;
    const long hi = static_cast<long>(std::floor(r.x1)) + 1;
    for (long n = lo; n <= hi; ++n) {
        const Rect q = r.translated(-n);
        const long ix0 = static_cast<long>(std::floor(std::max(q.x0, -1.0) / bucket_));
        const long ix1 = static_cast<long>(std::floor(std::min(q.x1, 3.0) / bucket_));
        const long iy0 = static_cast<long>(std::floor((std::max(q.y0, -1.0) + 1) / bucket_));
        const long iy1 = static_cast<long>(std::floor((std::min(q.y1, 1.0) + 1) / bucket_));
        for (long ix = ix0; ix <= ix1; ++ix) {
            for (long iy = iy0; iy <= iy1; ++iy) {
                const auto it = buckets_.find(key(ix, iy));
                if (it == buckets_.end()) continue;
                for (int id : it->second)
                    if (bricks[static_cast<std::size_t>(id)].rect.intersects(q)) found.insert({id, n});
            }
        }
    }
    return {found.begin(), found.end()};
}

namespace {

double boundary_image(const LiftedMap& h, double t) { return h(StripPoint{t, -1.0}).x(); }

}  // namespace

bool boundary_interval_free(const LiftedMap& h, double a, double b) {
    constexpr double slack = 1e-12;
    return boundary_image(h, a) > b + slack && boundary_image(h, b) < a + 1.0 - slack;
}

IntervalDecomposition boundary_interval_decomposition(const LiftedMap& h) {
    constexpr int samples = 4096;
    double lo = 1e300, hi = -1e300;
    long sheet = 0;
    bool first = true;
    for (int i = 0; i <= samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        const double d = boundary_image(h, t) - t;
        const long k = static_cast<long>(std::floor(d));
        const double gap = std::min(d - std::floor(d), std::ceil(d) - d);
        if (gap < 1e-9 || (!first && k != sheet))
            throw BoundaryFixedPoint(h.label + ": lower boundary has a fixed point near theta = " + std::to_string(t));
        sheet = k;
        first = false;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    if (lo <= 0.0 || hi >= 1.0)
        throw NormalizationError(h.label + ": lower boundary displacement in [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "], expected inside (0, 1)");
    for (int n = 3; n <= 1 << 16; ++n) {
        IntervalDecomposition d;
        for (int k = 0; k < n; ++k) d.cut_points.push_back(static_cast<double>(k) / n);
        bool ok = true;
        for (int k = 0; k < n && ok; ++k) ok = boundary_interval_free(h, d.cut(k), d.cut(k + 1));
        if (ok) return d;
    }
    throw RefinementOverflow(h.label + ": no free equal interval decomposition of the lower boundary");
}

IntervalDecomposition maximal_merge(const IntervalDecomposition& d, const LiftedMap& h) {
    std::vector<double> cuts = d.cut_points;
    bool changed = true;
    while (changed && cuts.size() > 2) {
        changed = false;
        for (std::size_t k = 0; k < cuts.size() && cuts.size() > 2; ++k) {
            const std::size_t p = cuts.size();
            const double a = cuts[k];
            const double b = k + 2 < p ? cuts[k + 2] : cuts[k + 2 - p] + 1.0;
            // Freeness in the strip: translates of an interval are different intervals.
            if (!(boundary_image(h, a) > b + 1e-12)) continue;
            const std::size_t drop = (k + 1) % p;
            cuts.erase(cuts.begin() + static_cast<long>(drop));
            changed = true;
        }
    }
    return {cuts};
}

double certify_free(const LiftedMap& h, const Rect& b) {
    for (int k = 8; k <= 64; k *= 2) {
        double s = 1e300;
        for (int i = 0; i <= k && s > 0; ++i) {
            for (int j = 0; j <= k; ++j) {
                const StripPoint x{b.x0 + b.width() * i / k, b.y0 + b.height() * j / k};
                s = std::min(s, b.distance(h(x)));
                if (s <= 0) break;
            }
        }
        if (s <= 0) throw NotCertifiablyFree("image meets the brick");
        const double delta = std::max(b.width(), b.height()) / k;
        const double m = s - h.lipschitz_bound * delta * std::sqrt(2.0);
        if (m > 0) return m;
    }
    throw NotCertifiablyFree("margin not positive at the finest sampling");
}

namespace {

double try_certify(const LiftedMap& h, const Rect& r) {
    try {
        return certify_free(h, r);
    } catch (const NotCertifiablyFree&) {
        return 0.0;
    }
}

double distance_to_points(const Rect& r, const std::vector<StripPoint>& pts) {
    double best = 1e300;
    for (const auto& p : pts)
        for (long n = -1; n <= 1; ++n) best = std::min(best, r.distance(deck(p, n)));
    return best;
}

void fill_adjacency(BrickDecomposition& d) {
    constexpr double tol = 1e-12;
    for (Brick& b : d.bricks) {
        b.adjacency.clear();
        const Rect& r = b.rect;
        for (const BrickRef& o : d.overlapping(r)) {
            if (o.id == b.id && o.shift == 0) continue;
            const Rect q = d.rect(o);
            const double ox = std::min(r.x1, q.x1) - std::max(r.x0, q.x0);
            const double oy = std::min(r.y1, q.y1) - std::max(r.y0, q.y0);
            const bool vertical_touch = std::abs(ox) <= tol && oy > tol;
            const bool horizontal_touch = std::abs(oy) <= tol && ox > tol;
            if (vertical_touch || horizontal_touch) b.adjacency.emplace_back(o.id, o.shift);
        }
    }
}

std::vector<StripPoint> chain_witnesses(const LiftedMap& h, const IntervalDecomposition& cuts) {
    std::vector<StripPoint> out;
    for (long k = 0; k < cuts.period_count(); ++k) {
        const auto [a0, a1] = cuts.interval(k);
        const double a2 = cuts.cut(k + 2);
        const double lo = std::max(boundary_image(h, a0), a1);
        const double hi = std::min(boundary_image(h, a1), a2);
        if (lo > hi)
            throw CertificateFailure(h.label + ": chain property fails between lower rectangles " + std::to_string(k) +
                                     " and " + std::to_string(k + 1));
        StripPoint x = h.inverse(StripPoint{0.5 * (lo + hi), -1.0});
        x.y() = -1.0;
        x.x() = std::clamp(x.x(), a0, a1);
        out.push_back(x);
    }
    return out;
}

}  // namespace

BrickDecomposition build_brick_decomposition(const LiftedMap& h, const BrickOptions& opts,
                                             const std::vector<StripPoint>& fixed_points) {
    BrickDecomposition d;
    d.grid_n = std::max(1, opts.grid_n);
    d.exclusion_radius = opts.exclusion_radius > 0 ? opts.exclusion_radius : 0.5 / d.grid_n;
    for (const auto& p : fixed_points) d.excluded_points.push_back(lift_point(project(p), 0));
    d.boundary = maximal_merge(boundary_interval_decomposition(h), h);
    const int period = d.boundary.period_count();

    std::vector<double> collar_margins;
    for (int k = 1; k <= 24 && collar_margins.empty(); ++k) {
        const double eps = std::ldexp(1.0, -k);
        std::vector<double> m(static_cast<std::size_t>(period));
        for (int i = 0; i < period; ++i) {
            const auto [a, b] = d.boundary.interval(i);
            m[static_cast<std::size_t>(i)] = try_certify(h, {a, b, -1.0, -1.0 + eps});
        }
        if (std::all_of(m.begin(), m.end(), [](double v) { return v > 0; })) {
            d.epsilon = eps;
            collar_margins = m;
        }
    }
    if (collar_margins.empty()) throw RefinementOverflow(h.label + ": no dyadic collar height certifies free");

    for (int i = 0; i < period; ++i) {
        Brick b;
        b.id = i;
        const auto [a, c] = d.boundary.interval(i);
        b.rect = {a, c, -1.0, -1.0 + d.epsilon};
        b.collar = true;
        b.margin = collar_margins[static_cast<std::size_t>(i)];
        d.bricks.push_back(b);
        d.boundary_chain.push_back(i);
    }
    d.chain_witnesses = chain_witnesses(h, d.boundary);

    struct Cell {
        Rect rect;
        int depth;
    };
    const double side = 1.0 / d.grid_n;
    std::vector<Cell> level;
    for (int j = 0;; ++j) {
        const double y0 = -1.0 + d.epsilon + j * side;
        if (y0 >= 1.0) break;
        const double y1 = std::min(1.0, y0 + side);
        for (int i = 0; i < d.grid_n; ++i) level.push_back({{i * side, (i + 1) * side, y0, y1}, 0});
    }

    std::vector<Brick> leaves;
    while (!level.empty()) {
        std::vector<double> margin(level.size(), 0.0);
        std::vector<char> state(level.size(), 0);  // 0 split, 1 brick, 2 excluded
        parallel_for(level.size(), [&](std::size_t k) {
            const Rect& r = level[k].rect;
            const double dist = distance_to_points(r, d.excluded_points);
            if (dist <= d.exclusion_radius && std::max(r.width(), r.height()) <= d.exclusion_radius) {
                state[k] = 2;
                return;
            }
            if (dist == 0.0) return;
            margin[k] = try_certify(h, r);
            if (margin[k] > 0) state[k] = 1;
        });
        std::vector<Cell> next;
        for (std::size_t k = 0; k < level.size(); ++k) {
            const Cell& c = level[k];
            if (state[k] == 1) {
                Brick b;
                b.rect = c.rect;
                b.depth = c.depth;
                b.margin = margin[k];
                leaves.push_back(b);
            } else if (state[k] == 0) {
                if (c.depth + 1 > opts.max_depth)
                    throw RefinementOverflow(h.label + ": subdivision depth exceeds " + std::to_string(opts.max_depth) +
                                             " near (" + std::to_string(c.rect.centre().x()) + ", " +
                                             std::to_string(c.rect.centre().y()) + ")");
                const double xm = 0.5 * (c.rect.x0 + c.rect.x1), ym = 0.5 * (c.rect.y0 + c.rect.y1);
                next.push_back({{c.rect.x0, xm, c.rect.y0, ym}, c.depth + 1});
                next.push_back({{xm, c.rect.x1, c.rect.y0, ym}, c.depth + 1});
                next.push_back({{c.rect.x0, xm, ym, c.rect.y1}, c.depth + 1});
                next.push_back({{xm, c.rect.x1, ym, c.rect.y1}, c.depth + 1});
            }
        }
        level = std::move(next);
    }
    std::sort(leaves.begin(), leaves.end(), [](const Brick& a, const Brick& b) {
        if (a.rect.x0 != b.rect.x0) return a.rect.x0 < b.rect.x0;
        return a.rect.y0 < b.rect.y0;
    });
    for (Brick& b : leaves) {
        b.id = static_cast<int>(d.bricks.size());
        d.bricks.push_back(b);
    }
    d.index();
    fill_adjacency(d);
    return d;
}

BrickDecomposition build_brick_decomposition(const LiftedMap& h, int grid_n) {
    std::vector<StripPoint> fps;
    for (const auto& fp : find_fixed_points(h, FixedPointOptions{256, 1e-10, false, 3})) fps.push_back(fp.lifted());
    BrickOptions opts;
    opts.grid_n = grid_n;
    return build_brick_decomposition(h, opts, fps);
}

DecompositionCheck check_decomposition(const LiftedMap& h, const BrickDecomposition& d) {
    DecompositionCheck c;
    const int period = d.boundary.period_count();

    c.equivariant = period >= 2 && std::abs(d.boundary.cut(period) - d.boundary.cut(0) - 1.0) < 1e-12;
    for (const Brick& b : d.bricks)
        if (b.collar ? b.rect.x0 < 0 || b.rect.x0 >= 1 : b.rect.x0 < 0 || b.rect.x1 > 1) c.equivariant = false;

    c.margins_positive = true;
    std::vector<double> m(d.bricks.size());
    parallel_for(d.bricks.size(), [&](std::size_t i) { m[i] = try_certify(h, d.bricks[i].rect); });
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!(m[i] > 0) || !(d.bricks[i].margin > 0)) c.margins_positive = false;

    c.boundary_rectangles = static_cast<int>(d.boundary_chain.size()) == period;
    for (int i = 0; i < period && c.boundary_rectangles; ++i) {
        const Rect& r = d.bricks[static_cast<std::size_t>(d.boundary_chain[static_cast<std::size_t>(i)])].rect;
        const auto [a, b] = d.boundary.interval(i);
        c.boundary_rectangles = r.x0 == a && r.x1 == b && r.y0 == -1.0 && r.y1 == -1.0 + d.epsilon;
    }

    c.chain = c.boundary_rectangles && static_cast<int>(d.chain_witnesses.size()) == period;
    for (int i = 0; i < period && c.chain; ++i) {
        const StripPoint& x = d.chain_witnesses[static_cast<std::size_t>(i)];
        const BrickRef here{d.boundary_chain[static_cast<std::size_t>(i)], 0};
        const BrickRef next = i + 1 < period ? BrickRef{d.boundary_chain[static_cast<std::size_t>(i + 1)], 0}
                                             : BrickRef{d.boundary_chain[0], 1};
        c.chain = d.rect(here).contains(x) && d.rect(next).contains(h(x));
    }

    c.disjoint_interiors = true;
    for (const Brick& b : d.bricks) {
        for (const BrickRef& o : d.overlapping(b.rect)) {
            if (o.id == b.id && o.shift == 0) continue;
            const Rect q = d.rect(o);
            const double ox = std::min(b.rect.x1, q.x1) - std::max(b.rect.x0, q.x0);
            const double oy = std::min(b.rect.y1, q.y1) - std::max(b.rect.y0, q.y0);
            if (ox > 1e-12 && oy > 1e-12) c.disjoint_interiors = false;
        }
    }

    c.covers = true;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-2.0, 2.0), uy(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const StripPoint p{ux(rng), uy(rng)};
        bool near_fixed = false;
        for (const auto& z : d.excluded_points)
            if (annulus_distance(p, z) <= 3.0 * d.exclusion_radius) near_fixed = true;
        if (!near_fixed && d.locate(p).empty()) c.covers = false;
    }
    return c;
}

void write_decomposition(std::ostream& out, const BrickDecomposition& d) {
    out << std::setprecision(17);
    out << "grid_n = " << d.grid_n << "\n";
    out << "epsilon = " << d.epsilon << "\n";
    out << "exclusion_radius = " << d.exclusion_radius << "\n";
    out << "cuts =";
    for (double a : d.boundary.cut_points) out << " " << a;
    out << "\n";
    for (const auto& w : d.chain_witnesses) out << "witness = " << w.x() << " " << w.y() << "\n";
    for (const auto& z : d.excluded_points) out << "excluded = " << z.x() << " " << z.y() << "\n";
    out << "# id collar depth x0 x1 y0 y1 margin\n";
    for (const Brick& b : d.bricks)
        out << "brick = " << b.id << " " << (b.collar ? 1 : 0) << " " << b.depth << " " << b.rect.x0 << " "
            << b.rect.x1 << " " << b.rect.y0 << " " << b.rect.y1 << " " << b.margin << "\n";
}

BrickDecomposition read_decomposition(std::istream& in) {
    BrickDecomposition d;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("decomposition dump: malformed line '" + line + "'");
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(' ') + 1);
        std::istringstream vals(line.substr(eq + 1));
        if (key == "grid_n") {
            vals >> d.grid_n;
        } else if (key == "epsilon") {
            vals >> d.epsilon;
        } else if (key == "exclusion_radius") {
            vals >> d.exclusion_radius;
        } else if (key == "cuts") {
            for (double a; vals >> a;) d.boundary.cut_points.push_back(a);
        } else if (key == "witness" || key == "excluded") {
            double x = 0, y = 0;
            vals >> x >> y;
            (key == "witness" ? d.chain_witnesses : d.excluded_points).emplace_back(x, y);
        } else if (key == "brick") {
            Brick b;
            int collar = 0;
            vals >> b.id >> collar >> b.depth >> b.rect.x0 >> b.rect.x1 >> b.rect.y0 >> b.rect.y1 >> b.margin;
            b.collar = collar != 0;
            if (!vals) throw ConfigError("decomposition dump: bad brick line '" + line + "'");
            if (b.collar) d.boundary_chain.push_back(b.id);
            d.bricks.push_back(b);
        } else {
            throw ConfigError("decomposition dump: unknown key '" + key + "'");
        }
    }
    d.index();
    fill_adjacency(d);
    return d;
}

}  // namespace annulus

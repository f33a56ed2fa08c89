#include "annulus/fixed_index.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

#include "annulus/errors.hpp"
#include "annulus/parallel.hpp"

namespace annulus {

namespace {

constexpr double kPi = std::numbers::pi;

struct Candidate {
    StripPoint z;
    long shift;
    bool boundary;
    double residual;
};

// Levenberg-Marquardt on F(z) = H(z) - z - (n, 0), r kept in [-1, 1].
Candidate refine_interior(const LiftedMap& h, StripPoint z, long n, int iterations) {
    auto F = [&](const StripPoint& p) { return StripPoint(h(p) - p - StripPoint{static_cast<double>(n), 0.0}); };
    StripPoint f = F(z);
    double lambda = 1e-6;
    for (int it = 0; it < iterations && f.norm() > 1e-15; ++it) {
        const double step = 1e-7;
        Eigen::Matrix2d jac;
        jac.col(0) = (F(z + StripPoint{step, 0}) - F(z - StripPoint{step, 0})) / (2 * step);
        const double ylo = std::max(-1.0, z.y() - step), yhi = std::min(1.0, z.y() + step);
        jac.col(1) = (F({z.x(), yhi}) - F({z.x(), ylo})) / (yhi - ylo);
        const Eigen::Matrix2d jtj = jac.transpose() * jac;
        bool improved = false;
        for (int tries = 0; tries < 20; ++tries) {
            Eigen::Matrix2d a = jtj;
            a.diagonal().array() += lambda * std::max(1e-12, jtj.diagonal().maxCoeff());
            StripPoint trial = z - StripPoint(a.ldlt().solve(jac.transpose() * f));
            trial.y() = std::clamp(trial.y(), -1.0, 1.0);
            const StripPoint ft = F(trial);
            if (ft.norm() < f.norm()) {
                z = trial;
                f = ft;
                lambda = std::max(lambda / 10, 1e-12);
                improved = true;
                break;
            }
            lambda *= 10;
        }
        if (!improved) break;
    }
    return {z, n, false, f.norm()};
}

// Bisection on theta -> p1(H(theta, s)) - theta - n along a boundary circle.
Candidate refine_boundary(const LiftedMap& h, double lo, double hi, double s, long n) {
    auto g = [&](double t) { return h(StripPoint{t, s}).x() - t - static_cast<double>(n); };
    double glo = g(lo);
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm <= 0) == (glo <= 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    const double t = 0.5 * (lo + hi);
    const StripPoint z{t, s};
    return {z, n, true, (h(z) - z - StripPoint{static_cast<double>(n), 0.0}).norm()};
}

}  // namespace

std::vector<FixedPointRecord> find_fixed_points(const LiftedMap& h, const FixedPointOptions& opts) {
    const int gn = std::max(16, opts.grid_n);
    const long max_shift = static_cast<long>(std::ceil(h.displacement_bound));
    const double dx = 1.0 / gn, dy = 2.0 / gn;

    // Displacement field at the grid nodes.
    std::vector<StripPoint> field(static_cast<std::size_t>(gn + 1) * (gn + 1));
    parallel_for(static_cast<std::size_t>(gn + 1), [&](std::size_t j) {
        for (int i = 0; i <= gn; ++i) {
            const StripPoint z{i * dx, -1.0 + static_cast<double>(j) * dy};
            field[j * (gn + 1) + static_cast<std::size_t>(i)] = h(z) - z;
        }
    });
    auto node = [&](int i, int j) { return field[static_cast<std::size_t>(j) * (gn + 1) + i]; };

    std::vector<std::pair<StripPoint, long>> seeds;
    for (long n = -max_shift; n <= max_shift; ++n) {
        for (int j = 0; j < gn; ++j) {
            for (int i = 0; i < gn; ++i) {
                double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
                for (int c = 0; c < 4; ++c) {
                    const StripPoint v = node(i + c % 2, j + c / 2);
                    xmin = std::min(xmin, v.x() - n);
                    xmax = std::max(xmax, v.x() - n);
                    ymin = std::min(ymin, v.y());
                    ymax = std::max(ymax, v.y());
                }
                if (xmin <= 0 && xmax >= 0 && ymin <= 0 && ymax >= 0)
                    seeds.emplace_back(StripPoint{(i + 0.5) * dx, -1.0 + (j + 0.5) * dy}, n);
            }
        }
    }

    std::vector<Candidate> refined(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) { refined[k] = refine_interior(h, seeds[k].first, seeds[k].second, 60); });

    std::vector<Candidate> accepted;
    for (std::size_t k = 0; k < refined.size(); ++k) {
        const Candidate& c = refined[k];
        if (c.residual >= opts.tol) continue;
        if (std::abs(c.z.y()) >= 1.0) continue;  // boundary circles handled below
        if ((c.z - seeds[k].first).lpNorm<Eigen::Infinity>() > 2.0 * dy) continue;
        accepted.push_back(c);
    }

    // Boundary circles: sign changes of the 1-D displacement.
    const int bn = 4 * gn;
    for (double s : {-1.0, 1.0}) {
        for (long n = -max_shift; n <= max_shift; ++n) {
            auto g = [&](double t) { return h(StripPoint{t, s}).x() - t - static_cast<double>(n); };
            double prev = g(0.0);
            for (int i = 1; i <= bn; ++i) {
                const double t1 = static_cast<double>(i) / bn;
                const double cur = g(t1);
                if (prev == 0.0) {
                    const StripPoint z{static_cast<double>(i - 1) / bn, s};
                    accepted.push_back({z, n, true, 0.0});
                } else if ((prev < 0) != (cur < 0) && cur != 0.0) {
                    Candidate c = refine_boundary(h, static_cast<double>(i - 1) / bn, t1, s, n);
                    if (c.residual < opts.tol) accepted.push_back(c);
                }
                prev = cur;
            }
        }
    }

    // Normalise to sheet 0, deduplicate keeping the smaller residual.
    for (auto& c : accepted) {
        const double k = std::floor(c.z.x());
        c.z.x() -= k;
        if (c.z.x() >= 1.0) c.z.x() = 0.0;
    }
    std::sort(accepted.begin(), accepted.end(), [](const Candidate& a, const Candidate& b) {
        return a.residual < b.residual;
    });
    const double merge = std::max(2.0 * opts.tol, 1e-8);
    std::vector<Candidate> unique;
    for (const auto& c : accepted) {
        bool dup = false;
        for (const auto& u : unique)
            if (u.shift == c.shift && annulus_distance(u.z, c.z) < merge) dup = true;
        if (!dup) unique.push_back(c);
    }

    const double cluster_radius = 3.0 * dy;
    for (const auto& u : unique) {
        int near = 0;
        for (const auto& v : unique)
            if (&u != &v && annulus_distance(u.z, v.z) < cluster_radius) ++near;
        if (near >= opts.cluster_neighbours)
            throw NonIsolatedFixedSet(h.label + ": fixed points accumulate near (" + std::to_string(u.z.x()) + ", " +
                                      std::to_string(u.z.y()) + ")");
    }

    std::vector<FixedPointRecord> out;
    for (const auto& u : unique) {
        FixedPointRecord r;
        r.location = project(u.z);
        r.nielsen_shift = std::lround(h(u.z).x() - u.z.x());
        r.on_boundary = u.boundary;
        r.refinement_residual = u.residual;
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const FixedPointRecord& a, const FixedPointRecord& b) {
        if (a.location.theta_mod1 != b.location.theta_mod1) return a.location.theta_mod1 < b.location.theta_mod1;
        return a.location.r < b.location.r;
    });
    if (opts.compute_indices) {
        for (auto& r : out) {
            double rho = 1e-3;
            for (const auto& o : out)
                if (&o != &r) rho = std::min(rho, 0.4 * annulus_distance(o.lifted(), r.lifted()));
            if (!r.on_boundary) rho = std::min(rho, 0.5 * (1.0 - std::abs(r.location.r)));
            r.index = lefschetz_index(h, r, rho);
        }
    }
    return out;
}

namespace {

double vector_angle(const PlanePoint& a, const PlanePoint& b) {
    return std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
}

double segment_angle(const PlaneMap& f, const PlanePoint& a, const PlanePoint& b, const PlanePoint& va,
                     const PlanePoint& vb, int depth) {
    const double step = vector_angle(va, vb);
    if (std::abs(step) < kPi / 2 || depth > 40) return step;
    const PlanePoint m = 0.5 * (a + b);
    const PlanePoint vm = f(m) - m;
    if (vm.norm() < 1e-9) throw CurveHitsFixedPoint("displacement vanishes on the curve");
    return segment_angle(f, a, m, va, vm, depth + 1) + segment_angle(f, m, b, vm, vb, depth + 1);
}

}  // namespace

int curve_index(const PlaneMap& f, const PolyCurve& curve) {
    const Eigen::Index n = curve.size();
    std::vector<PlanePoint> v(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const PlanePoint p = curve.vertex(i);
        v[static_cast<std::size_t>(i)] = f(p) - p;
        if (v[static_cast<std::size_t>(i)].norm() < 1e-9) throw CurveHitsFixedPoint("displacement vanishes on the curve");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = (i + 1) % n;
        total += segment_angle(f, curve.vertex(i), curve.vertex(j), v[static_cast<std::size_t>(i)],
                               v[static_cast<std::size_t>(j)], 0);
    }
    return static_cast<int>(std::lround(total / (2 * kPi)));
}

PolyCurve circle_curve(const StripPoint& c, double rho, int vertices) {
    std::vector<StripPoint> pts;
    for (int k = 0; k < vertices; ++k) {
        const double a = 2 * kPi * k / vertices;
        pts.push_back(c + rho * StripPoint{std::cos(a), std::sin(a)});
    }
    return make_curve(pts, CurveKind::Jordan);
}

int lefschetz_index(const LiftedMap& h, const FixedPointRecord& fp, double rho) {
    const LiftedMap lift = deck_shift(h, -fp.nielsen_shift);
    const StripPoint z = fp.lifted();
    const PolyCurve circle = circle_curve(z, rho);
    if (!fp.on_boundary) return curve_index(plane_extension(lift), circle);
    // Reflect across the boundary line containing z and double the map.
    const double s = fp.location.r > 0 ? 1.0 : -1.0;
    PlaneMap doubled{[f = lift.forward, s](const PlanePoint& p) -> PlanePoint {
        const bool inside = s > 0 ? p.y() <= 1.0 : p.y() >= -1.0;
        if (inside) return f(StripPoint{p.x(), std::clamp(p.y(), -1.0, 1.0)});
        const PlanePoint q{p.x(), 2 * s - p.y()};
        const PlanePoint fq = f(StripPoint{q.x(), std::clamp(q.y(), -1.0, 1.0)});
        return {fq.x(), 2 * s - fq.y()};
    }};
    const int twice = curve_index(doubled, circle);
    if (twice % 2 != 0) throw IndexHalvingError("doubled index " + std::to_string(twice) + " is odd");
    return twice / 2;
}

std::size_t NielsenClassTable::total() const {
    std::size_t n = 0;
    for (const auto& [k, v] : classes) n += v.size();
    return n;
}

NielsenClassTable nielsen_partition(const LiftedMap& h, const std::vector<FixedPointRecord>& fps) {
    NielsenClassTable t;
    t.reference_lift = h;
    t.index_sums_asserted = h.preserves_area;
    for (const auto& fp : fps) {
        t.classes[fp.nielsen_shift].push_back(fp);
        t.index_sums[fp.nielsen_shift] += fp.index;
    }
    return t;
}

std::vector<std::pair<long, long>> consecutive_classes(const NielsenClassTable& t) {
    std::vector<std::pair<long, long>> out;
    for (const auto& [n, v] : t.classes) {
        auto next = t.classes.find(n + 1);
        if (!v.empty() && next != t.classes.end() && !next->second.empty()) out.emplace_back(n, n + 1);
    }
    return out;
}

void write_fixed_point_report(std::ostream& out, const NielsenClassTable& t) {
    out << "[fixed-points]\n";
    out << "map = " << t.reference_lift.label << "\n";
    out << "count = " << t.total() << "\n";
    out << "classes = " << t.classes.size() << "\n";
    const auto cons = consecutive_classes(t);
    out << "consecutive_pairs = " << cons.size() << "\n";
    std::size_t id = 0;
    out << std::setprecision(12);
    for (const auto& [n, v] : t.classes) {
        out << "\n[class " << n << "]\n";
        out << "size = " << v.size() << "\n";
        out << "index_sum = " << t.index_sums.at(n) << "\n";
        for (const auto& fp : v) {
            out << "point." << id++ << " = theta=" << fp.location.theta_mod1 << " r=" << fp.location.r
                << " shift=" << fp.nielsen_shift << " index=" << fp.index
                << " boundary=" << (fp.on_boundary ? 1 : 0) << " residual=" << fp.refinement_residual << "\n";
        }
    }
}

int fixed_point_exit_code(const NielsenClassTable& t) {
    if (t.total() == 0) return 0;
    return consecutive_classes(t).empty() ? 1 : 2;
}

}  // namespace annulus

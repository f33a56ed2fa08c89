#include "annulus/region.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace annulus {

namespace {

constexpr double kSnap = 1e-12;

std::vector<double> unique_sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || x - out.back() > kSnap) out.push_back(x);
    return out;
}

double reduce(double x, double base) { return x - std::floor(x - base + kSnap); }

// Index range [lo, hi) of intervals [g[k], g[k+1]] inside [a, b].
std::pair<int, int> cell_range(const std::vector<double>& g, double a, double b) {
    const int lo = static_cast<int>(std::lower_bound(g.begin(), g.end(), a - kSnap) - g.begin());
    const int hi = static_cast<int>(std::upper_bound(g.begin(), g.end(), b + kSnap) - g.begin()) - 1;
    return {lo, std::max(lo, hi)};
}

}  // namespace

bool RectComplex::at(int i, int j) const {
    if (j < 0 || j >= ny()) return false;
    if (periodic) {
        i %= nx();
        if (i < 0) i += nx();
    } else if (i < 0 || i >= nx()) {
        return false;
    }
    return cells[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx()) + static_cast<std::size_t>(i)] != 0;
}

void RectComplex::set(int i, int j, bool v) {
    cells[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx()) + static_cast<std::size_t>(i)] = v ? 1 : 0;
}

bool RectComplex::lookup(const StripPoint& p, int& i, int& j) const {
    double x = p.x();
    if (periodic) x = reduce(x, xs.front());
    if (x < xs.front() || x > xs.back() || p.y() < ys.front() || p.y() > ys.back()) return false;
    i = std::clamp(static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1, 0, nx() - 1);
    j = std::clamp(static_cast<int>(std::upper_bound(ys.begin(), ys.end(), p.y()) - ys.begin()) - 1, 0, ny() - 1);
    return true;
}

bool RectComplex::contains(const StripPoint& p) const {
    int i = 0, j = 0;
    return lookup(p, i, j) && at(i, j);
}

RectComplex rasterize(const std::vector<Rect>& rects, bool periodic, double x_lo, double x_hi) {
    RectComplex c;
    c.periodic = periodic;
    std::vector<double> xs, ys{-1.0, 1.0};
    if (periodic) {
        xs.push_back(0.0);
        for (const auto& r : rects) {
            xs.push_back(reduce(r.x0, 0.0));
            xs.push_back(reduce(r.x1, 0.0));
        }
        for (double& x : xs)
            if (x >= 1.0 - kSnap) x = 0.0;
        xs = unique_sorted(xs);
        xs.push_back(1.0);
    } else {
        xs = {x_lo, x_hi};
        for (const auto& r : rects) {
            xs.push_back(std::clamp(r.x0, x_lo, x_hi));
            xs.push_back(std::clamp(r.x1, x_lo, x_hi));
        }
        xs = unique_sorted(xs);
    }
    for (const auto& r : rects) {
        ys.push_back(r.y0);
        ys.push_back(r.y1);
    }
    c.ys = unique_sorted(ys);
    c.xs = std::move(xs);
    c.cells.assign(static_cast<std::size_t>(c.nx()) * static_cast<std::size_t>(c.ny()), 0);

    for (const auto& r : rects) {
        const auto [j0, j1] = cell_range(c.ys, r.y0, r.y1);
        auto mark = [&](double a, double b) {
            a = std::max(a, c.xs.front());
            b = std::min(b, c.xs.back());
            if (b - a <= kSnap) return;
            const auto [i0, i1] = cell_range(c.xs, a, b);
            for (int j = j0; j < j1; ++j)
                for (int i = i0; i < i1; ++i) c.set(i, j, true);
        };
        if (periodic) {
            if (r.width() >= 1.0 - kSnap) {
                mark(0.0, 1.0);
                continue;
            }
            const double a = reduce(r.x0, 0.0);
            mark(a, a + r.width());
            mark(a - 1.0, a + r.width() - 1.0);
        } else {
            mark(r.x0, r.x1);
        }
    }
    return c;
}

int fill_bounded_components(RectComplex& c) {
    const int nx = c.nx(), ny = c.ny();
    const std::size_t n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    std::vector<int> comp(n, -1);
    std::vector<long> offset(n, 0);
    auto id = [&](int i, int j) { return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i); };
    int filled = 0, label = 0;
    for (int j0 = 0; j0 < ny; ++j0) {
        for (int i0 = 0; i0 < nx; ++i0) {
            if (c.at(i0, j0) || comp[id(i0, j0)] >= 0) continue;
            std::vector<std::pair<int, int>> members;
            bool unbounded = false;
            std::deque<std::pair<int, int>> queue{{i0, j0}};
            comp[id(i0, j0)] = label;
            while (!queue.empty()) {
                const auto [i, j] = queue.front();
                queue.pop_front();
                members.emplace_back(i, j);
                const long off = offset[id(i, j)];
                const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int a = i + di[k];
                    const int b = j + dj[k];
                    if (b < 0 || b >= ny) continue;
                    long o = off;
                    if (a < 0 || a >= nx) {
                        if (!c.periodic) {
                            unbounded = true;
                            continue;
                        }
                        o += a < 0 ? -1 : 1;
                        a = (a + nx) % nx;
                    }
                    if (c.at(a, b)) continue;
                    const std::size_t q = id(a, b);
                    if (comp[q] < 0) {
                        comp[q] = label;
                        offset[q] = o;
                        queue.emplace_back(a, b);
                    } else if (offset[q] != o) {
                        unbounded = true;
                    }
                }
            }
            if (!unbounded) {
                for (const auto& [i, j] : members) c.set(i, j, true);
                filled += static_cast<int>(members.size());
            }
            ++label;
        }
    }
    return filled;
}

namespace {

struct FrontierEdge {
    int i0, j0, i1, j1;  // vertex indices; i1 may equal nx in periodic mode
    int di, dj;
};

}  // namespace

std::vector<PolyCurve> trace_frontier(const RectComplex& c) {
    const int nx = c.nx(), ny = c.ny();
    std::vector<FrontierEdge> edges;
    // Vertical edges at column line i between cells i-1 and i.
    const int i_begin = c.periodic ? 0 : 1, i_end = nx - 1;
    for (int i = i_begin; i <= i_end; ++i) {
        for (int j = 0; j < ny; ++j) {
            const bool left = c.at(i - 1, j), right = c.at(i, j);
            if (left == right) continue;
            if (right)
                edges.push_back({i, j, i, j + 1, 0, 1});
            else
                edges.push_back({i, j + 1, i, j, 0, -1});
        }
    }
    // Horizontal edges at row line j between cells j-1 and j.
    for (int j = 1; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const bool below = c.at(i, j - 1), above = c.at(i, j);
            if (below == above) continue;
            if (above)
                edges.push_back({i + 1, j, i, j, -1, 0});
            else
                edges.push_back({i, j, i + 1, j, 1, 0});
        }
    }

    const int vcols = c.periodic ? nx : nx + 1;
    auto vid = [&](int i, int j) {
        if (c.periodic) i = (i % nx + nx) % nx;
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(vcols) + static_cast<std::size_t>(i);
    };
    const std::size_t nv = static_cast<std::size_t>(vcols) * static_cast<std::size_t>(ny + 1);
    std::vector<std::vector<int>> out(nv);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        out[vid(edges[e].i0, edges[e].j0)].push_back(static_cast<int>(e));
    }
    // Successor of each edge: the only outgoing edge, or the left turn at a
    // vertex where two set cells meet diagonally.
    std::vector<int> succ(edges.size(), -1);
    std::vector<char> has_pred(edges.size(), 0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto& outs = out[vid(edges[e].i1, edges[e].j1)];
        if (outs.empty()) continue;
        int pick = outs.front();
        if (outs.size() > 1) {
            for (int o : outs) {
                const double turn = edges[e].di * edges[o].dj - edges[e].dj * edges[o].di;
                if (turn > 0) pick = o;
            }
        }
        succ[e] = pick;
        has_pred[static_cast<std::size_t>(pick)] = 1;
    }

    std::vector<char> used(edges.size(), 0);
    std::vector<PolyCurve> result;
    auto emit = [&](int start, bool closed) {
        std::vector<StripPoint> pts;
        const auto& first = edges[static_cast<std::size_t>(start)];
        pts.emplace_back(c.xs[static_cast<std::size_t>(first.i0)], c.ys[static_cast<std::size_t>(first.j0)]);
        int e = start;
        while (true) {
            used[static_cast<std::size_t>(e)] = 1;
            const auto& ed = edges[static_cast<std::size_t>(e)];
            const double dx = c.xs[static_cast<std::size_t>(ed.i1)] - c.xs[static_cast<std::size_t>(ed.i0)];
            pts.emplace_back(pts.back().x() + dx, c.ys[static_cast<std::size_t>(ed.j1)]);
            const int next = succ[static_cast<std::size_t>(e)];
            if (next < 0 || next == start || used[static_cast<std::size_t>(next)]) break;
            e = next;
        }
        // Drop vertices in the middle of straight runs.
        std::vector<StripPoint> simple;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            if (simple.size() >= 2) {
                const StripPoint a = simple[simple.size() - 2], b = simple.back();
                const double cr = (b - a).x() * (pts[k] - b).y() - (b - a).y() * (pts[k] - b).x();
                if (std::abs(cr) < kSnap && (b - a).dot(pts[k] - b) > 0) simple.pop_back();
            }
            simple.push_back(pts[k]);
        }
        PolyCurve curve;
        if (closed) {
            const double shift = simple.back().x() - simple.front().x();
            if (std::abs(shift) > 0.5) {
                curve = make_curve(simple, CurveKind::Line);
                curve.essential = true;
            } else {
                simple.pop_back();
                curve = make_curve(simple, CurveKind::Jordan);
            }
        } else {
            auto on_boundary = [](const StripPoint& p) { return std::abs(std::abs(p.y()) - 1.0) < kSnap; };
            const int ends = (on_boundary(simple.front()) ? 1 : 0) + (on_boundary(simple.back()) ? 1 : 0);
            curve = make_curve(simple, ends == 2 ? CurveKind::CrossingArc : ends == 1 ? CurveKind::HalfLine
                                                                                     : CurveKind::Line);
        }
        result.push_back(std::move(curve));
    };
    for (std::size_t e = 0; e < edges.size(); ++e)
        if (!has_pred[e] && !used[e]) emit(static_cast<int>(e), false);
    for (std::size_t e = 0; e < edges.size(); ++e)
        if (!used[e]) emit(static_cast<int>(e), true);
    return result;
}

std::vector<PolyCurve> fill_and_frontier(const BrickSet& s, const BrickDecomposition& d, bool saturate) {
    std::vector<Rect> rects;
    rects.reserve(s.members.size());
    for (const auto& m : s.members) rects.push_back(d.rect(m));
    RectComplex c = saturate ? rasterize(rects, true)
                             : rasterize(rects, false, -static_cast<double>(s.window),
                                         static_cast<double>(s.window) + 2.0);
    fill_bounded_components(c);
    return trace_frontier(c);
}

}  // namespace annulus

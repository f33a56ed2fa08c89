#include "annulus/flowgraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include "annulus/errors.hpp"
#include "annulus/parallel.hpp"

namespace annulus {

void BrickGraph::index() {
    const auto n = static_cast<std::size_t>(node_count);
    certified_out.assign(n, {});
    possible_out.assign(n, {});
    certified_in.assign(n, {});
    possible_in.assign(n, {});
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const BrickEdge& x = edges[e];
        possible_out[static_cast<std::size_t>(x.from)].push_back(e);
        possible_in[static_cast<std::size_t>(x.to)].push_back(e);
        if (x.certified) {
            certified_out[static_cast<std::size_t>(x.from)].push_back(e);
            certified_in[static_cast<std::size_t>(x.to)].push_back(e);
        }
    }
}

std::size_t BrickGraph::certified_count() const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [](const BrickEdge& e) { return e.certified; }));
}

bool BrickSet::contains(const BrickRef& b) const { return std::binary_search(members.begin(), members.end(), b); }

BrickGraph build_brick_graph(const LiftedMap& h, const BrickDecomposition& d) {
    constexpr int k = 8;
    const std::size_t n = d.bricks.size();
    std::vector<std::vector<BrickEdge>> per(n);
    parallel_for(n, [&](std::size_t i) {
        const Brick& b = d.bricks[i];
        const Rect& r = b.rect;
        std::vector<BrickEdge> certified;
        Rect box{1e300, -1e300, 1e300, -1e300};
        for (int a = 0; a <= k; ++a) {
            for (int c = 0; c <= k; ++c) {
                const StripPoint x{r.x0 + r.width() * a / k, r.y0 + r.height() * c / k};
                const StripPoint y = h(x);
                box = {std::min(box.x0, y.x()), std::max(box.x1, y.x()), std::min(box.y0, y.y()),
                       std::max(box.y1, y.y())};
                for (const BrickRef& t : d.locate(y)) {
                    if (t.id == b.id && t.shift == 0) continue;
                    certified.push_back({b.id, t.id, t.shift, true, x});
                }
            }
        }
        const double pad = h.lipschitz_bound * std::max(r.width(), r.height()) / k * std::sqrt(2.0);
        box = {box.x0 - pad, box.x1 + pad, std::max(-1.0, box.y0 - pad), std::min(1.0, box.y1 + pad)};
        std::vector<BrickEdge> all;
        for (const BrickRef& t : d.overlapping(box)) {
            if (t.id == b.id && t.shift == 0) continue;  // excluded by the freeness margin
            all.push_back({b.id, t.id, t.shift, false, StripPoint::Zero()});
        }
        for (const BrickEdge& e : certified) {
            auto it = std::find_if(all.begin(), all.end(),
                                   [&](const BrickEdge& f) { return f.to == e.to && f.shift == e.shift; });
            if (it == all.end()) {
                all.push_back(e);
            } else if (!it->certified) {
                *it = e;
            }
        }
        std::sort(all.begin(), all.end(), [](const BrickEdge& x, const BrickEdge& y) {
            return std::tie(x.to, x.shift) < std::tie(y.to, y.shift);
        });
        per[i] = std::move(all);
    });
    BrickGraph g;
    g.node_count = static_cast<int>(n);
    for (auto& v : per) g.edges.insert(g.edges.end(), v.begin(), v.end());
    g.index();
    return g;
}

namespace {

struct Window {
    int n;
    long w;
    std::size_t slot(const BrickRef& b) const {
        return static_cast<std::size_t>(b.shift + w) * static_cast<std::size_t>(n) + static_cast<std::size_t>(b.id);
    }
    BrickRef ref(std::size_t s) const {
        return {static_cast<int>(s % static_cast<std::size_t>(n)),
                static_cast<long>(s / static_cast<std::size_t>(n)) - w};
    }
    std::size_t size() const { return static_cast<std::size_t>(2 * w + 1) * static_cast<std::size_t>(n); }
    bool inside(long shift) const { return shift >= -w && shift <= w; }
};

// Breadth-first reach from `start` through at least one edge. parent[] holds
// the predecessor slot (or npos).
std::vector<char> reach(const BrickGraph& g, const Window& win, const BrickRef& start, bool certified_only,
                        bool reverse, std::vector<std::size_t>* parent = nullptr) {
    constexpr auto npos = static_cast<std::size_t>(-1);
    std::vector<char> seen(win.size(), 0);
    if (parent) parent->assign(win.size(), npos);
    std::deque<BrickRef> queue{start};
    const auto& lists = reverse ? (certified_only ? g.certified_in : g.possible_in)
                                : (certified_only ? g.certified_out : g.possible_out);
    while (!queue.empty()) {
        const BrickRef cur = queue.front();
        queue.pop_front();
        for (std::size_t e : lists[static_cast<std::size_t>(cur.id)]) {
            const BrickEdge& x = g.edges[e];
            const BrickRef next = reverse ? BrickRef{x.from, cur.shift - x.shift} : BrickRef{x.to, cur.shift + x.shift};
            if (!win.inside(next.shift)) continue;
            const std::size_t s = win.slot(next);
            if (seen[s]) continue;
            seen[s] = 1;
            if (parent) (*parent)[s] = win.slot(cur);
            queue.push_back(next);
        }
    }
    return seen;
}

struct Flags {
    bool bounded_left, bounded_right, meets_upper;
    bool operator==(const Flags&) const = default;
};

BrickSet reach_set(const BrickGraph& g, const BrickDecomposition& d, int b0, int window, bool reverse) {
    const Window win{g.node_count, window};
    const auto cert = reach(g, win, {b0, 0}, true, reverse);
    const auto poss = reach(g, win, {b0, 0}, false, reverse);
    BrickSet s;
    s.window = window;
    bool cert_left = false, cert_right = false, poss_left = false, poss_right = false;
    for (std::size_t i = 0; i < cert.size(); ++i) {
        const BrickRef b = win.ref(i);
        if (poss[i]) {
            poss_left |= b.shift == -window;
            poss_right |= b.shift == window;
        }
        if (!cert[i]) continue;
        s.members.push_back(b);
        cert_left |= b.shift == -window;
        cert_right |= b.shift == window;
        if (d.bricks[static_cast<std::size_t>(b.id)].rect.y1 >= 1.0) s.meets_upper_boundary = true;
    }
    std::sort(s.members.begin(), s.members.end());
    s.bounded_left = !poss_left;
    s.bounded_right = !poss_right;
    s.edge_sets_disagree = cert_left != poss_left || cert_right != poss_right;

    // Connectivity of the union through shared edges.
    std::vector<int> parent(s.members.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            auto& up = parent[static_cast<std::size_t>(x)];
            up = parent[static_cast<std::size_t>(up)];
            x = up;
        }
        return x;
    };
    for (std::size_t i = 0; i < s.members.size(); ++i) {
        const BrickRef& b = s.members[i];
        for (const auto& [id, shift] : d.bricks[static_cast<std::size_t>(b.id)].adjacency) {
            const BrickRef nb{id, b.shift + shift};
            const auto it = std::lower_bound(s.members.begin(), s.members.end(), nb);
            if (it == s.members.end() || !(*it == nb)) continue;
            const int a = find(static_cast<int>(i)), c = find(static_cast<int>(it - s.members.begin()));
            if (a != c) parent[static_cast<std::size_t>(a)] = c;
        }
    }
    std::set<int> roots;
    for (std::size_t i = 0; i < s.members.size(); ++i) roots.insert(find(static_cast<int>(i)));
    s.connected = roots.size() <= 1;
    return s;
}

Flags flags_of(const BrickSet& s) { return {s.bounded_left, s.bounded_right, s.meets_upper_boundary}; }

BrickSet stable_reach(const BrickGraph& g, const BrickDecomposition& d, int b0, int window, bool reverse) {
    BrickSet full = reach_set(g, d, b0, window, reverse);
    if (window >= 2) {
        const BrickSet half = reach_set(g, d, b0, window / 2, reverse);
        if (!(flags_of(full) == flags_of(half)))
            throw WindowTooSmall((reverse ? std::string("repeller") : std::string("attractor")) + " of brick " +
                                 std::to_string(b0) + " changes flags between windows " + std::to_string(window / 2) +
                                 " and " + std::to_string(window));
    }
    return full;
}

BrickSet auto_reach(const BrickGraph& g, const BrickDecomposition& d, int b0, int window, int max_window,
                    bool reverse) {
    for (int w = window;; w *= 2) {
        try {
            return stable_reach(g, d, b0, w, reverse);
        } catch (const WindowTooSmall&) {
            if (w * 2 > max_window) throw;
        }
    }
}

}  // namespace

BrickSet attractor(const BrickGraph& g, const BrickDecomposition& d, int b0, int window) {
    return stable_reach(g, d, b0, window, false);
}

BrickSet repeller(const BrickGraph& g, const BrickDecomposition& d, int b0, int window) {
    return stable_reach(g, d, b0, window, true);
}

BrickSet attractor_auto(const BrickGraph& g, const BrickDecomposition& d, int b0, int window, int max_window) {
    return auto_reach(g, d, b0, window, max_window, false);
}

BrickSet repeller_auto(const BrickGraph& g, const BrickDecomposition& d, int b0, int window, int max_window) {
    return auto_reach(g, d, b0, window, max_window, true);
}

bool spot_check_forward_invariance(const LiftedMap& h, const BrickDecomposition& d, const BrickSet& a,
                                   bool backward) {
    static constexpr double offsets[][2] = {{0.5, 0.5}, {0.21, 0.73}, {0.87, 0.13}, {0.37, 0.41}};
    for (const BrickRef& b : a.members) {
        if (std::abs(b.shift) > a.window / 2) continue;
        const Rect r = d.rect(b);
        for (const auto& o : offsets) {
            const StripPoint x{r.x0 + o[0] * r.width(), r.y0 + o[1] * r.height()};
            const StripPoint y = backward ? h.inverse(x) : h(x);
            const auto hits = d.locate(y);
            if (hits.empty()) continue;
            if (std::none_of(hits.begin(), hits.end(), [&](const BrickRef& t) { return a.contains(t); })) return false;
        }
    }
    return true;
}

P1Report check_p1(const BrickGraph& g, int b0, int window) {
    constexpr auto npos = static_cast<std::size_t>(-1);
    const Window win{g.node_count, window};
    const BrickRef seed{b0, 0};
    std::vector<std::size_t> fwd_parent, bwd_parent;
    const auto fwd = reach(g, win, seed, true, false, &fwd_parent);
    const auto bwd = reach(g, win, seed, true, true, &bwd_parent);
    P1Report rep;
    rep.seed = seed;
    const std::size_t s0 = win.slot(seed);
    rep.seed_in_attractor = fwd[s0];
    rep.seed_in_repeller = bwd[s0];
    for (std::size_t i = 0; i < fwd.size(); ++i)
        if (fwd[i] && bwd[i]) rep.shared.push_back(win.ref(i));

    if (!rep.pass()) {
        // seed -> ... -> c along forward parents, then c -> ... -> seed along
        // the reverse search parents.
        const std::size_t c = rep.seed_in_attractor ? s0 : win.slot(rep.shared.front());
        std::vector<BrickRef> head;
        for (std::size_t s = c;;) {
            head.push_back(win.ref(s));
            s = fwd_parent[s];
            if (s == npos || s == s0) break;
        }
        head.push_back(seed);
        std::reverse(head.begin(), head.end());
        rep.cycle = head;
        if (c != s0) {
            for (std::size_t s = bwd_parent[c]; s != npos && s != s0; s = bwd_parent[s]) rep.cycle.push_back(win.ref(s));
            rep.cycle.push_back(seed);
        }
    }
    return rep;
}

std::string to_string(ProbeCase c) {
    switch (c) {
        case ProbeCase::P2Left: return "P2-left";
        case ProbeCase::P2Right: return "P2-right";
        case ProbeCase::P3: return "P3";
        case ProbeCase::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

ProbeCase boundedness_probe(const BrickSet& a, const BrickSet& r) {
    if (a.bounded_right || r.bounded_left) return ProbeCase::Inconclusive;
    if (!a.meets_upper_boundary) return ProbeCase::P2Right;
    if (!r.meets_upper_boundary) return ProbeCase::P2Left;
    if (a.bounded_left) return ProbeCase::P3;
    return ProbeCase::Inconclusive;
}

ProbeCase boundedness_probe(const BrickSet& a) {
    if (a.bounded_left && a.bounded_right) return ProbeCase::Inconclusive;
    if (!a.bounded_left) return ProbeCase::P2Left;
    if (!a.meets_upper_boundary) return ProbeCase::P2Right;
    return ProbeCase::P3;
}

void write_graph(std::ostream& out, const BrickGraph& g) {
    out << "nodes = " << g.node_count << "\n";
    out << "edges = " << g.edges.size() << "\n";
    out << "certified = " << g.certified_count() << "\n";
    out << "# from to shift tag\n";
    for (const BrickEdge& e : g.edges)
        out << "edge = " << e.from << " " << e.to << " " << e.shift << " " << (e.certified ? "certified" : "possible")
            << "\n";
}

void write_brick_set(std::ostream& out, const BrickSet& s) {
    out << "window = " << s.window << "\n";
    out << "size = " << s.members.size() << "\n";
    out << "bounded_left = " << s.bounded_left << "\n";
    out << "bounded_right = " << s.bounded_right << "\n";
    out << "meets_upper_boundary = " << s.meets_upper_boundary << "\n";
    out << "connected = " << s.connected << "\n";
    out << "edge_sets_disagree = " << s.edge_sets_disagree << "\n";
    out << "members =";
    for (const BrickRef& b : s.members) out << " " << b.id << ":" << b.shift;
    out << "\n";
}

}  // namespace annulus

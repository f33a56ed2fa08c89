#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "annulus/brickwork.hpp"

namespace annulus {

/// Edge B_from -> tau^shift(B_to) of the quotient graph.
struct BrickEdge {
    int from = 0;
    int to = 0;
    long shift = 0;
    bool certified = false;
    /// Point of B_from whose image lies in the target (certified edges only).
    StripPoint witness = StripPoint::Zero();
};

struct BrickGraph {
    int node_count = 0;
    /// Sorted by (from, to, shift); a certified edge is also a possible edge.
    std::vector<BrickEdge> edges;
    /// Outgoing edge indices per node, certified edges and all edges.
    std::vector<std::vector<std::size_t>> certified_out, possible_out;
    std::vector<std::vector<std::size_t>> certified_in, possible_in;

    void index();
    std::size_t certified_count() const;
};

struct BrickSet {
    std::vector<BrickRef> members;
    int window = 16;
    bool bounded_left = true;
    bool bounded_right = true;
    bool meets_upper_boundary = false;
    bool connected = true;
    /// The certified and possible reach disagree on a boundedness flag.
    bool edge_sets_disagree = false;
    /// Sampled images of member points land in members.
    bool forward_invariant_samples = true;

    bool contains(const BrickRef& b) const;
};

/// Certified edges from sampled images, possible edges from Lipschitz-inflated
/// image boxes.
BrickGraph build_brick_graph(const LiftedMap& h, const BrickDecomposition& d);

/// Bricks reachable from tau^0(b0) by at least one certified edge, over shifts
/// in [-window, window]. Throws WindowTooSmall when the flags at window / 2
/// differ.
BrickSet attractor(const BrickGraph& g, const BrickDecomposition& d, int b0, int window = 16);
/// Same on the reversed graph.
BrickSet repeller(const BrickGraph& g, const BrickDecomposition& d, int b0, int window = 16);
/// Retries with doubled windows up to max_window.
BrickSet attractor_auto(const BrickGraph& g, const BrickDecomposition& d, int b0, int window = 16,
                        int max_window = 128);
BrickSet repeller_auto(const BrickGraph& g, const BrickDecomposition& d, int b0, int window = 16,
                       int max_window = 128);

/// Spot check of H(A) inside A on points of member bricks.
bool spot_check_forward_invariance(const LiftedMap& h, const BrickDecomposition& d, const BrickSet& a,
                                   bool backward = false);

struct P1Report {
    BrickRef seed;
    bool seed_in_attractor = false;
    bool seed_in_repeller = false;
    std::vector<BrickRef> shared;
    /// Closed chain of bricks through the seed when a violation was found.
    std::vector<BrickRef> cycle;
    bool pass() const { return !seed_in_attractor && !seed_in_repeller && shared.empty(); }
};

P1Report check_p1(const BrickGraph& g, int b0, int window = 16);

enum class ProbeCase { P2Left, P2Right, P3, Inconclusive };
std::string to_string(ProbeCase c);

/// Branch selection from the attractor and repeller of a lower boundary brick.
ProbeCase boundedness_probe(const BrickSet& a, const BrickSet& r);
/// Branch selection from the attractor alone.
ProbeCase boundedness_probe(const BrickSet& a);

void write_graph(std::ostream& out, const BrickGraph& g);
void write_brick_set(std::ostream& out, const BrickSet& s);

}  // namespace annulus

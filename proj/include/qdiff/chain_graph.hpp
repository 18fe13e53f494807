#pragma once

#include <array>
#include <utility>
#include <vector>

#include "qdiff/lattice.hpp"

namespace qdiff {

/// Two rooted directed cycles. Chain 0 has n[0] + n[1] edges, chain 1 has
/// n[2] + n[3]; the path root -> summit of chain k has n[2k] edges.
///
/// Vertices are numbered chain 0 first, each chain in cyclic order from its
/// root. Edge e runs from vertex e to next(e), so tail(e) == e.
class ChainGraph {
public:
    ChainGraph() = default;
    static ChainGraph make(int n11, int n12, int n21, int n22);
    static ChainGraph make(const std::array<int, 4>& n) { return make(n[0], n[1], n[2], n[3]); }

    const std::array<int, 4>& lengths() const { return n_; }
    int vertex_count() const { return len_[0] + len_[1]; }
    int edge_count() const { return vertex_count(); }
    int chain_length(int k) const { return len_[k]; }
    int offset(int k) const { return k == 0 ? 0 : len_[0]; }
    int chain_of(int v) const { return v < len_[0] ? 0 : 1; }

    int next(int v) const;
    int prev(int v) const;
    int tail(int e) const { return e; }
    int head(int e) const { return next(e); }

    int root(int k) const { return offset(k); }
    int summit(int k) const { return offset(k) + (len_[k] == 0 ? 0 : n_[2 * k] % len_[k]); }
    bool is_white(int v) const;

    /// 0: root -> summit of chain 0, 1: summit -> root of chain 0, 2 and 3 likewise for chain 1.
    int segment_of(int e) const;

    bool operator==(const ChainGraph& o) const { return n_ == o.n_; }

private:
    std::array<int, 4> n_{};
    std::array<int, 2> len_{};
};

/// Site index per vertex.
using Labeling = std::vector<Index>;

/// Partition of the edges, stored as a restricted growth string: block[e] is
/// the block of edge e, and blocks are numbered in order of first appearance.
struct Lumping {
    std::vector<int> block;
    int blocks = 0;

    static Lumping from_blocks(const std::vector<int>& raw);

    std::vector<int> sizes() const;
    bool even() const;
    /// Some block holds edges of both chains.
    bool connected(const ChainGraph& g) const;

    auto operator<=>(const Lumping&) const = default;
};

/// e ~ e' iff {x_a(e), x_b(e)} = {x_a(e'), x_b(e')}.
Lumping lumping_of_labels(const ChainGraph& g, const Labeling& x);

/// Roots at the origin, summit k at y_k, and x_prev(i) != x_next(i) at every black vertex.
bool q_indicator(const ChainGraph& g, const Labeling& x, Index y1, Index y2);

/// Perfect matching of the edges; partner[e] is the edge paired with e.
struct Pairing {
    std::vector<int> partner;

    int size() const { return static_cast<int>(partner.size() / 2); }
    /// Bridges {e, f} with e < f, sorted by e.
    std::vector<std::pair<int, int>> bridges() const;
    /// Index into bridges() of the bridge containing edge e.
    std::vector<int> bridge_of_edge() const;
    Lumping as_lumping() const;

    auto operator<=>(const Pairing&) const = default;
};

Pairing pairing_from_bridges(int edge_count, const std::vector<std::pair<int, int>>& bridges);

/// Some bridge joins the two chains.
bool is_connected(const ChainGraph& g, const Pairing& p);

/// No bridge pairs two edges that meet at a black vertex. Such pairings carry
/// zero value: the shared black vertex sees equal labels on both sides.
bool is_admissible(const ChainGraph& g, const Pairing& p);

/// Bridges {e1, e1'} and {e2, e2'} are parallel when e2 follows e1, e2'
/// precedes e1', and the vertices b(e1) and a(e1') are black.
bool has_parallel_bridges(const ChainGraph& g, const Pairing& p);

enum class PairingFilter { All, Connected };

/// All perfect matchings of E (connected ones only by default). Empty for odd |E|.
/// Refuses |E| > 12.
std::vector<Pairing> enumerate_pairings(const ChainGraph& g, PairingFilter filter = PairingFilter::Connected);

/// x_a(e) = x_b(f) and x_a(f) = x_b(e).
bool j_indicator(const ChainGraph& g, int e, int f, const Labeling& x);

}  // namespace qdiff

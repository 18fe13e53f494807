#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "qdiff/chain_graph.hpp"
#include "qdiff/lattice.hpp"

namespace qdiff {

/// Admissible connected pairing with no parallel bridges.
struct Skeleton {
    ChainGraph graph;
    Pairing pairing;

    int size() const { return pairing.size(); }
    bool operator==(const Skeleton&) const = default;
};

struct CollapsedPairing {
    Skeleton skeleton;
    std::vector<int> multiplicity;  // per bridge of skeleton.pairing.bridges()
};

/// Contracts every maximal run of parallel bridges to one bridge whose
/// multiplicity is the run length. Throws ConfigError unless p is connected
/// and admissible.
CollapsedPairing collapse_parallel_bridges(const ChainGraph& g, const Pairing& p);

struct ExpandedPairing {
    ChainGraph graph;
    Pairing pairing;
};

/// Replaces bridge sigma by a ladder of l_sigma anti-parallel bridges;
/// multiplicities are indexed like skeleton.pairing.bridges().
ExpandedPairing expand_skeleton(const Skeleton& s, const std::vector<int>& multiplicity);

/// Every skeleton with m bridges, ordered by chain tuple and then by matching.
/// Refuses m > 5.
std::vector<Skeleton> enumerate_skeletons(int m);

/// Orbits of tau(i) = b(partner(edge out of i)).
struct OrbitPartition {
    std::vector<int> orbit_of;    // per vertex
    int orbit_count = 0;
    int root_orbit[2] = {0, 0};
    int summit_orbit[2] = {0, 0};
    int free_orbits = 0;          // orbits containing neither root
    std::vector<int> zeta1;       // per bridge {e < f}: orbit of a(e)
    std::vector<int> zeta2;       // per bridge: orbit of b(e)

    std::vector<int> sizes() const;
};

OrbitPartition orbit_partition(const ChainGraph& g, const Pairing& p);
inline OrbitPartition orbit_partition(const Skeleton& s) { return orbit_partition(s.graph, s.pairing); }

/// floor(2m/3 + 2/3), the largest orbit count allowed for m bridges.
int orbit_bound(int m);

/// sum over orbit labels (root orbits at the origin) of
/// prod_sigma (S^{l_sigma})_{z(zeta1), z(zeta2)}. Refuses more than 1e8 labelings.
double r_value(const BandProfile& profile, const Skeleton& s, const std::vector<int>& multiplicity);

/// sum_x [roots at 0, summits at y if given, non-backtracking if asked]
///       * prod_bridges S_{x_e} J(x), as an exact count times (M-1)^{-|Pi|}.
struct PairingValueOptions {
    std::optional<Index> y1;
    std::optional<Index> y2;
    bool non_backtracking = true;
};

struct PairingValue {
    std::int64_t count = 0;
    int power = 0;
    double value(int band_count) const;
};

PairingValue pairing_value(const BandProfile& profile, const ChainGraph& g, const Pairing& p,
                           const PairingValueOptions& opts = {});

/// Chain swap and orientation reversal, the symmetries of the covariance.
ExpandedPairing swap_chains(const ChainGraph& g, const Pairing& p);
ExpandedPairing reverse_chains(const ChainGraph& g, const Pairing& p);

}  // namespace qdiff

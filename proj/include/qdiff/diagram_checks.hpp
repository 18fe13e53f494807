#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdiff/covariance.hpp"
#include "qdiff/skeleton.hpp"

namespace qdiff {

/// |<P(t,y1); P(t,y2)>| truncated at total order max_order against the sum
/// over connected pairings of |a a a a| sum_x Q prod S J at the same orders.
struct PairingBoundReport {
    double t = 0.0;
    Index y1 = 0;
    Index y2 = 0;
    int max_order = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    /// sum over omitted orders of prod 3 t^{n_ij} / n_ij!
    double coefficient_tail = 0.0;
    int tuples = 0;
    int termwise_violations = 0;  // tuples with |covariance| > pairing sum
    bool pass = false;
};

PairingBoundReport pairing_bound_check(const BandProfile& profile, Index y1, Index y2, double t,
                                       int max_order = 8);

/// sum over l >= 1 with |l| <= floor(M^mu) of |a_{n11} a_{n12} a_{n21} a_{n22}|,
/// n_ij the number of expanded edges in segment ij.
struct CutoffSum {
    double value = 0.0;
    int cutoff = 0;
    std::int64_t terms = 0;
    double shape = 0.0;  // M^{mu(|Sigma| - 2)} / (|Sigma| - 3)!
};

CutoffSum coeff_sum_cutoff(const Skeleton& s, double t, int band_count, double mu);

/// Per-m statistics over enumerate_skeletons(m).
struct SkeletonCensus {
    int m = 0;
    std::int64_t count = 0;
    std::int64_t count_bound = 0;       // 2^m m!
    std::int64_t max_per_graph = 0;     // most skeletons on a single chain tuple
    int max_free_orbits = 0;
    int orbit_bound = 0;                // floor(2m/3 + 2/3)
    std::int64_t two_thirds_violations = 0;
    std::int64_t adjacency_violations = 0;
    /// Connected parallel-free pairings excluded for pairing two edges at a black vertex.
    std::int64_t excluded_nonadmissible = 0;
};

SkeletonCensus skeleton_census(int m);

/// Adjacency of paired edges: if a bridge's edges share a vertex, that vertex is white.
bool adjacency_ok(const Skeleton& s);

struct BijectionReport {
    int max_edges = 0;
    std::int64_t pairings_checked = 0;
    std::int64_t pairing_failures = 0;   // expand(collapse(P)) != P or collapse(P) not a skeleton
    std::int64_t expansions_checked = 0;
    std::int64_t expansion_failures = 0; // collapse(expand(S, l)) != (S, l)
    bool pass() const { return pairing_failures == 0 && expansion_failures == 0; }
};

/// Exhaustive over connected admissible pairings with |E| <= max_edges and
/// over (Sigma, l) with 2|l| <= max_edges.
BijectionReport check_collapse_bijection(int max_edges);

struct DegenerateClass {
    std::vector<int> members;  // indices into enumerate_skeletons(2)
    bool contributes = false;  // some expansion has a nonzero pairing value
    bool forces_equal = true;  // every nonzero (y1, y2) has y1 == y2
    bool summits_share_orbit = false;
    int witness_l1 = 0, witness_l2 = 0;
    Index witness_y1 = 0, witness_y2 = 0;
};

struct DegenerateCaseReport {
    double empty_chain_covariance = 0.0;   // |Sigma| = 0: < delta_{0y1} ; delta_{0y2} >
    double diagonal_covariance = 0.0;      // < H_00 ; H_00 >
    int single_bridge_skeletons = 0;
    bool single_bridge_zero = false;       // every |Sigma| = 1 skeleton, l = 1, all (y1, y2)
    int single_bridge_nonzero_expansions = 0;  // (skeleton, l >= 2) with nonzero value, for information
    int two_bridge_skeletons = 0;
    std::vector<DegenerateClass> classes;  // |Sigma| = 2 up to chain swap and reversal
    int contributing_classes = 0;
    int crossing_classes = 0;              // both bridges join the two chains
    bool pass_zero_one() const { return empty_chain_covariance == 0.0 && diagonal_covariance == 0.0 && single_bridge_zero; }
    bool pass_two() const;
};

/// Multiplicities up to max_multiplicity are scanned for the |Sigma| = 2 classes.
DegenerateCaseReport degenerate_case_analysis(const BandProfile& profile, int max_multiplicity = 3);

}  // namespace qdiff

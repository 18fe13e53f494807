#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdiff/chain_graph.hpp"
#include "qdiff/lattice.hpp"

namespace qdiff {

/// Integer polynomial sum_k c_k q^k in q = 1/(M-1). Exact bookkeeping for
/// sums of edge-product expectations, each of which is 0 or a power of q.
class WeightPolynomial {
public:
    void add(int power, std::int64_t c);
    WeightPolynomial& operator+=(const WeightPolynomial& o);
    WeightPolynomial& operator-=(const WeightPolynomial& o);

    bool is_zero() const;
    int degree() const { return static_cast<int>(coeff_.size()) - 1; }
    std::int64_t coeff(int power) const;
    double value(int band_count) const;
    std::string to_string() const;

    bool operator==(const WeightPolynomial& o) const;

private:
    void trim();
    std::vector<std::int64_t> coeff_;
};

using DirectedPair = std::pair<Index, Index>;

/// E prod H_{u v} over the multiset as a power of 1/(M-1), or nullopt when it
/// vanishes. Pairs are grouped by their unordered support; each group needs as
/// many (u, v) as (v, u) copies and u, v in band.
std::optional<int> edge_product_exponent(const BandProfile& profile, std::vector<DirectedPair> edges);

double edge_product_expectation(const BandProfile& profile, const std::vector<DirectedPair>& edges);

/// sum_x Q_{y1 y2}(x) A(x) with A = E prod_E H - E prod_{E_1} H * E prod_{E_2} H,
/// by direct enumeration of the free labels.
/// Equals < H^{(n11)}_{0 y1} H^{(n12)}_{y1 0} ; H^{(n21)}_{0 y2} H^{(n22)}_{y2 0} >.
/// Refuses more than 1e7 labelings.
struct CovarianceValue {
    WeightPolynomial exact;
    double value = 0.0;
};

CovarianceValue covariance_bruteforce(const BandProfile& profile, const ChainGraph& g, Index y1, Index y2);

/// The same for every (y1, y2) at once; entry y1 * N^d + y2.
std::vector<WeightPolynomial> covariance_table_bruteforce(const BandProfile& profile, const ChainGraph& g);

/// Labelings bucketed by their lumping, each evaluated lump by lump.
struct LumpingDecomposition {
    WeightPolynomial connected_even;     // sum of V(Gamma) over connected even lumpings
    WeightPolynomial disconnected_even;  // over even lumpings with no lump meeting both chains
    WeightPolynomial odd;                // over lumpings with an odd lump
    std::int64_t partitions = 0;         // set partitions of E enumerated
    std::int64_t connected_even_partitions = 0;
    std::int64_t realized_connected_even = 0;  // of those, with some labeling inducing them

    double value(int band_count) const { return connected_even.value(band_count); }
};

/// Refuses |E| > 10 or more than 1e7 labelings.
LumpingDecomposition covariance_via_lumpings(const BandProfile& profile, const ChainGraph& g, Index y1, Index y2);

std::vector<LumpingDecomposition> covariance_table_via_lumpings(const BandProfile& profile, const ChainGraph& g);

/// Calls f(partition) for every set partition of {0..n-1} as a restricted growth string.
void for_each_set_partition(int n, const std::function<void(const Lumping&)>& f);

struct CovarianceEstimate {
    double re = 0.0;
    double im = 0.0;
    double se_re = 0.0;
    double se_im = 0.0;
    std::int64_t samples = 0;
};

/// Sample covariance of H^{(n11)}_{0 y1} H^{(n12)}_{y1 0} and its chain-2 partner
/// over independent draws of H (replica r uses SeedSpec{seed, r}).
CovarianceEstimate covariance_monte_carlo(const LatticeConfig& cfg, const ChainGraph& g, Index y1, Index y2,
                                          std::int64_t samples, std::uint64_t seed);

}  // namespace qdiff

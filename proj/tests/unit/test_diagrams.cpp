#include <cmath>
#include <functional>

#include "doctest.h"

#include "qdiff/covariance.hpp"
#include "qdiff/diagram_checks.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/skeleton.hpp"

using namespace qdiff;

namespace {

std::int64_t double_factorial_odd(int k) {  // (2k-1)!!
    std::int64_t r = 1;
    for (int i = 1; i <= 2 * k - 1; i += 2) r *= i;
    return r;
}

// sum over all labels (roots at 0) of prod_bridges S_{x_a(e) x_b(e)} J_{e f}(x),
// by plain enumeration of every vertex label.
double naive_bridge_sum(const BandProfile& prof, const ChainGraph& g, const Pairing& p) {
    const int V = g.vertex_count();
    const Index L = prof.volume();
    Labeling x(V, 0);
    double total = 0.0;
    std::function<void(int)> rec = [&](int v) {
        if (v == V) {
            double prod = 1.0;
            for (auto [e, f] : p.bridges()) {
                if (!j_indicator(g, e, f, x)) return;
                prod *= prof.entry(x[g.tail(e)], x[g.head(e)]);
            }
            total += prod;
            return;
        }
        if (v == g.root(0) || v == g.root(1)) {
            x[v] = 0;
            rec(v + 1);
            return;
        }
        for (Index s = 0; s < L; ++s) {
            x[v] = s;
            rec(v + 1);
        }
    };
    rec(0);
    return total;
}

}  // namespace

TEST_CASE("chain graph shapes") {
    const ChainGraph a = ChainGraph::make(1, 1, 1, 1);
    CHECK(a.vertex_count() == 4);
    CHECK(a.edge_count() == 4);
    for (int v = 0; v < 4; ++v) CHECK(a.is_white(v));
    const ChainGraph b = ChainGraph::make(2, 0, 1, 1);
    CHECK(b.root(0) == b.summit(0));
    const ChainGraph c = ChainGraph::make(2, 2, 1, 1);
    int black = 0;
    for (int v = 0; v < c.chain_length(0); ++v) black += !c.is_white(v);
    CHECK(black == 2);
    CHECK(c.summit(0) == 2);
    CHECK(c.head(3) == 0);
    CHECK(c.prev(0) == 3);
    CHECK_THROWS_AS(ChainGraph::make(0, 0, 1, 1), ConfigError);
    CHECK_THROWS_AS(ChainGraph::make(-1, 2, 1, 1), ConfigError);
}

TEST_CASE("lumpings of labels") {
    const ChainGraph g = ChainGraph::make(1, 1, 1, 1);
    const Lumping l = lumping_of_labels(g, {0, 3, 0, 4});
    CHECK(l.blocks == 2);
    CHECK(l.sizes() == std::vector<int>{2, 2});
    const ChainGraph h = ChainGraph::make(2, 2, 1, 1);
    CHECK(lumping_of_labels(h, {0, 1, 2, 3, 0, 5}).blocks == 5);
    const Lumping alt = lumping_of_labels(h, {0, 7, 0, 7, 0, 9});
    CHECK(alt.block[0] == alt.block[1]);
    CHECK(alt.block[0] == alt.block[3]);
    CHECK(alt.sizes()[0] == 4);
    CHECK(alt.connected(h) == false);
}

TEST_CASE("Q indicator") {
    const ChainGraph g = ChainGraph::make(1, 1, 1, 1);
    CHECK(q_indicator(g, {0, 2, 0, 3}, 2, 3));
    CHECK_FALSE(q_indicator(g, {1, 2, 0, 3}, 2, 3));
    CHECK_FALSE(q_indicator(g, {0, 2, 0, 3}, 2, 4));
    const ChainGraph h = ChainGraph::make(2, 1, 1, 1);
    // vertex 1 is black; its neighbours carry labels 0 and 0
    CHECK_FALSE(q_indicator(h, {0, 1, 0, 0, 2}, 0, 2));
    CHECK(q_indicator(h, {0, 1, 2, 0, 2}, 2, 2));
}

TEST_CASE("J indicator") {
    const ChainGraph g = ChainGraph::make(1, 1, 1, 1);
    const Labeling x{0, 4, 0, 4};
    CHECK(j_indicator(g, 0, 1, x));
    CHECK(j_indicator(g, 1, 0, x));
    CHECK_FALSE(j_indicator(g, 0, 2, x));  // both run 0 -> 4: parallel orientation
    CHECK(j_indicator(g, 0, 3, x));
}

TEST_CASE("pairing counts") {
    const ChainGraph g = ChainGraph::make(1, 1, 1, 1);
    CHECK(enumerate_pairings(g, PairingFilter::All).size() == 3);
    CHECK(enumerate_pairings(g).size() == 2);
    for (auto n : {std::array{1, 1, 2, 2}, std::array{2, 2, 1, 1}, std::array{1, 2, 1, 2}, std::array{0, 3, 1, 2},
                   std::array{2, 2, 2, 2}, std::array{3, 1, 1, 1}, std::array{4, 2, 2, 2}}) {
        const ChainGraph c = ChainGraph::make(n);
        const int e = c.edge_count();
        const int l0 = c.chain_length(0), l1 = c.chain_length(1);
        const std::int64_t all = double_factorial_odd(e / 2);
        const std::int64_t split = (l0 % 2 == 0 && l1 % 2 == 0) ? double_factorial_odd(l0 / 2) * double_factorial_odd(l1 / 2) : 0;
        CHECK(static_cast<std::int64_t>(enumerate_pairings(c, PairingFilter::All).size()) == all);
        CHECK(static_cast<std::int64_t>(enumerate_pairings(c).size()) == all - split);
    }
    CHECK(enumerate_pairings(ChainGraph::make(1, 2, 1, 1), PairingFilter::All).empty());
    CHECK_THROWS_AS(enumerate_pairings(ChainGraph::make(4, 4, 3, 3)), ResourceLimitError);
}

TEST_CASE("set partitions") {
    const std::int64_t bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
    for (int n = 1; n <= 8; ++n) {
        std::int64_t count = 0;
        for_each_set_partition(n, [&](const Lumping&) { ++count; });
        CHECK(count == bell[n]);
    }
}

TEST_CASE("weight polynomial") {
    WeightPolynomial a, b;
    a.add(1, 3);
    a.add(2, -1);
    b.add(2, -1);
    WeightPolynomial c = a;
    c -= b;
    CHECK(c.degree() == 1);
    CHECK(c.coeff(1) == 3);
    CHECK(c.value(4) == doctest::Approx(1.0));
    c -= c;
    CHECK(c.is_zero());
    CHECK(a.value(11) == doctest::Approx(3.0 / 10 - 1.0 / 100));
}

TEST_CASE("edge product expectations") {
    const BandProfile prof(LatticeConfig::make(1, 10, 2));
    CHECK(edge_product_exponent(prof, {{0, 1}, {1, 0}}) == 1);
    CHECK_FALSE(edge_product_exponent(prof, {{0, 1}, {0, 1}}).has_value());
    CHECK(edge_product_expectation(prof, {{0, 1}, {0, 1}}) == 0.0);
    CHECK(edge_product_expectation(prof, {{0, 1}, {1, 0}, {1, 2}, {2, 1}}) == doctest::Approx(1.0 / 9));
    CHECK(edge_product_expectation(prof, {{0, 5}, {5, 0}}) == 0.0);
    CHECK(edge_product_expectation(prof, {{0, 1}, {1, 0}, {0, 1}, {1, 0}}) == doctest::Approx(1.0 / 9));
}

TEST_CASE("covariance small cases") {
    const BandProfile prof(LatticeConfig::make(1, 5, 2));
    const ChainGraph g = ChainGraph::make(1, 1, 1, 1);
    for (Index y1 = 0; y1 < 5; ++y1)
        for (Index y2 = 0; y2 < 5; ++y2) CHECK(covariance_bruteforce(prof, g, y1, y2).value == 0.0);
    const BandProfile wide(LatticeConfig::make(1, 11, 2));
    CHECK(covariance_bruteforce(wide, ChainGraph::make(1, 1, 2, 2), 5, 0).value == 0.0);
}

TEST_CASE("lumping decomposition") {
    const BandProfile prof(LatticeConfig::make(1, 5, 2));
    for (auto n : {std::array{2, 2, 2, 2}, std::array{1, 2, 2, 1}, std::array{3, 1, 2, 0}, std::array{1, 3, 1, 1}}) {
        const ChainGraph g = ChainGraph::make(n);
        const auto brute = covariance_table_bruteforce(prof, g);
        const auto lumps = covariance_table_via_lumpings(prof, g);
        for (std::size_t i = 0; i < brute.size(); ++i) {
            CHECK(lumps[i].connected_even == brute[i]);
            CHECK(lumps[i].disconnected_even.is_zero());
            CHECK(lumps[i].odd.is_zero());
        }
        CHECK(covariance_via_lumpings(prof, g, 1, 2).connected_even == brute[1 * 5 + 2]);
    }
}

TEST_CASE("collapse and expand") {
    const ChainGraph g = ChainGraph::make(1, 1, 1, 1);
    const Pairing p = pairing_from_bridges(4, {{0, 3}, {1, 2}});
    const CollapsedPairing c = collapse_parallel_bridges(g, p);
    CHECK(c.skeleton.graph == g);
    CHECK(c.multiplicity == std::vector<int>{1, 1});

    // Two triangles (r = s) joined by a ladder of three anti-parallel bridges.
    const ChainGraph ladder = ChainGraph::make(3, 0, 0, 3);
    const Pairing lp = pairing_from_bridges(6, {{0, 5}, {1, 4}, {2, 3}});
    CHECK(is_admissible(ladder, lp));
    CHECK(has_parallel_bridges(ladder, lp));
    const auto lc = collapse_parallel_bridges(ladder, lp);
    CHECK(lc.multiplicity == std::vector<int>{3});
    CHECK(lc.skeleton.size() == 1);
    const ExpandedPairing back = expand_skeleton(lc.skeleton, lc.multiplicity);
    CHECK(back.graph == ladder);
    CHECK(back.pairing == lp);

    CHECK_THROWS_AS(collapse_parallel_bridges(ChainGraph::make(2, 2, 1, 1), pairing_from_bridges(6, {{0, 1}, {2, 3}, {4, 5}})),
                    ConfigError);
}

TEST_CASE("expand then collapse on random instances") {
    CounterStream rs(2024);
    std::vector<std::vector<Skeleton>> by_m{{}, enumerate_skeletons(1), enumerate_skeletons(2), enumerate_skeletons(3)};
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 1 + static_cast<int>(rs.next() % 3);
        const Skeleton& s = by_m[m][rs.next() % by_m[m].size()];
        std::vector<int> l(m);
        int sum = 0;
        for (int& v : l) sum += (v = 1 + static_cast<int>(rs.next() % 3));
        const ExpandedPairing e = expand_skeleton(s, l);
        CHECK(e.graph.edge_count() == s.graph.edge_count() + 2 * (sum - m));
        const CollapsedPairing c = collapse_parallel_bridges(e.graph, e.pairing);
        CHECK(c.skeleton == s);
        CHECK(c.multiplicity == l);
    }
    const Skeleton& s = by_m[2][5];
    const auto once = expand_skeleton(s, {1, 1});
    const auto twice = expand_skeleton(s, {2, 2});
    CHECK(twice.graph.edge_count() == 2 * 4);
    CHECK(once.graph == s.graph);
}

TEST_CASE("bijection up to 8 edges") {
    const BijectionReport r = check_collapse_bijection(8);
    CHECK(r.pass());
    CHECK(r.pairings_checked == r.expansions_checked);
}

TEST_CASE("skeleton enumeration postconditions") {
    for (int m = 1; m <= 3; ++m)
        for (const Skeleton& s : enumerate_skeletons(m)) {
            CHECK(s.size() == m);
            CHECK(is_connected(s.graph, s.pairing));
            CHECK(is_admissible(s.graph, s.pairing));
            CHECK_FALSE(has_parallel_bridges(s.graph, s.pairing));
            CHECK(adjacency_ok(s));
            const OrbitPartition o = orbit_partition(s);
            int sum = 0;
            for (int v : o.sizes()) sum += v;
            CHECK(sum == s.graph.vertex_count());
            CHECK(o.free_orbits <= orbit_bound(m));
        }
    CHECK_THROWS_AS(enumerate_skeletons(6), ResourceLimitError);
    CHECK(orbit_bound(1) == 1);
    CHECK(orbit_bound(2) == 2);
    CHECK(orbit_bound(3) == 2);
    CHECK(orbit_bound(4) == 3);
    CHECK(orbit_bound(5) == 4);
}

TEST_CASE("R against naive enumeration") {
    const BandProfile prof(LatticeConfig::make(1, 6, 2));
    for (int m = 1; m <= 2; ++m)
        for (const Skeleton& s : enumerate_skeletons(m)) {
            std::vector<int> l(m, 1);
            CHECK(r_value(prof, s, l) == doctest::Approx(naive_bridge_sum(prof, s.graph, s.pairing)).epsilon(1e-12));
            l.back() = 2;
            const ExpandedPairing e = expand_skeleton(s, l);
            CHECK(r_value(prof, s, l) == doctest::Approx(naive_bridge_sum(prof, e.graph, e.pairing)).epsilon(1e-12));
        }
}

TEST_CASE("R golden value") {
    const BandProfile prof(LatticeConfig::make(1, 10, 2));
    // (1,1,1,1) with the two crossing bridges: one free label in the band of 0, weight (1/3)^2 each.
    const Skeleton s = enumerate_skeletons(2)[21];
    CHECK(s.graph == ChainGraph::make(1, 1, 1, 1));
    const double r = r_value(prof, s, {1, 1});
    CHECK(r == doctest::Approx(naive_bridge_sum(prof, s.graph, s.pairing)).epsilon(1e-12));
    CHECK(r == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("pairing values aggregate to R") {
    const BandProfile prof(LatticeConfig::make(1, 11, 2));
    for (auto n : {std::array{1, 1, 1, 1}, std::array{2, 2, 1, 1}, std::array{1, 2, 2, 1}, std::array{2, 2, 2, 2}}) {
        const ChainGraph g = ChainGraph::make(n);
        for (const Pairing& p : enumerate_pairings(g)) {
            if (!is_admissible(g, p)) continue;
            const auto c = collapse_parallel_bridges(g, p);
            const double agg = pairing_value(prof, g, p, {std::nullopt, std::nullopt, false}).value(prof.band_count());
            CHECK(agg == doctest::Approx(r_value(prof, c.skeleton, c.multiplicity)).epsilon(1e-12));
        }
    }
}

TEST_CASE("pairing values are symmetric") {
    const BandProfile prof(LatticeConfig::make(1, 7, 2));
    for (auto n : {std::array{2, 1, 1, 2}, std::array{1, 3, 2, 0}, std::array{2, 2, 1, 1}}) {
        const ChainGraph g = ChainGraph::make(n);
        for (const Pairing& p : enumerate_pairings(g)) {
            if (!is_admissible(g, p)) continue;
            const ExpandedPairing sw = swap_chains(g, p);
            const ExpandedPairing rv = reverse_chains(g, p);
            for (Index y1 = 0; y1 < 7; y1 += 2)
                for (Index y2 = 0; y2 < 7; y2 += 3) {
                    const auto base = pairing_value(prof, g, p, {y1, y2});
                    CHECK(pairing_value(prof, sw.graph, sw.pairing, {y2, y1}).count == base.count);
                    CHECK(pairing_value(prof, rv.graph, rv.pairing, {y1, y2}).count == base.count);
                }
        }
    }
}

TEST_CASE("cutoff sum") {
    const Skeleton s = enumerate_skeletons(3)[0];
    CHECK(coeff_sum_cutoff(s, 0.0, 100, 0.5).value == 0.0);
    const CutoffSum c = coeff_sum_cutoff(s, 2.0, 50, 0.5);
    CHECK(c.cutoff == 7);
    CHECK(c.value > 0.0);
    CHECK(c.shape == doctest::Approx(std::pow(50.0, 0.5)));
    CHECK_THROWS_AS(coeff_sum_cutoff(enumerate_skeletons(2)[0], 1.0, 50, 0.5), ConfigError);
    CHECK_THROWS_AS(coeff_sum_cutoff(s, 1.0, 1000, 0.5), ResourceLimitError);
}

TEST_CASE("pairing bound") {
    const BandProfile prof(LatticeConfig::make(1, 5, 2));
    const PairingBoundReport zero = pairing_bound_check(prof, 0, 0, 0.0, 8);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);
    const PairingBoundReport r = pairing_bound_check(prof, 0, 0, 0.5, 8);
    CHECK(r.pass);
    CHECK(r.termwise_violations == 0);
}

TEST_CASE("degenerate cases") {
    const DegenerateCaseReport r = degenerate_case_analysis(BandProfile(LatticeConfig::make(1, 9, 2)), 2);
    CHECK(r.empty_chain_covariance == 0.0);
    CHECK(r.diagonal_covariance == 0.0);
    CHECK(r.single_bridge_zero);
    CHECK(r.two_bridge_skeletons == static_cast<int>(enumerate_skeletons(2).size()));
}

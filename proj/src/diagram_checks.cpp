#include "qdiff/diagram_checks.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qdiff/errors.hpp"
#include "qdiff/propagator.hpp"

namespace qdiff {

PairingBoundReport pairing_bound_check(const BandProfile& profile, Index y1, Index y2, double t, int max_order) {
    if (max_order < 2) throw ConfigError("pairing_bound_check: max_order must be >= 2");
    if (max_order > 10) throw ResourceLimitError("pairing_bound_check limited to total order <= 10");
    const int band = profile.band_count();
    const CoefficientTable table = make_coefficient_table(t, band, max_order);

    PairingBoundReport out;
    out.t = t;
    out.y1 = y1;
    out.y2 = y2;
    out.max_order = max_order;
    Complex lhs = 0.0;
    for (int n11 = 0; n11 <= max_order; ++n11)
        for (int n12 = 0; n11 + n12 <= max_order; ++n12)
            for (int n21 = 0; n11 + n12 + n21 <= max_order; ++n21)
                for (int n22 = 0; n11 + n12 + n21 + n22 <= max_order; ++n22) {
                    if (n11 + n12 < 1 || n21 + n22 < 1) continue;
                    const ChainGraph g = ChainGraph::make(n11, n12, n21, n22);
                    ++out.tuples;
                    const double cov = covariance_bruteforce(profile, g, y1, y2).value;
                    double pair_sum = 0.0;
                    for (const Pairing& p : enumerate_pairings(g))
                        pair_sum += pairing_value(profile, g, p, {y1, y2, true}).value(band);
                    if (std::abs(cov) > pair_sum * (1.0 + 1e-12) + 1e-15) ++out.termwise_violations;
                    const Complex coef = table.a[n11] * std::conj(table.a[n12]) * table.a[n21] * std::conj(table.a[n22]);
                    lhs += coef * cov;
                    out.rhs += std::abs(coef) * pair_sum;
                }
    out.lhs = std::abs(lhs);
    // sum_{|n| = s} prod t^{n_ij}/n_ij! = (4t)^s / s!
    const double at = std::abs(t);
    for (int s = max_order + 1; s < max_order + 200; ++s) {
        const double term = 81.0 * std::exp(s * std::log(4.0 * at) - std::lgamma(s + 1.0));
        if (at == 0.0) break;
        out.coefficient_tail += term;
        if (term < 1e-18 * std::max(out.coefficient_tail, 1e-300)) break;
    }
    out.pass = out.termwise_violations == 0 && out.lhs <= out.rhs + out.coefficient_tail;
    return out;
}

CutoffSum coeff_sum_cutoff(const Skeleton& s, double t, int band_count, double mu) {
    const int m = s.size();
    if (m < 3) throw ConfigError("coeff_sum_cutoff: needs at least 3 bridges");
    if (!(mu > 0.0)) throw ConfigError("coeff_sum_cutoff: mu must be > 0");
    CutoffSum out;
    out.cutoff = static_cast<int>(std::floor(std::pow(double(band_count), mu) + 1e-9));
    out.shape = std::pow(double(band_count), mu * (m - 2)) / std::tgamma(m - 2.0);
    if (out.cutoff > 24) throw ResourceLimitError("coeff_sum_cutoff limited to M^mu <= 24");
    if (out.cutoff < m) return out;
    const CoefficientTable table = make_coefficient_table(t, band_count, 2 * out.cutoff);

    // Segment counts of each bridge: how many of its two edges lie in each segment.
    const auto bridges = s.pairing.bridges();
    std::vector<std::array<int, 4>> seg(m, {0, 0, 0, 0});
    for (int b = 0; b < m; ++b) {
        ++seg[b][s.graph.segment_of(bridges[b].first)];
        ++seg[b][s.graph.segment_of(bridges[b].second)];
    }
    std::vector<int> l(m, 1);
    auto rec = [&](auto&& self, int b, int used) -> void {
        if (b == m) {
            std::array<int, 4> n{0, 0, 0, 0};
            for (int k = 0; k < m; ++k)
                for (int j = 0; j < 4; ++j) n[j] += seg[k][j] * l[k];
            out.value += std::abs(table.a[n[0]]) * std::abs(table.a[n[1]]) * std::abs(table.a[n[2]]) *
                         std::abs(table.a[n[3]]);
            ++out.terms;
            if (out.terms > 10000000) throw ResourceLimitError("coeff_sum_cutoff limited to 1e7 terms");
            return;
        }
        const int remaining = m - b - 1;
        for (int v = 1; used + v + remaining <= out.cutoff; ++v) {
            l[b] = v;
            self(self, b + 1, used + v);
        }
    };
    rec(rec, 0, 0);
    return out;
}

bool adjacency_ok(const Skeleton& s) {
    const ChainGraph& g = s.graph;
    for (auto [e, f] : s.pairing.bridges()) {
        if (g.head(e) == g.tail(f) && !g.is_white(g.head(e))) return false;
        if (g.head(f) == g.tail(e) && !g.is_white(g.head(f))) return false;
    }
    return true;
}

SkeletonCensus skeleton_census(int m) {
    SkeletonCensus out;
    out.m = m;
    out.count_bound = 1;
    for (int k = 1; k <= m; ++k) out.count_bound *= 2 * k;
    out.orbit_bound = orbit_bound(m);
    const auto skeletons = enumerate_skeletons(m);
    out.count = static_cast<std::int64_t>(skeletons.size());
    std::map<std::array<int, 4>, std::int64_t> per_graph;
    for (const Skeleton& s : skeletons) {
        ++per_graph[s.graph.lengths()];
        const int free = orbit_partition(s).free_orbits;
        out.max_free_orbits = std::max(out.max_free_orbits, free);
        if (3 * free > 2 * m + 2) ++out.two_thirds_violations;
        if (!adjacency_ok(s)) ++out.adjacency_violations;
    }
    for (const auto& [n, c] : per_graph) out.max_per_graph = std::max(out.max_per_graph, c);

    const int total = 2 * m;
    for (int a = 0; a <= total; ++a)
        for (int b = 0; a + b <= total; ++b)
            for (int c = 0; a + b + c <= total; ++c) {
                const int d = total - a - b - c;
                if (a + b < 1 || c + d < 1) continue;
                const ChainGraph g = ChainGraph::make(a, b, c, d);
                for (const Pairing& p : enumerate_pairings(g))
                    if (!is_admissible(g, p) && !has_parallel_bridges(g, p)) ++out.excluded_nonadmissible;
            }
    return out;
}

BijectionReport check_collapse_bijection(int max_edges) {
    if (max_edges > 12) throw ResourceLimitError("bijection check limited to |E| <= 12");
    BijectionReport out;
    out.max_edges = max_edges;
    for (int total = 2; total <= max_edges; total += 2)
        for (int a = 0; a <= total; ++a)
            for (int b = 0; a + b <= total; ++b)
                for (int c = 0; a + b + c <= total; ++c) {
                    const int d = total - a - b - c;
                    if (a + b < 1 || c + d < 1) continue;
                    const ChainGraph g = ChainGraph::make(a, b, c, d);
                    for (const Pairing& p : enumerate_pairings(g)) {
                        if (!is_admissible(g, p)) continue;
                        ++out.pairings_checked;
                        const CollapsedPairing cp = collapse_parallel_bridges(g, p);
                        const Skeleton& s = cp.skeleton;
                        const bool skeleton_ok = is_connected(s.graph, s.pairing) &&
                                                 is_admissible(s.graph, s.pairing) &&
                                                 !has_parallel_bridges(s.graph, s.pairing);
                        const ExpandedPairing back = expand_skeleton(s, cp.multiplicity);
                        if (!skeleton_ok || !(back.graph == g) || back.pairing != p) ++out.pairing_failures;
                    }
                }
    for (int m = 1; 2 * m <= max_edges && m <= 5; ++m) {
        for (const Skeleton& s : enumerate_skeletons(m)) {
            std::vector<int> l(m, 1);
            auto rec = [&](auto&& self, int b, int used) -> void {
                if (b == m) {
                    ++out.expansions_checked;
                    const ExpandedPairing ep = expand_skeleton(s, l);
                    const CollapsedPairing cp = collapse_parallel_bridges(ep.graph, ep.pairing);
                    if (!(cp.skeleton == s) || cp.multiplicity != l) ++out.expansion_failures;
                    return;
                }
                for (int v = 1; 2 * (used + v + (m - b - 1)) <= max_edges; ++v) {
                    l[b] = v;
                    self(self, b + 1, used + v);
                }
            };
            rec(rec, 0, 0);
        }
    }
    return out;
}

bool DegenerateCaseReport::pass_two() const {
    if (contributing_classes != 4) return false;
    for (const auto& c : classes)
        if (c.contributes && !c.forces_equal) return false;
    return true;
}

namespace {

std::pair<std::array<int, 4>, std::vector<int>> canonical_key(const ChainGraph& g, const Pairing& p) {
    auto key = std::pair{g.lengths(), p.partner};
    const ExpandedPairing sw = swap_chains(g, p);
    const ExpandedPairing rv = reverse_chains(g, p);
    const ExpandedPairing both = reverse_chains(sw.graph, sw.pairing);
    for (const ExpandedPairing* e : {&sw, &rv, &both}) key = std::min(key, std::pair{e->graph.lengths(), e->pairing.partner});
    return key;
}

}  // namespace

DegenerateCaseReport degenerate_case_analysis(const BandProfile& profile, int max_multiplicity) {
    if (max_multiplicity < 1) throw ConfigError("max_multiplicity must be >= 1");
    const Index vol = profile.volume();
    const int band = profile.band_count();
    DegenerateCaseReport out;

    // Zero bridges: both chains are empty, each factor is the constant delta_{0y}.
    for (Index y1 = 0; y1 < vol; ++y1)
        for (Index y2 = 0; y2 < vol; ++y2) {
            const double d1 = y1 == 0 ? 1.0 : 0.0, d2 = y2 == 0 ? 1.0 : 0.0;
            out.empty_chain_covariance = std::max(out.empty_chain_covariance, std::abs(d1 * d2 - d1 * d2));
        }
    out.diagonal_covariance = edge_product_expectation(profile, {{0, 0}, {0, 0}}) -
                              edge_product_expectation(profile, {{0, 0}}) * edge_product_expectation(profile, {{0, 0}});

    const auto singles = enumerate_skeletons(1);
    out.single_bridge_skeletons = static_cast<int>(singles.size());
    out.single_bridge_zero = true;
    for (const Skeleton& s : singles) {
        for (const WeightPolynomial& w : covariance_table_bruteforce(profile, s.graph))
            if (!w.is_zero()) out.single_bridge_zero = false;
        for (int l = 2; l <= max_multiplicity; ++l) {
            const ExpandedPairing ep = expand_skeleton(s, {l});
            if (pairing_value(profile, ep.graph, ep.pairing).count > 0) ++out.single_bridge_nonzero_expansions;
        }
    }

    const auto doubles = enumerate_skeletons(2);
    out.two_bridge_skeletons = static_cast<int>(doubles.size());
    std::map<std::pair<std::array<int, 4>, std::vector<int>>, int> class_of;
    for (int i = 0; i < static_cast<int>(doubles.size()); ++i) {
        const auto key = canonical_key(doubles[i].graph, doubles[i].pairing);
        auto [it, inserted] = class_of.emplace(key, static_cast<int>(out.classes.size()));
        if (inserted) out.classes.emplace_back();
        out.classes[it->second].members.push_back(i);
    }
    for (DegenerateClass& c : out.classes) {
        const Skeleton& rep = doubles[c.members.front()];
        bool crossing = true;
        for (auto [e, f] : rep.pairing.bridges())
            if (rep.graph.chain_of(e) == rep.graph.chain_of(f)) crossing = false;
        if (crossing) ++out.crossing_classes;
        const OrbitPartition orb = orbit_partition(rep);
        c.summits_share_orbit = orb.summit_orbit[0] == orb.summit_orbit[1];
        for (int l1 = 1; l1 <= max_multiplicity; ++l1)
            for (int l2 = 1; l2 <= max_multiplicity; ++l2) {
                const ExpandedPairing ep = expand_skeleton(rep, {l1, l2});
                if (pairing_value(profile, ep.graph, ep.pairing).count == 0) continue;
                for (Index y1 = 0; y1 < vol; ++y1)
                    for (Index y2 = 0; y2 < vol; ++y2) {
                        if (pairing_value(profile, ep.graph, ep.pairing, {y1, y2, true}).count == 0) continue;
                        if (!c.contributes || (c.forces_equal && y1 != y2)) {
                            c.witness_l1 = l1;
                            c.witness_l2 = l2;
                            c.witness_y1 = y1;
                            c.witness_y2 = y2;
                        }
                        c.contributes = true;
                        if (y1 != y2) c.forces_equal = false;
                    }
            }
        if (c.contributes) ++out.contributing_classes;
    }
    (void)band;
    return out;
}

}  // namespace qdiff

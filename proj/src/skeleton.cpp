#include "qdiff/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "qdiff/errors.hpp"

namespace qdiff {

namespace {

int find_root(std::vector<int>& parent, int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
}

}  // namespace

CollapsedPairing collapse_parallel_bridges(const ChainGraph& g, const Pairing& p) {
    if (static_cast<int>(p.partner.size()) != g.edge_count()) throw ConfigError("pairing size != edge count");
    if (!is_connected(g, p)) throw ConfigError("collapse: pairing is not connected");
    if (!is_admissible(g, p)) throw ConfigError("collapse: a bridge meets itself at a black vertex");

    const auto bridges = p.bridges();
    const auto bidx = p.bridge_of_edge();
    const int nb = static_cast<int>(bridges.size());
    std::vector<int> parent(nb);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<char> removed(g.vertex_count(), 0);
    std::set<std::pair<int, int>> links;
    for (int b = 0; b < nb; ++b) {
        const auto [e, f] = bridges[b];
        for (auto [x, xp] : {std::pair{e, f}, std::pair{f, e}}) {
            if (g.is_white(g.head(x)) || g.is_white(g.tail(xp))) continue;
            const int e2 = g.next(x), e2p = g.prev(xp);
            if (e2 == e2p || p.partner[e2] != e2p) continue;
            removed[g.head(x)] = removed[g.tail(xp)] = 1;
            if (!links.insert(std::minmax(b, bidx[e2])).second) continue;
            const int ra = find_root(parent, b), rb = find_root(parent, bidx[e2]);
            if (ra == rb) throw CheckFailure("collapse: parallel bridges form a cycle");
            parent[ra] = rb;
        }
    }

    // Surviving vertices keep their chain order; each old edge maps to the
    // new edge leaving the last surviving vertex at or before its tail.
    std::vector<int> new_edge(g.edge_count(), -1);
    std::array<int, 4> n{};
    int next_id = 0;
    for (int k = 0; k < 2; ++k) {
        const int off = g.offset(k), len = g.chain_length(k);
        const int start = next_id;
        int current = -1, summit_local = 0;
        for (int j = 0; j < len; ++j) {
            const int v = off + j;
            if (!removed[v]) {
                current = next_id++;
                if (v == g.summit(k)) summit_local = current - start;
            }
            new_edge[v] = current;
        }
        const int new_len = next_id - start;
        const auto& old = g.lengths();
        if (old[2 * k + 1] == 0) n[2 * k] = new_len;
        else if (old[2 * k] == 0) n[2 * k] = 0;
        else n[2 * k] = summit_local;
        n[2 * k + 1] = new_len - n[2 * k];
    }

    CollapsedPairing out;
    out.skeleton.graph = ChainGraph::make(n);
    std::vector<int> partner(next_id, -1);
    for (auto [e, f] : bridges) {
        const int a = new_edge[e], c = new_edge[f];
        if ((partner[a] != -1 && partner[a] != c) || (partner[c] != -1 && partner[c] != a))
            throw CheckFailure("collapse: inconsistent contracted bridge");
        partner[a] = c;
        partner[c] = a;
    }
    out.skeleton.pairing.partner = partner;
    const auto new_bidx = out.skeleton.pairing.bridge_of_edge();
    out.multiplicity.assign(out.skeleton.pairing.size(), 0);
    for (auto [e, f] : bridges) ++out.multiplicity[new_bidx[new_edge[e]]];
    return out;
}

ExpandedPairing expand_skeleton(const Skeleton& s, const std::vector<int>& multiplicity) {
    const auto bridges = s.pairing.bridges();
    if (multiplicity.size() != bridges.size()) throw ConfigError("expand: one multiplicity per bridge required");
    for (int l : multiplicity)
        if (l < 1) throw ConfigError("expand: multiplicities must be >= 1");
    const ChainGraph& g = s.graph;
    const auto bidx = s.pairing.bridge_of_edge();

    std::vector<int> start(g.edge_count());
    std::array<int, 4> n{};
    int next_id = 0;
    for (int e = 0; e < g.edge_count(); ++e) {
        start[e] = next_id;
        next_id += multiplicity[bidx[e]];
        n[g.segment_of(e)] += multiplicity[bidx[e]];
    }
    ExpandedPairing out;
    out.graph = ChainGraph::make(n);
    out.pairing.partner.assign(next_id, -1);
    for (std::size_t b = 0; b < bridges.size(); ++b) {
        const auto [e, f] = bridges[b];
        const int l = multiplicity[b];
        for (int j = 0; j < l; ++j) {
            const int a = start[e] + j, c = start[f] + (l - 1 - j);
            out.pairing.partner[a] = c;
            out.pairing.partner[c] = a;
        }
    }
    return out;
}

std::vector<Skeleton> enumerate_skeletons(int m) {
    if (m < 1) throw ConfigError("enumerate_skeletons: m must be >= 1");
    if (m > 5) throw ResourceLimitError("enumerate_skeletons limited to m <= 5");
    std::vector<Skeleton> out;
    const int total = 2 * m;
    for (int a = 0; a <= total; ++a)
        for (int b = 0; a + b <= total; ++b)
            for (int c = 0; a + b + c <= total; ++c) {
                const int d = total - a - b - c;
                if (a + b < 1 || c + d < 1) continue;
                const ChainGraph g = ChainGraph::make(a, b, c, d);
                for (Pairing& p : enumerate_pairings(g, PairingFilter::Connected)) {
                    if (!is_admissible(g, p) || has_parallel_bridges(g, p)) continue;
                    out.push_back(Skeleton{g, std::move(p)});
                }
            }
    return out;
}

std::vector<int> OrbitPartition::sizes() const {
    std::vector<int> out(orbit_count, 0);
    for (int o : orbit_of) ++out[o];
    return out;
}

OrbitPartition orbit_partition(const ChainGraph& g, const Pairing& p) {
    if (static_cast<int>(p.partner.size()) != g.edge_count()) throw ConfigError("pairing size != edge count");
    const int nv = g.vertex_count();
    OrbitPartition out;
    out.orbit_of.assign(nv, -1);
    for (int i = 0; i < nv; ++i) {
        if (out.orbit_of[i] >= 0) continue;
        for (int j = i; out.orbit_of[j] < 0; j = g.head(p.partner[j])) out.orbit_of[j] = out.orbit_count;
        ++out.orbit_count;
    }
    for (int k = 0; k < 2; ++k) {
        out.root_orbit[k] = out.orbit_of[g.root(k)];
        out.summit_orbit[k] = out.orbit_of[g.summit(k)];
    }
    out.free_orbits = out.orbit_count - (out.root_orbit[0] == out.root_orbit[1] ? 1 : 2);
    for (auto [e, f] : p.bridges()) {
        (void)f;
        out.zeta1.push_back(out.orbit_of[g.tail(e)]);
        out.zeta2.push_back(out.orbit_of[g.head(e)]);
    }
    return out;
}

int orbit_bound(int m) { return (2 * m + 2) / 3; }

namespace {

// Site arithmetic on the torus by linear index.
class Torus {
public:
    explicit Torus(const LatticeConfig& cfg) : cfg_(cfg), coords_(cfg.d, cfg.volume()) {
        for (Index i = 0; i < cfg.volume(); ++i) coords_.col(i) = site_at(cfg, i);
    }
    Index add(Index u, Index v) const { return site_index(cfg_, coords_.col(u) + coords_.col(v)); }
    Index diff(Index u, Index v) const { return site_index(cfg_, coords_.col(v) - coords_.col(u)); }

private:
    LatticeConfig cfg_;
    Eigen::MatrixXi coords_;
};

struct Factor {
    int from;  // orbit whose label is subtracted
    int to;
    int kernel;
};

}  // namespace

double r_value(const BandProfile& profile, const Skeleton& s, const std::vector<int>& multiplicity) {
    const auto bridges = s.pairing.bridges();
    if (multiplicity.size() != bridges.size()) throw ConfigError("r_value: one multiplicity per bridge required");
    for (int l : multiplicity)
        if (l < 1) throw ConfigError("r_value: multiplicities must be >= 1");
    const OrbitPartition orb = orbit_partition(s);
    const Torus torus(profile.config());

    std::vector<int> kernel_l;
    std::vector<Eigen::VectorXd> kernels;
    std::vector<std::vector<Index>> support;
    auto kernel_of = [&](int l) {
        auto it = std::find(kernel_l.begin(), kernel_l.end(), l);
        if (it != kernel_l.end()) return static_cast<int>(it - kernel_l.begin());
        kernel_l.push_back(l);
        kernels.push_back(s_power_row(profile, l));
        std::vector<Index> supp;
        for (Index z = 0; z < kernels.back().size(); ++z)
            if (kernels.back()[z] != 0.0) supp.push_back(z);
        support.push_back(std::move(supp));
        return static_cast<int>(kernel_l.size()) - 1;
    };
    std::vector<Factor> factors;
    for (std::size_t b = 0; b < bridges.size(); ++b)
        factors.push_back({orb.zeta1[b], orb.zeta2[b], kernel_of(multiplicity[b])});

    // Assign orbits breadth-first from the roots; each new orbit is reached
    // through a factor, so its label ranges over that kernel's support.
    std::vector<int> position(orb.orbit_count, -1);
    std::vector<int> order, anchor_orbit, anchor_kernel;
    int assigned = 0;
    for (int k = 0; k < 2; ++k)
        if (position[orb.root_orbit[k]] < 0) position[orb.root_orbit[k]] = assigned++;
    const int pinned = assigned;
    bool grew = true;
    while (grew) {
        grew = false;
        for (const Factor& f : factors) {
            for (auto [known, fresh] : {std::pair{f.from, f.to}, std::pair{f.to, f.from}}) {
                if (position[known] >= 0 && position[fresh] < 0) {
                    position[fresh] = assigned++;
                    order.push_back(fresh);
                    anchor_orbit.push_back(known);
                    anchor_kernel.push_back(f.kernel);
                    grew = true;
                }
            }
        }
    }
    if (assigned != orb.orbit_count) throw CheckFailure("r_value: orbit graph is not connected to the roots");

    double work = 1.0;
    for (int k : anchor_kernel) work *= static_cast<double>(support[k].size());
    if (work > 1e8) throw ResourceLimitError("r_value limited to 1e8 orbit labelings");

    // Factors are applied at the step where their later orbit is assigned.
    std::vector<std::vector<const Factor*>> at_step(order.size() + 1);
    for (const Factor& f : factors) {
        const int last = std::max(position[f.from], position[f.to]);
        at_step[last < pinned ? 0 : last - pinned + 1].push_back(&f);
    }
    std::vector<Index> label(orb.orbit_count, 0);
    auto weight = [&](const Factor& f) { return kernels[f.kernel][torus.diff(label[f.from], label[f.to])]; };

    double base = 1.0;
    for (const Factor* f : at_step[0]) base *= weight(*f);
    if (base == 0.0) return 0.0;

    auto rec = [&](auto&& self, std::size_t step, double acc) -> double {
        if (step == order.size()) return acc;
        const int o = order[step];
        const Index anchor = label[anchor_orbit[step]];
        double total = 0.0;
        for (Index z : support[anchor_kernel[step]]) {
            label[o] = torus.add(anchor, z);
            double w = acc;
            for (const Factor* f : at_step[step + 1]) {
                w *= weight(*f);
                if (w == 0.0) break;
            }
            if (w != 0.0) total += self(self, step + 1, w);
        }
        return total;
    };
    return rec(rec, 0, base);
}

double PairingValue::value(int band_count) const {
    return static_cast<double>(count) * std::pow(1.0 / (band_count - 1), power);
}

PairingValue pairing_value(const BandProfile& profile, const ChainGraph& g, const Pairing& p,
                           const PairingValueOptions& opts) {
    const OrbitPartition orb = orbit_partition(g, p);
    const Index vol = profile.volume();
    PairingValue out;
    out.power = p.size();

    std::vector<Index> label(orb.orbit_count, -1);
    auto pin = [&](int o, Index y) {
        if (y < 0 || y >= vol) throw ConfigError("pairing_value: summit label out of range");
        if (label[o] >= 0 && label[o] != y) return false;
        label[o] = y;
        return true;
    };
    if (!pin(orb.root_orbit[0], 0) || !pin(orb.root_orbit[1], 0)) return out;
    if (opts.y1 && !pin(orb.summit_orbit[0], *opts.y1)) return out;
    if (opts.y2 && !pin(orb.summit_orbit[1], *opts.y2)) return out;
    std::vector<int> free;
    for (int o = 0; o < orb.orbit_count; ++o)
        if (label[o] < 0) free.push_back(o);
    if (std::pow(double(vol), double(free.size())) > 1e7)
        throw ResourceLimitError("pairing_value limited to 1e7 orbit labelings");
    for (int o : free) label[o] = 0;

    const auto bridges = p.bridges();
    while (true) {
        bool ok = true;
        for (auto [e, f] : bridges) {
            (void)f;
            if (!profile.in_band(label[orb.orbit_of[g.tail(e)]], label[orb.orbit_of[g.head(e)]])) {
                ok = false;
                break;
            }
        }
        if (ok && opts.non_backtracking) {
            for (int v = 0; v < g.vertex_count() && ok; ++v)
                if (!g.is_white(v) && label[orb.orbit_of[g.prev(v)]] == label[orb.orbit_of[g.next(v)]]) ok = false;
        }
        if (ok) ++out.count;
        std::size_t k = 0;
        for (; k < free.size(); ++k) {
            if (++label[free[k]] < vol) break;
            label[free[k]] = 0;
        }
        if (k == free.size()) break;
    }
    return out;
}

ExpandedPairing swap_chains(const ChainGraph& g, const Pairing& p) {
    const auto& n = g.lengths();
    ExpandedPairing out;
    out.graph = ChainGraph::make(n[2], n[3], n[0], n[1]);
    const int len0 = g.chain_length(0), len1 = g.chain_length(1);
    auto map = [&](int e) { return e < len0 ? e + len1 : e - len0; };
    out.pairing.partner.assign(g.edge_count(), -1);
    for (int e = 0; e < g.edge_count(); ++e) out.pairing.partner[map(e)] = map(p.partner[e]);
    return out;
}

ExpandedPairing reverse_chains(const ChainGraph& g, const Pairing& p) {
    const auto& n = g.lengths();
    ExpandedPairing out;
    out.graph = ChainGraph::make(n[1], n[0], n[3], n[2]);
    auto map = [&](int e) {
        const int k = g.chain_of(e), off = g.offset(k);
        return off + g.chain_length(k) - 1 - (e - off);
    };
    out.pairing.partner.assign(g.edge_count(), -1);
    for (int e = 0; e < g.edge_count(); ++e) out.pairing.partner[map(e)] = map(p.partner[e]);
    return out;
}

}  // namespace qdiff

#include "qdiff/chain_graph.hpp"

#include <algorithm>
#include <string>

#include "qdiff/errors.hpp"

namespace qdiff {

ChainGraph ChainGraph::make(int n11, int n12, int n21, int n22) {
    if (n11 < 0 || n12 < 0 || n21 < 0 || n22 < 0) throw ConfigError("chain lengths must be >= 0");
    if (n11 + n12 < 1 || n21 + n22 < 1) throw ConfigError("each chain needs at least one edge");
    ChainGraph g;
    g.n_ = {n11, n12, n21, n22};
    g.len_ = {n11 + n12, n21 + n22};
    return g;
}

int ChainGraph::next(int v) const {
    const int k = chain_of(v);
    const int off = offset(k);
    return off + (v - off + 1) % len_[k];
}

int ChainGraph::prev(int v) const {
    const int k = chain_of(v);
    const int off = offset(k);
    return off + (v - off + len_[k] - 1) % len_[k];
}

bool ChainGraph::is_white(int v) const {
    return v == root(0) || v == summit(0) || v == root(1) || v == summit(1);
}

int ChainGraph::segment_of(int e) const {
    const int k = chain_of(e);
    return 2 * k + (e - offset(k) < n_[2 * k] ? 0 : 1);
}

Lumping Lumping::from_blocks(const std::vector<int>& raw) {
    Lumping out;
    out.block.resize(raw.size());
    std::vector<std::pair<int, int>> seen;
    for (std::size_t e = 0; e < raw.size(); ++e) {
        auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& p) { return p.first == raw[e]; });
        if (it == seen.end()) {
            seen.emplace_back(raw[e], out.blocks);
            out.block[e] = out.blocks++;
        } else {
            out.block[e] = it->second;
        }
    }
    return out;
}

std::vector<int> Lumping::sizes() const {
    std::vector<int> out(blocks, 0);
    for (int b : block) ++out[b];
    return out;
}

bool Lumping::even() const {
    for (int s : sizes())
        if (s % 2 != 0) return false;
    return true;
}

bool Lumping::connected(const ChainGraph& g) const {
    std::vector<int> mask(blocks, 0);
    for (std::size_t e = 0; e < block.size(); ++e) mask[block[e]] |= 1 << g.chain_of(static_cast<int>(e));
    return std::find(mask.begin(), mask.end(), 3) != mask.end();
}

Lumping lumping_of_labels(const ChainGraph& g, const Labeling& x) {
    if (static_cast<int>(x.size()) != g.vertex_count()) throw ConfigError("labeling size != vertex count");
    const int ne = g.edge_count();
    Lumping out;
    out.block.assign(ne, -1);
    for (int e = 0; e < ne; ++e) {
        if (out.block[e] >= 0) continue;
        const Index u = x[g.tail(e)], v = x[g.head(e)];
        out.block[e] = out.blocks;
        for (int f = e + 1; f < ne; ++f) {
            if (out.block[f] >= 0) continue;
            const Index p = x[g.tail(f)], q = x[g.head(f)];
            if ((p == u && q == v) || (p == v && q == u)) out.block[f] = out.blocks;
        }
        ++out.blocks;
    }
    return out;
}

bool q_indicator(const ChainGraph& g, const Labeling& x, Index y1, Index y2) {
    if (static_cast<int>(x.size()) != g.vertex_count()) throw ConfigError("labeling size != vertex count");
    if (x[g.root(0)] != 0 || x[g.root(1)] != 0) return false;
    if (x[g.summit(0)] != y1 || x[g.summit(1)] != y2) return false;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (!g.is_white(v) && x[g.prev(v)] == x[g.next(v)]) return false;
    return true;
}

std::vector<std::pair<int, int>> Pairing::bridges() const {
    std::vector<std::pair<int, int>> out;
    for (int e = 0; e < static_cast<int>(partner.size()); ++e)
        if (e < partner[e]) out.emplace_back(e, partner[e]);
    return out;
}

std::vector<int> Pairing::bridge_of_edge() const {
    std::vector<int> out(partner.size(), -1);
    int idx = 0;
    for (int e = 0; e < static_cast<int>(partner.size()); ++e) {
        if (e < partner[e]) {
            out[e] = out[partner[e]] = idx++;
        }
    }
    return out;
}

Lumping Pairing::as_lumping() const { return Lumping::from_blocks(bridge_of_edge()); }

Pairing pairing_from_bridges(int edge_count, const std::vector<std::pair<int, int>>& bridges) {
    Pairing p;
    p.partner.assign(edge_count, -1);
    for (auto [e, f] : bridges) {
        if (e < 0 || f < 0 || e >= edge_count || f >= edge_count || e == f)
            throw ConfigError("bridge endpoints out of range");
        if (p.partner[e] >= 0 || p.partner[f] >= 0) throw ConfigError("edge used by two bridges");
        p.partner[e] = f;
        p.partner[f] = e;
    }
    if (std::find(p.partner.begin(), p.partner.end(), -1) != p.partner.end())
        throw ConfigError("bridges do not cover every edge");
    return p;
}

bool is_connected(const ChainGraph& g, const Pairing& p) {
    for (auto [e, f] : p.bridges())
        if (g.chain_of(e) != g.chain_of(f)) return true;
    return false;
}

bool is_admissible(const ChainGraph& g, const Pairing& p) {
    for (auto [e, f] : p.bridges()) {
        if (g.head(e) == g.tail(f) && !g.is_white(g.head(e))) return false;
        if (g.head(f) == g.tail(e) && !g.is_white(g.head(f))) return false;
    }
    return true;
}

bool has_parallel_bridges(const ChainGraph& g, const Pairing& p) {
    for (auto [e, f] : p.bridges()) {
        for (auto [x, xp] : {std::pair{e, f}, std::pair{f, e}}) {
            if (g.is_white(g.head(x)) || g.is_white(g.tail(xp))) continue;
            const int e2 = g.next(x);
            const int e2p = g.prev(xp);
            if (e2 != e2p && p.partner[e2] == e2p) return true;
        }
    }
    return false;
}

namespace {

void match_rec(std::vector<int>& partner, std::vector<Pairing>& out, const ChainGraph& g,
               PairingFilter filter) {
    const auto first = std::find(partner.begin(), partner.end(), -1);
    if (first == partner.end()) {
        Pairing p{partner};
        if (filter == PairingFilter::All || is_connected(g, p)) out.push_back(std::move(p));
        return;
    }
    const int e = static_cast<int>(first - partner.begin());
    for (int f = e + 1; f < static_cast<int>(partner.size()); ++f) {
        if (partner[f] != -1) continue;
        partner[e] = f;
        partner[f] = e;
        match_rec(partner, out, g, filter);
        partner[e] = partner[f] = -1;
    }
}

}  // namespace

std::vector<Pairing> enumerate_pairings(const ChainGraph& g, PairingFilter filter) {
    const int ne = g.edge_count();
    if (ne > 12) throw ResourceLimitError("enumerate_pairings limited to |E| <= 12");
    std::vector<Pairing> out;
    if (ne % 2 != 0) return out;
    std::vector<int> partner(ne, -1);
    match_rec(partner, out, g, filter);
    return out;
}

bool j_indicator(const ChainGraph& g, int e, int f, const Labeling& x) {
    return x[g.tail(e)] == x[g.head(f)] && x[g.tail(f)] == x[g.head(e)];
}

}  // namespace qdiff

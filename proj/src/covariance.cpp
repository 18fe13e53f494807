#include "qdiff/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

#include "qdiff/band_matrix.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/propagator.hpp"

namespace qdiff {

void WeightPolynomial::add(int power, std::int64_t c) {
    if (power < 0) throw ConfigError("WeightPolynomial: negative power");
    if (power >= static_cast<int>(coeff_.size())) coeff_.resize(power + 1, 0);
    coeff_[power] += c;
    trim();
}

WeightPolynomial& WeightPolynomial::operator+=(const WeightPolynomial& o) {
    if (o.coeff_.size() > coeff_.size()) coeff_.resize(o.coeff_.size(), 0);
    for (std::size_t k = 0; k < o.coeff_.size(); ++k) coeff_[k] += o.coeff_[k];
    trim();
    return *this;
}

WeightPolynomial& WeightPolynomial::operator-=(const WeightPolynomial& o) {
    if (o.coeff_.size() > coeff_.size()) coeff_.resize(o.coeff_.size(), 0);
    for (std::size_t k = 0; k < o.coeff_.size(); ++k) coeff_[k] -= o.coeff_[k];
    trim();
    return *this;
}

void WeightPolynomial::trim() {
    while (!coeff_.empty() && coeff_.back() == 0) coeff_.pop_back();
}

bool WeightPolynomial::is_zero() const { return coeff_.empty(); }

std::int64_t WeightPolynomial::coeff(int power) const {
    return power >= 0 && power < static_cast<int>(coeff_.size()) ? coeff_[power] : 0;
}

double WeightPolynomial::value(int band_count) const {
    const double q = 1.0 / (band_count - 1);
    double acc = 0.0;
    for (auto it = coeff_.rbegin(); it != coeff_.rend(); ++it) acc = acc * q + static_cast<double>(*it);
    return acc;
}

std::string WeightPolynomial::to_string() const {
    if (coeff_.empty()) return "0";
    std::string out;
    for (std::size_t k = 0; k < coeff_.size(); ++k) {
        if (coeff_[k] == 0) continue;
        if (!out.empty()) out += coeff_[k] < 0 ? " - " : " + ";
        else if (coeff_[k] < 0) out += "-";
        out += std::to_string(std::llabs(coeff_[k]));
        if (k > 0) out += " q^" + std::to_string(k);
    }
    return out;
}

bool WeightPolynomial::operator==(const WeightPolynomial& o) const { return coeff_ == o.coeff_; }

std::optional<int> edge_product_exponent(const BandProfile& profile, std::vector<DirectedPair> edges) {
    if (edges.size() % 2 != 0) return std::nullopt;
    std::sort(edges.begin(), edges.end(), [](const DirectedPair& a, const DirectedPair& b) {
        const auto ka = std::minmax(a.first, a.second), kb = std::minmax(b.first, b.second);
        return ka < kb;
    });
    int power = 0;
    for (std::size_t i = 0; i < edges.size();) {
        const auto key = std::minmax(edges[i].first, edges[i].second);
        if (key.first == key.second || !profile.in_band(key.first, key.second)) return std::nullopt;
        int up = 0, down = 0;
        std::size_t j = i;
        for (; j < edges.size() && std::minmax(edges[j].first, edges[j].second) == key; ++j)
            (edges[j].first == key.first ? up : down)++;
        if (up != down) return std::nullopt;
        power += up;
        i = j;
    }
    return power;
}

double edge_product_expectation(const BandProfile& profile, const std::vector<DirectedPair>& edges) {
    const auto power = edge_product_exponent(profile, edges);
    return power ? std::pow(profile.weight(), *power) : 0.0;
}

namespace {

constexpr double kLabelingCap = 1e7;

// Odometer over the labels of `free_vertices`; other entries of x stay fixed.
template <class F>
void for_each_labeling(Index volume, const std::vector<int>& free_vertices, Labeling& x, F&& f) {
    if (std::pow(double(volume), double(free_vertices.size())) > kLabelingCap)
        throw ResourceLimitError("label enumeration limited to 1e7 labelings");
    for (int v : free_vertices) x[v] = 0;
    while (true) {
        f(x);
        std::size_t k = 0;
        for (; k < free_vertices.size(); ++k) {
            if (++x[free_vertices[k]] < volume) break;
            x[free_vertices[k]] = 0;
        }
        if (k == free_vertices.size()) return;
    }
}

// Contribution Q * A of one labeling whose pins are already satisfied; only
// the non-backtracking condition is tested here.
void accumulate_bruteforce(const BandProfile& profile, const ChainGraph& g, const Labeling& x,
                           WeightPolynomial& out) {
    for (int v = 0; v < g.vertex_count(); ++v)
        if (!g.is_white(v) && x[g.prev(v)] == x[g.next(v)]) return;
    std::vector<DirectedPair> all, part[2];
    for (int e = 0; e < g.edge_count(); ++e) {
        const DirectedPair p{x[g.tail(e)], x[g.head(e)]};
        all.push_back(p);
        part[g.chain_of(e)].push_back(p);
    }
    const auto full = edge_product_exponent(profile, all);
    if (full) out.add(*full, 1);
    const auto c0 = edge_product_exponent(profile, part[0]);
    if (!c0) return;
    const auto c1 = edge_product_exponent(profile, part[1]);
    if (c1) out.add(*c0 + *c1, -1);
}

std::vector<int> non_root_vertices(const ChainGraph& g) {
    std::vector<int> out;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (v != g.root(0) && v != g.root(1)) out.push_back(v);
    return out;
}

// A(x) evaluated lump by lump: a lump is a single unordered pair {u, v}; it
// must be in band and balanced in orientation, overall and within each chain.
void accumulate_lumpwise(const BandProfile& profile, const ChainGraph& g, const Lumping& gamma,
                         const Labeling& x, WeightPolynomial& out) {
    const int ne = g.edge_count();
    if (ne % 2 != 0) return;
    std::vector<int> first(gamma.blocks, -1);
    std::vector<std::array<int, 2>> fwd(gamma.blocks, {0, 0}), bwd(gamma.blocks, {0, 0});
    for (int e = 0; e < ne; ++e) {
        const int b = gamma.block[e];
        if (first[b] < 0) first[b] = e;
        const int k = g.chain_of(e);
        (x[g.tail(e)] == x[g.tail(first[b])] ? fwd : bwd)[b][k]++;
    }
    bool whole = true, chains = true;
    for (int b = 0; b < gamma.blocks; ++b) {
        const Index u = x[g.tail(first[b])], v = x[g.head(first[b])];
        if (u == v || !profile.in_band(u, v)) return;
        if (fwd[b][0] + fwd[b][1] != bwd[b][0] + bwd[b][1]) whole = false;
        if (fwd[b][0] != bwd[b][0] || fwd[b][1] != bwd[b][1]) chains = false;
    }
    const int delta = int(whole) - int(chains);
    if (delta != 0) out.add(ne / 2, delta);
}

struct LumpBuckets {
    // lumping -> (summit-label key -> sum of Q A over its labelings)
    std::map<Lumping, std::map<Index, WeightPolynomial>> buckets;
};

LumpBuckets bucket_labelings(const BandProfile& profile, const ChainGraph& g, std::optional<std::pair<Index, Index>> pin) {
    if (g.edge_count() > 10) throw ResourceLimitError("lumping enumeration limited to |E| <= 10");
    const Index vol = profile.volume();
    LumpBuckets out;
    Labeling x(g.vertex_count(), 0);
    std::vector<int> free;
    if (pin) {
        for (int k = 0; k < 2; ++k) {
            const Index y = k == 0 ? pin->first : pin->second;
            if (g.summit(k) == g.root(k) && y != 0) return out;
            x[g.summit(k)] = y;
        }
        for (int v = 0; v < g.vertex_count(); ++v)
            if (!g.is_white(v)) free.push_back(v);
    } else {
        free = non_root_vertices(g);
    }
    for_each_labeling(vol, free, x, [&](const Labeling& lab) {
        const Index y1 = lab[g.summit(0)], y2 = lab[g.summit(1)];
        if (!q_indicator(g, lab, y1, y2)) return;
        const Lumping gamma = lumping_of_labels(g, lab);
        WeightPolynomial contrib;
        accumulate_lumpwise(profile, g, gamma, lab, contrib);
        if (!contrib.is_zero()) out.buckets[gamma][y1 * vol + y2] += contrib;
    });
    return out;
}

std::vector<LumpingDecomposition> decompose(const ChainGraph& g, const LumpBuckets& lb, Index keys,
                                            Index key_offset) {
    std::vector<LumpingDecomposition> out(keys);
    for (const auto& [gamma, per_y] : lb.buckets) {
        const bool ce = gamma.even() && gamma.connected(g);
        for (const auto& [key, poly] : per_y) {
            const Index slot = key - key_offset;
            if (slot < 0 || slot >= keys) continue;
            if (!gamma.even()) out[slot].odd += poly;
            else if (!ce) out[slot].disconnected_even += poly;
        }
    }
    std::int64_t partitions = 0, ce_count = 0;
    std::vector<std::int64_t> realized(keys, 0);
    for_each_set_partition(g.edge_count(), [&](const Lumping& gamma) {
        ++partitions;
        if (!gamma.even() || !gamma.connected(g)) return;
        ++ce_count;
        const auto it = lb.buckets.find(gamma);
        if (it == lb.buckets.end()) return;
        for (const auto& [key, poly] : it->second) {
            const Index slot = key - key_offset;
            if (slot < 0 || slot >= keys) continue;
            out[slot].connected_even += poly;
            ++realized[slot];
        }
    });
    for (Index s = 0; s < keys; ++s) {
        out[s].partitions = partitions;
        out[s].connected_even_partitions = ce_count;
        out[s].realized_connected_even = realized[s];
    }
    return out;
}

}  // namespace

void for_each_set_partition(int n, const std::function<void(const Lumping&)>& f) {
    if (n < 0) throw ConfigError("set partition size must be >= 0");
    if (n > 12) throw ResourceLimitError("set partition enumeration limited to n <= 12");
    Lumping cur;
    cur.block.assign(n, 0);
    if (n == 0) {
        f(cur);
        return;
    }
    // Restricted growth strings: block[i] <= 1 + max(block[0..i-1]).
    std::vector<int> prefix_max(n, 0);
    while (true) {
        cur.blocks = prefix_max[n - 1] + 1;
        f(cur);
        int i = n - 1;
        while (i > 0 && cur.block[i] == prefix_max[i - 1] + 1) --i;
        if (i == 0) return;
        ++cur.block[i];
        prefix_max[i] = std::max(prefix_max[i - 1], cur.block[i]);
        for (int j = i + 1; j < n; ++j) {
            cur.block[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
}

CovarianceValue covariance_bruteforce(const BandProfile& profile, const ChainGraph& g, Index y1, Index y2) {
    const Index vol = profile.volume();
    if (y1 < 0 || y1 >= vol || y2 < 0 || y2 >= vol) throw ConfigError("summit label out of range");
    CovarianceValue out;
    Labeling x(g.vertex_count(), 0);
    for (int k = 0; k < 2; ++k) {
        const Index y = k == 0 ? y1 : y2;
        if (g.summit(k) == g.root(k) && y != 0) return out;
        x[g.summit(k)] = y;
    }
    std::vector<int> free;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (!g.is_white(v)) free.push_back(v);
    for_each_labeling(vol, free, x, [&](const Labeling& lab) { accumulate_bruteforce(profile, g, lab, out.exact); });
    out.value = out.exact.value(profile.band_count());
    return out;
}

std::vector<WeightPolynomial> covariance_table_bruteforce(const BandProfile& profile, const ChainGraph& g) {
    const Index vol = profile.volume();
    std::vector<WeightPolynomial> out(vol * vol);
    Labeling x(g.vertex_count(), 0);
    for_each_labeling(vol, non_root_vertices(g), x, [&](const Labeling& lab) {
        accumulate_bruteforce(profile, g, lab, out[lab[g.summit(0)] * vol + lab[g.summit(1)]]);
    });
    return out;
}

LumpingDecomposition covariance_via_lumpings(const BandProfile& profile, const ChainGraph& g, Index y1, Index y2) {
    const Index vol = profile.volume();
    if (y1 < 0 || y1 >= vol || y2 < 0 || y2 >= vol) throw ConfigError("summit label out of range");
    const LumpBuckets lb = bucket_labelings(profile, g, std::pair{y1, y2});
    return decompose(g, lb, 1, y1 * vol + y2)[0];
}

std::vector<LumpingDecomposition> covariance_table_via_lumpings(const BandProfile& profile, const ChainGraph& g) {
    const Index vol = profile.volume();
    const LumpBuckets lb = bucket_labelings(profile, g, std::nullopt);
    return decompose(g, lb, vol * vol, 0);
}

CovarianceEstimate covariance_monte_carlo(const LatticeConfig& cfg, const ChainGraph& g, Index y1, Index y2,
                                          std::int64_t samples, std::uint64_t seed) {
    if (samples < 2) throw ConfigError("covariance_monte_carlo: need at least 2 samples");
    const BandProfile profile(cfg);
    if (y1 < 0 || y1 >= profile.volume() || y2 < 0 || y2 >= profile.volume())
        throw ConfigError("summit label out of range");
    const auto& n = g.lengths();
    const int order = *std::max_element(n.begin(), n.end());
    std::vector<Complex> x1(samples), x2(samples);
    Complex m1 = 0.0, m2 = 0.0;
    for (std::int64_t r = 0; r < samples; ++r) {
        const BandMatrixSample h = sample_band_matrix(profile, SeedSpec{seed, std::uint64_t(r)});
        const auto v = nb_column(h, order);
        x1[r] = std::conj(v[n[0]][y1]) * v[n[1]][y1];
        x2[r] = std::conj(v[n[2]][y2]) * v[n[3]][y2];
        m1 += x1[r];
        m2 += x2[r];
    }
    const double ns = static_cast<double>(samples);
    m1 /= ns;
    m2 /= ns;
    Complex mz = 0.0;
    std::vector<Complex> z(samples);
    for (std::int64_t r = 0; r < samples; ++r) {
        z[r] = (x1[r] - m1) * (x2[r] - m2);
        mz += z[r];
    }
    mz /= ns;
    double vr = 0.0, vi = 0.0;
    for (const Complex& c : z) {
        vr += (c.real() - mz.real()) * (c.real() - mz.real());
        vi += (c.imag() - mz.imag()) * (c.imag() - mz.imag());
    }
    CovarianceEstimate out;
    out.samples = samples;
    const Complex cov = mz * (ns / (ns - 1.0));
    out.re = cov.real();
    out.im = cov.imag();
    out.se_re = std::sqrt(vr / (ns - 1.0) / ns);
    out.se_im = std::sqrt(vi / (ns - 1.0) / ns);
    return out;
}

}  // namespace qdiff

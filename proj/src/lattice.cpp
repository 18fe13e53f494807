#include "qdiff/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "qdiff/errors.hpp"

namespace qdiff {

namespace {

int mod(int a, int n) {
    int r = a % n;
    return r < 0 ? r + n : r;
}

// Canonical coordinate in [-N/2, N/2) from a residue in [0, N).
int centred(int u, int n) { return 2 * u < n ? u : u - n; }

}  // namespace

LatticeConfig LatticeConfig::make(int d, int n, int w) {
    if (d < 1) throw ConfigError("dimension d must be >= 1, got " + std::to_string(d));
    if (w < 2) throw ConfigError("band width W must be >= 2, got " + std::to_string(w));
    if (n < 2 * w + 1) {
        throw ConfigError("linear size N must be >= 2W+1 (N=" + std::to_string(n) +
                          ", W=" + std::to_string(w) + ")");
    }
    double vol = std::pow(static_cast<double>(n), d);
    if (vol > 1e9) throw ConfigError("lattice volume N^d exceeds 1e9");
    return LatticeConfig{d, n, w};
}

Index LatticeConfig::volume() const {
    Index v = 1;
    for (int k = 0; k < d; ++k) v *= n;
    return v;
}

int LatticeConfig::band_count() const { return qdiff::band_count(d, w); }

int band_count(int d, int w) {
    if (w < 2) throw ConfigError("band width W must be >= 2, got " + std::to_string(w));
    return static_cast<int>(band_offsets(d, w).cols());
}

Eigen::MatrixXi band_offsets(int d, int w) {
    if (d < 1) throw ConfigError("dimension d must be >= 1");
    const int side = 2 * w + 1;
    Index cube = 1;
    for (int k = 0; k < d; ++k) cube *= side;
    std::vector<int> flat;
    Eigen::VectorXi delta(d);
    for (Index c = 0; c < cube; ++c) {
        Index rem = c;
        long r2 = 0;
        for (int k = d - 1; k >= 0; --k) {
            delta[k] = static_cast<int>(rem % side) - w;
            rem /= side;
            r2 += static_cast<long>(delta[k]) * delta[k];
        }
        if (r2 >= 1 && r2 <= static_cast<long>(w) * w) {
            flat.insert(flat.end(), delta.data(), delta.data() + d);
        }
    }
    return Eigen::Map<Eigen::MatrixXi>(flat.data(), d, static_cast<Index>(flat.size()) / d);
}

Site canonical(const LatticeConfig& cfg, const Site& x) {
    Site out(x.size());
    for (Index k = 0; k < x.size(); ++k) out[k] = centred(mod(x[k], cfg.n), cfg.n);
    return out;
}

Site add(const LatticeConfig& cfg, const Site& x, const Site& y) { return canonical(cfg, x + y); }

Index site_index(const LatticeConfig& cfg, const Site& x) {
    Index idx = 0;
    for (Index k = 0; k < x.size(); ++k) idx = idx * cfg.n + mod(x[k], cfg.n);
    return idx;
}

Site site_at(const LatticeConfig& cfg, Index idx) {
    Site x(cfg.d);
    for (int k = cfg.d - 1; k >= 0; --k) {
        x[k] = centred(static_cast<int>(idx % cfg.n), cfg.n);
        idx /= cfg.n;
    }
    return x;
}

long periodic_distance_sq(const LatticeConfig& cfg, const Site& x, const Site& y) {
    // Canonical components differ by less than N, so the minimizing image
    // is componentwise among nu_k in {-1, 0, 1}.
    long total = 0;
    for (Index k = 0; k < x.size(); ++k) {
        long diff = x[k] - y[k];
        long best = std::numeric_limits<long>::max();
        for (int nu = -1; nu <= 1; ++nu) {
            long c = diff + static_cast<long>(nu) * cfg.n;
            best = std::min(best, c * c);
        }
        total += best;
    }
    return total;
}

double periodic_distance(const LatticeConfig& cfg, const Site& x, const Site& y) {
    return std::sqrt(static_cast<double>(periodic_distance_sq(cfg, x, y)));
}

BandProfile::BandProfile(const LatticeConfig& cfg)
    : cfg_(LatticeConfig::make(cfg.d, cfg.n, cfg.w)), m_(0), volume_(cfg.volume()) {
    const Eigen::MatrixXi offsets = band_offsets(cfg_.d, cfg_.w);
    m_ = static_cast<int>(offsets.cols());
    table_.resize(static_cast<std::size_t>(volume_ * m_));
    for (Index x = 0; x < volume_; ++x) {
        const Site sx = site_at(cfg_, x);
        Index* row = table_.data() + x * m_;
        for (int j = 0; j < m_; ++j) row[j] = site_index(cfg_, sx + offsets.col(j));
        std::sort(row, row + m_);
    }
}

Eigen::Map<const Eigen::Matrix<Index, Eigen::Dynamic, 1>> BandProfile::neighbours(Index x) const {
    return {table_.data() + x * m_, m_};
}

bool BandProfile::in_band(Index x, Index y) const {
    const Index* row = table_.data() + x * m_;
    return std::binary_search(row, row + m_, y);
}

double s_entry(const BandProfile& profile, const Site& x, const Site& y) {
    const LatticeConfig& cfg = profile.config();
    long r2 = periodic_distance_sq(cfg, canonical(cfg, x), canonical(cfg, y));
    return (r2 >= 1 && r2 <= static_cast<long>(cfg.w) * cfg.w) ? profile.weight() : 0.0;
}

Eigen::VectorXd s_power_row(const BandProfile& profile, int l) {
    if (l < 0) throw ConfigError("S power must be nonnegative");
    const Index vol = profile.volume();
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(vol);
    cur[0] = 1.0;
    Eigen::VectorXd next(vol);
    for (int step = 0; step < l; ++step) {
        for (Index z = 0; z < vol; ++z) {
            double acc = 0.0;
            for (Index u : profile.neighbours(z)) acc += cur[u];
            next[z] = acc * profile.weight();
        }
        cur.swap(next);
    }
    return cur;
}

SPowerReport s_power_checks(const BandProfile& profile, int l) {
    if (l < 1) throw ConfigError("s_power_checks requires l >= 1");
    if (l > 8 || profile.volume() > 100000) {
        throw ResourceLimitError("S^l check limited to l <= 8 and N^d <= 1e5");
    }
    const double m = profile.band_count();
    SPowerReport rep;
    rep.l = l;
    rep.expected_row_sum = std::pow(m / (m - 1.0), l);
    rep.sup_bound = std::pow(m / (m - 1.0), l - 1) / (m - 1.0);

    const Index vol = profile.volume();
    if (vol <= 2048) {
        rep.dense = true;
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(vol, vol);
        for (Index x = 0; x < vol; ++x)
            for (Index y : profile.neighbours(x)) s(x, y) = profile.weight();
        Eigen::MatrixXd p = s;
        for (int k = 1; k < l; ++k) p = (p * s).eval();
        rep.row_sum_max_error = (p.rowwise().sum().array() - rep.expected_row_sum).abs().maxCoeff();
        rep.row_sum_max_error = std::max(
            rep.row_sum_max_error, (p.colwise().sum().array() - rep.expected_row_sum).abs().maxCoeff());
        rep.sup_entry = p.maxCoeff();
    } else {
        const Eigen::VectorXd row = s_power_row(profile, l);
        rep.row_sum_max_error = std::abs(row.sum() - rep.expected_row_sum);
        rep.sup_entry = row.maxCoeff();
    }
    return rep;
}

}  // namespace qdiff

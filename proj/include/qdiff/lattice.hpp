#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace qdiff {

using Index = std::int64_t;

/// Lattice point as a d-tuple of integer coordinates.
using Site = Eigen::VectorXi;

/// Periodic cube Lambda_N = ([-N/2, N/2) ∩ Z)^d with band width W.
///
/// Construction validates W >= 2, d >= 1 and N >= 2W + 1; the latter makes
/// every band neighbourhood wrap-free, so the periodic band count equals
/// the infinite-lattice count M(W).
struct LatticeConfig {
    int d = 1;
    int n = 0;
    int w = 2;

    static LatticeConfig make(int d, int n, int w);

    Index volume() const;
    int band_count() const;

    bool operator==(const LatticeConfig&) const = default;
};

/// |{x in Z^d : 1 <= |x| <= W}|, enumerated over the cube [-W, W]^d.
int band_count(int d, int w);

/// All offsets delta in Z^d with 1 <= |delta| <= W, one per column, in
/// lexicographic order of the cube enumeration.
Eigen::MatrixXi band_offsets(int d, int w);

/// Canonical representative of x in [-N/2, N/2)^d.
Site canonical(const LatticeConfig& cfg, const Site& x);

/// Periodic sum x + y, canonicalized.
Site add(const LatticeConfig& cfg, const Site& x, const Site& y);

/// Row-major linear index of a site. Coordinates are reduced mod N into
/// [0, N) first, so the origin always has index 0.
Index site_index(const LatticeConfig& cfg, const Site& x);

/// Inverse of site_index; returns canonical coordinates.
Site site_at(const LatticeConfig& cfg, Index idx);

/// Squared periodic distance, minimized over images nu in {-1,0,1}^d.
long periodic_distance_sq(const LatticeConfig& cfg, const Site& x, const Site& y);

double periodic_distance(const LatticeConfig& cfg, const Site& x, const Site& y);

/// The flat band profile S_xy = 1(1 <= |x-y| <= W) / (M-1), held implicitly
/// as a neighbour table (row x lists the M linear indices y with S_xy != 0,
/// sorted ascending).
class BandProfile {
public:
    explicit BandProfile(const LatticeConfig& cfg);

    const LatticeConfig& config() const { return cfg_; }
    int band_count() const { return m_; }
    double weight() const { return 1.0 / (m_ - 1); }

    Index volume() const { return volume_; }

    /// Neighbour indices of site `x` (length M, ascending).
    Eigen::Map<const Eigen::Matrix<Index, Eigen::Dynamic, 1>> neighbours(Index x) const;

    bool in_band(Index x, Index y) const;

    double entry(Index x, Index y) const { return in_band(x, y) ? weight() : 0.0; }

private:
    LatticeConfig cfg_;
    int m_;
    Index volume_;
    std::vector<Index> table_;
};

double s_entry(const BandProfile& profile, const Site& x, const Site& y);

/// Row 0 of S^l, i.e. the kernel (S^l)_{0,z}, by repeated neighbour convolution.
/// Every other row is a translate of it.
Eigen::VectorXd s_power_row(const BandProfile& profile, int l);

struct SPowerReport {
    int l = 0;
    double expected_row_sum = 0.0;
    double row_sum_max_error = 0.0;
    double sup_entry = 0.0;
    double sup_bound = 0.0;
    bool dense = false;  // dense matrix power (all rows) vs. convolution of row 0
    bool pass(double tol = 1e-12) const {
        return row_sum_max_error <= tol && sup_entry <= sup_bound * (1.0 + tol);
    }
};

/// Checks sum_y (S^l)_xy = (M/(M-1))^l and (S^l)_xy <= (M/(M-1))^{l-1}/(M-1).
/// Uses a dense power for N^d <= 2048, translation invariance otherwise.
/// Refuses l > 8 or N^d > 1e5.
SPowerReport s_power_checks(const BandProfile& profile, int l);

}  // namespace qdiff

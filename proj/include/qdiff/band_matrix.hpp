#pragma once

#include <complex>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "qdiff/lattice.hpp"
#include "qdiff/rng.hpp"

namespace qdiff {

using Complex = std::complex<double>;
using SparseHermitian = Eigen::SparseMatrix<Complex, Eigen::RowMajor, Index>;

/// One draw of H_xy = sqrt(S_xy) A_xy with A_xy uniform on the unit circle.
/// Immutable; safe to share read-only between threads.
class BandMatrixSample {
public:
    BandMatrixSample(LatticeConfig cfg, int band_count, SeedSpec seed, SparseHermitian h)
        : cfg_(cfg), m_(band_count), seed_(seed), h_(std::move(h)) {}

    const LatticeConfig& config() const { return cfg_; }
    int band_count() const { return m_; }
    const SeedSpec& seed() const { return seed_; }
    const SparseHermitian& matrix() const { return h_; }
    Index size() const { return h_.rows(); }

    Complex entry(Index x, Index y) const { return h_.coeff(x, y); }

private:
    LatticeConfig cfg_;
    int m_;
    SeedSpec seed_;
    SparseHermitian h_;
};

/// Draws one angle per unordered band pair {x, y}, x < y in linear index
/// order (rows ascending, neighbours ascending), from the counter stream
/// keyed by seed.stream_key(). Diagonal entries are structurally zero.
BandMatrixSample sample_band_matrix(const BandProfile& profile, const SeedSpec& seed);
BandMatrixSample sample_band_matrix(const LatticeConfig& cfg, const SeedSpec& seed);

/// H v. Throws ConfigError on a length mismatch.
Eigen::VectorXcd apply(const BandMatrixSample& h, const Eigen::Ref<const Eigen::VectorXcd>& v);

/// max |H_xy - conj(H_yx)|.
double hermiticity_residual(const BandMatrixSample& h);

/// max_x |sum_u |H_xu|^2 - M/(M-1)|.
double row_weight_residual(const BandMatrixSample& h);

Eigen::MatrixXcd densify(const BandMatrixSample& h);

}  // namespace qdiff

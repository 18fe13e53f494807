#include "qdiff/band_matrix.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "qdiff/errors.hpp"

namespace qdiff {

BandMatrixSample sample_band_matrix(const BandProfile& profile, const SeedSpec& seed) {
    const Index vol = profile.volume();
    const int m = profile.band_count();
    const double amp = std::sqrt(profile.weight());

    std::vector<Eigen::Triplet<Complex, Index>> triplets;
    triplets.reserve(static_cast<std::size_t>(vol * m));
    CounterStream stream(seed.stream_key());
    for (Index x = 0; x < vol; ++x) {
        for (Index y : profile.neighbours(x)) {
            if (y <= x) continue;
            const Complex h = std::polar(amp, stream.angle());
            triplets.emplace_back(x, y, h);
            triplets.emplace_back(y, x, std::conj(h));
        }
    }
    SparseHermitian h(vol, vol);
    h.setFromTriplets(triplets.begin(), triplets.end());
    h.makeCompressed();
    return BandMatrixSample(profile.config(), m, seed, std::move(h));
}

BandMatrixSample sample_band_matrix(const LatticeConfig& cfg, const SeedSpec& seed) {
    return sample_band_matrix(BandProfile(cfg), seed);
}

Eigen::VectorXcd apply(const BandMatrixSample& h, const Eigen::Ref<const Eigen::VectorXcd>& v) {
    if (v.size() != h.size()) {
        throw ConfigError("apply: vector length " + std::to_string(v.size()) + " != N^d = " +
                          std::to_string(h.size()));
    }
    return h.matrix() * v;
}

double hermiticity_residual(const BandMatrixSample& h) {
    const SparseHermitian& a = h.matrix();
    double worst = 0.0;
    for (Index x = 0; x < a.outerSize(); ++x)
        for (SparseHermitian::InnerIterator it(a, x); it; ++it)
            worst = std::max(worst, std::abs(it.value() - std::conj(a.coeff(it.col(), x))));
    return worst;
}

double row_weight_residual(const BandMatrixSample& h) {
    const double target = h.band_count() / (h.band_count() - 1.0);
    const SparseHermitian& a = h.matrix();
    double worst = 0.0;
    for (Index x = 0; x < a.outerSize(); ++x) {
        double acc = 0.0;
        for (SparseHermitian::InnerIterator it(a, x); it; ++it) acc += std::norm(it.value());
        worst = std::max(worst, std::abs(acc - target));
    }
    return worst;
}

Eigen::MatrixXcd densify(const BandMatrixSample& h) { return Eigen::MatrixXcd(h.matrix()); }

}  // namespace qdiff

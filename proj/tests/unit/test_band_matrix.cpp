#include <cmath>
#include <set>

#include "doctest.h"

#include "qdiff/band_matrix.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/rng.hpp"

using namespace qdiff;

TEST_CASE("counter stream") {
    CounterStream a(42), b(42, 5);
    for (int i = 0; i < 5; ++i) a.next();
    CHECK(a.next() == b.next());
    CHECK(CounterStream(42).at(3) != CounterStream(43).at(3));
    CounterStream u(9);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double v = u.uniform();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(lo < 1e-3);
    CHECK(hi > 0.999);
}

TEST_CASE("stream keys are distinct across replicas") {
    std::set<std::uint64_t> keys;
    for (std::uint64_t r = 0; r < 10000; ++r) keys.insert(SeedSpec{7, r}.stream_key());
    CHECK(keys.size() == 10000);
}

TEST_CASE("sample structure") {
    const auto cfg = LatticeConfig::make(1, 64, 4);
    const BandProfile prof(cfg);
    const BandMatrixSample h = sample_band_matrix(prof, SeedSpec{1, 0});
    CHECK(h.size() == 64);
    CHECK(hermiticity_residual(h) == 0.0);
    CHECK(row_weight_residual(h) <= 1e-12);
    for (Index x = 0; x < cfg.volume(); ++x) {
        CHECK(h.entry(x, x) == Complex(0.0, 0.0));
        for (Index y = 0; y < cfg.volume(); ++y) {
            if (prof.in_band(x, y))
                CHECK(std::norm(h.entry(x, y)) == doctest::Approx(prof.weight()).epsilon(1e-14));
            else
                CHECK(h.entry(x, y) == Complex(0.0, 0.0));
        }
    }
}

TEST_CASE("replicas are deterministic and distinct") {
    const auto cfg = LatticeConfig::make(1, 64, 4);
    const auto a = densify(sample_band_matrix(cfg, SeedSpec{3, 0}));
    const auto b = densify(sample_band_matrix(cfg, SeedSpec{3, 0}));
    const auto c = densify(sample_band_matrix(cfg, SeedSpec{3, 1}));
    CHECK(a == b);
    CHECK((a - c).cwiseAbs().maxCoeff() > 1e-3);
    // Drawing replica 5 first does not change replica 1.
    (void)sample_band_matrix(cfg, SeedSpec{3, 5});
    CHECK(densify(sample_band_matrix(cfg, SeedSpec{3, 1})) == c);
}

TEST_CASE("apply") {
    const auto cfg = LatticeConfig::make(2, 7, 2);
    const BandMatrixSample h = sample_band_matrix(cfg, SeedSpec{5, 2});
    const Eigen::MatrixXcd dense = densify(h);
    const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(h.size());
    CHECK(qdiff::apply(h, zero).isZero());
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(h.size());
    e[10] = 1.0;
    CHECK((qdiff::apply(h, e) - dense.col(10)).cwiseAbs().maxCoeff() == 0.0);
    CounterStream rs(11);
    Eigen::VectorXcd v(h.size());
    for (Index i = 0; i < h.size(); ++i) v[i] = Complex(rs.uniform() - 0.5, rs.uniform() - 0.5);
    const Complex q = v.dot(qdiff::apply(h, v));
    CHECK(std::abs(q.imag()) <= 1e-12 * v.squaredNorm());
    const Eigen::VectorXcd short_vec = Eigen::VectorXcd::Zero(3);
    CHECK_THROWS_AS(qdiff::apply(h, short_vec), ConfigError);
}

TEST_CASE("entries average to zero") {
    // Mean modulus below 5 sqrt(S_xy)/sqrt(R) for >= 99% of band entries.
    const auto cfg = LatticeConfig::make(1, 9, 2);
    const BandProfile prof(cfg);
    const int R = 10000;
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(cfg.volume(), cfg.volume());
    for (int r = 0; r < R; ++r) sum += densify(sample_band_matrix(prof, SeedSpec{17, std::uint64_t(r)}));
    int total = 0, ok = 0;
    for (Index x = 0; x < cfg.volume(); ++x)
        for (Index y = 0; y < cfg.volume(); ++y) {
            if (!prof.in_band(x, y)) continue;
            ++total;
            ok += std::abs(sum(x, y)) / R < 5.0 * std::sqrt(prof.weight()) / std::sqrt(double(R));
        }
    CHECK(ok >= 0.99 * total);
}

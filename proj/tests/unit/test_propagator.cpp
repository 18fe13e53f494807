#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"

#include "qdiff/errors.hpp"
#include "qdiff/propagator.hpp"

using namespace qdiff;

namespace {

// (2/pi) ∫_0^pi sin(theta) sin((k+1) theta) e^{-i t cos theta} dtheta, by
// adaptive Gauss–Kronrod on the angle variable.
Complex alpha_oracle(int k, double t) {
    using boost::math::quadrature::gauss_kronrod;
    auto part = [&](bool imag) {
        auto f = [&](double th) {
            const double base = std::sin(th) * std::sin((k + 1) * th);
            return imag ? -base * std::sin(t * std::cos(th)) : base * std::cos(t * std::cos(th));
        };
        return gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi, 15, 1e-14);
    };
    return 2.0 / std::numbers::pi * Complex(part(false), part(true));
}

Complex a_oracle(int m, double t, int M) {
    static std::map<std::pair<int, double>, Complex> memo;
    Complex s = 0.0;
    for (int k = 0; alpha_bound(m + 2 * k, t) / std::pow(double(M - 1), k) > 1e-18; ++k) {
        auto [it, fresh] = memo.try_emplace({m + 2 * k, t});
        if (fresh) it->second = alpha_oracle(m + 2 * k, t);
        s += it->second / std::pow(double(M - 1), k);
    }
    return s;
}

}  // namespace

TEST_CASE("alpha at t = 0") {
    CHECK(std::abs(alpha_coeff(0, 0.0) - 1.0) < 1e-14);
    for (int k = 1; k <= 10; ++k) CHECK(std::abs(alpha_coeff(k, 0.0)) < 1e-14);
}

TEST_CASE("alpha_1(0.1)") {
    const Complex a = alpha_coeff(1, 0.1);
    CHECK(std::abs(a.real()) < 1e-15);
    CHECK(a.imag() == doctest::Approx(-0.0499583).epsilon(1e-6));
    CHECK(std::abs(a - alpha_oracle(1, 0.1)) < 1e-13);
}

TEST_CASE("alpha agrees with an adaptive quadrature of the defining integral") {
    for (double t : {0.3, 1.0, 2.5, 7.0, 12.0})
        for (int k = 0; k <= 24; k += 3) CHECK(std::abs(alpha_coeff(k, t) - alpha_oracle(k, t)) < 1e-12);
}

TEST_CASE("quadrature and Bessel forms agree") {
    double worst = 0.0;
    for (double t : {-3.0, 0.5, 1.0, 5.0, 10.0, 20.0, 35.0, 50.0})
        for (int k = 0; k <= 100; ++k)
            worst = std::max(worst, std::abs(alpha_coeff(k, t) - alpha_coeff_bessel(k, t)));
    CHECK(worst <= 1e-10);
}

TEST_CASE("alpha bound") {
    for (double t : {0.5, 2.0, 10.0})
        for (int k = 0; k <= 60; ++k) CHECK(std::abs(alpha_coeff_bessel(k, t)) <= alpha_bound(k, t) * (1 + 1e-12));
}

TEST_CASE("a_m") {
    CHECK(std::abs(a_coeff(0, 0.0, 20, 1e-15) - 1.0) < 1e-14);
    for (int m = 1; m <= 6; ++m) CHECK(std::abs(a_coeff(m, 0.0, 20, 1e-15)) < 1e-14);
    for (int M : {4, 20, 100})
        for (double t : {0.7, 3.0})
            for (int m = 0; m <= 12; m += 2) CHECK(std::abs(a_coeff(m, t, M, 1e-15) - a_oracle(m, t, M)) < 1e-12);
}

TEST_CASE("coefficient table") {
    const CoefficientTable tab = make_coefficient_table(5.0, 100, 200);
    CHECK(std::abs(tab.sum_sq() - 1.0) <= 10.0 / 100);
    CHECK(tab.tail_bound < 1e-10);
    const CoefficientTable q = make_coefficient_table(2.0, 50, 40, 1e-15, AlphaMethod::Quadrature);
    const CoefficientTable b = make_coefficient_table(2.0, 50, 40, 1e-15, AlphaMethod::Bessel);
    for (int m = 0; m <= 40; ++m) CHECK(std::abs(q.a[m] - b.a[m]) < 1e-12);
    CHECK(b.growth_constant() <= 3.0);
}

TEST_CASE("non-backtracking column") {
    const auto cfg = LatticeConfig::make(1, 8, 2);
    const BandMatrixSample h = sample_band_matrix(cfg, SeedSpec{2, 0});
    const Eigen::MatrixXcd H = densify(h);
    const auto v = nb_column(h, 5);
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(8);
    e0[0] = 1.0;
    CHECK(v[0] == e0);
    CHECK((v[1] - H.col(0)).cwiseAbs().maxCoeff() < 1e-15);
    const double M = h.band_count();
    CHECK((v[2] - (H * H * e0 - M / (M - 1) * e0)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((nb_power_bruteforce(h, 0) - e0).norm() == 0.0);
    CHECK((nb_power_bruteforce(h, 1) - H.col(0)).norm() < 1e-15);
    for (int m = 2; m <= 5; ++m) CHECK((v[m] - nb_power_bruteforce(h, m)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("recursion identity over seeds") {
    for (auto cfg : {LatticeConfig::make(1, 8, 2), LatticeConfig::make(2, 6, 2)})
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const BandMatrixSample h = sample_band_matrix(cfg, SeedSpec{seed, 0});
            const auto v = nb_column(h, 5);
            for (int m = 0; m <= 5; ++m) CHECK((v[m] - nb_power_bruteforce(h, m)).cwiseAbs().maxCoeff() <= 1e-12);
        }
}

TEST_CASE("propagation") {
    const auto cfg = LatticeConfig::make(1, 32, 4);
    const BandMatrixSample h = sample_band_matrix(cfg, SeedSpec{4, 1});
    const Eigen::VectorXcd psi0 = propagate_column(h, 0.0, 1e-12);
    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(32);
    e0[0] = 1.0;
    CHECK(psi0 == e0);
    for (double t : {0.5, 3.0, 12.0, 20.0}) {
        const Propagation p = propagate(h, t, 1e-12);
        CHECK(std::abs(p.psi.norm() - 1.0) <= 1e-12);
        CHECK(p.m_used <= p.m_max);
        CHECK((p.psi - dense_expm_oracle(h, t)).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("expansion identity at N = 64, W = 8") {
    const BandMatrixSample h = sample_band_matrix(LatticeConfig::make(1, 64, 8), SeedSpec{1, 0});
    CHECK((propagate_column(h, 10.0, 1e-12) - dense_expm_oracle(h, 10.0)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("spectrum stays near [-2, 2]") {
    const BandMatrixSample h = sample_band_matrix(LatticeConfig::make(1, 256, 8), SeedSpec{1, 0});
    const Eigen::VectorXd ev = dense_spectrum(h);
    CHECK(ev[0] >= -2.5);
    CHECK(ev[ev.size() - 1] <= 2.5);
}

TEST_CASE("oracle size limits") {
    const BandMatrixSample h = sample_band_matrix(LatticeConfig::make(2, 70, 2), SeedSpec{1, 0});
    CHECK_THROWS_AS(dense_expm_oracle(h, 1.0), ResourceLimitError);
    CHECK_THROWS_AS(nb_power_bruteforce(h, 7), ResourceLimitError);
}

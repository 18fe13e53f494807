#include "qdiff/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "qdiff/errors.hpp"

namespace qdiff {

namespace {

constexpr double kE = std::numbers::e;
constexpr Index kDenseCap = 4096;

// log of 2 e^{j+1} |t|^j / (2j+2)^{j+1}; -inf at t = 0 for j >= 1.
double log_bessel_factor(int j, double t) {
    const double at = std::abs(t);
    if (j == 0) return std::log(2.0 * kE / 2.0);
    if (at == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(2.0) + (j + 1) * (1.0 - std::log(2.0 * j + 2.0)) + j * std::log(at);
}

// True once j sits in the regime where alpha_bound decays by a factor < 1/4 per two steps.
bool in_decay_regime(int j, double t) {
    return j >= 1 && j >= kE * std::abs(t) && log_bessel_factor(j, t) < 0.0;
}

}  // namespace

Complex alpha_coeff(int k, double t) {
    if (k < 0) throw ConfigError("alpha_coeff: k must be >= 0");
    if (t == 0.0) return k == 0 ? 1.0 : 0.0;
    const int nodes = std::max(64, 2 * k + 2 * static_cast<int>(std::ceil(std::abs(t)))) + 16;
    const double h = std::numbers::pi / (nodes + 1);
    Complex acc = 0.0;
    for (int j = 1; j <= nodes; ++j) {
        const double theta = j * h;
        const double weight = std::sin(theta) * std::sin((k + 1) * theta);
        acc += weight * std::polar(1.0, -t * std::cos(theta));
    }
    return acc * (2.0 / (nodes + 1));
}

Complex alpha_coeff_bessel(int k, double t) {
    if (k < 0) throw ConfigError("alpha_coeff_bessel: k must be >= 0");
    if (t == 0.0) return k == 0 ? Complex(1.0) : Complex(0.0);
    const double at = std::abs(t);
    const double mag = 2.0 * (k + 1) * std::cyl_bessel_j(static_cast<double>(k + 1), at) / at;
    static const Complex kPhase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    Complex value = kPhase[k % 4] * mag;
    return t < 0 ? std::conj(value) : value;
}

double alpha_bound(int j, double t) {
    return 2.0 * (j + 1) * std::exp(std::min(0.0, log_bessel_factor(j, t)));
}

double a_series_tail(int m, int last, double t, int band_count) {
    const double log_r = -std::log(static_cast<double>(band_count - 1));
    double acc = 0.0;
    for (int k = last + 1;; ++k) {
        const int j = m + 2 * k;
        const double term = alpha_bound(j, t) * std::exp(k * log_r);
        if (in_decay_regime(j, t)) return acc + 2.0 * term;
        acc += term;
    }
}

Complex a_coeff(int m, double t, int band_count, double tol) {
    if (m < 0) throw ConfigError("a_coeff: m must be >= 0");
    if (band_count < 2) throw ConfigError("a_coeff: M must be >= 2");
    if (!(tol > 0.0)) throw ConfigError("a_coeff: tol must be > 0");
    const double r = 1.0 / (band_count - 1);
    Complex acc = 0.0;
    double scale = 1.0;
    for (int k = 0; k < 100000; ++k) {
        acc += alpha_coeff(m + 2 * k, t) * scale;
        if (a_series_tail(m, k, t, band_count) <= tol) return acc;
        scale *= r;
    }
    throw CheckFailure("a_coeff: series did not reach tolerance");
}

double CoefficientTable::sum_sq() const {
    double acc = 0.0;
    for (const Complex& c : a) acc += std::norm(c);
    return acc;
}

double CoefficientTable::growth_constant() const {
    double worst = 0.0;
    for (int m = 0; m <= m_max; ++m) {
        const double mag = std::abs(a[m]);
        if (t == 0.0) {
            if (m == 0) worst = std::max(worst, mag);
            else if (mag > 1e-14) return std::numeric_limits<double>::infinity();
            continue;
        }
        const double log_ref = m * std::log(std::abs(t)) - std::lgamma(m + 1.0);
        worst = std::max(worst, std::exp(std::log(mag) - log_ref));
    }
    return worst;
}

CoefficientTable make_coefficient_table(double t, int band_count, int m_max, double coeff_tol,
                                        AlphaMethod method) {
    if (band_count < 2) throw ConfigError("coefficient table: M must be >= 2");
    if (m_max < 0) throw ConfigError("coefficient table: m_max must be >= 0");
    CoefficientTable table;
    table.t = t;
    table.band_count = band_count;
    table.m_max = m_max;
    table.a.resize(m_max + 1);

    const double r = 1.0 / (band_count - 1);
    auto alpha_at = [&](int j) -> const Complex& {
        while (static_cast<int>(table.alpha.size()) <= j)
        {
            const int k = static_cast<int>(table.alpha.size());
            table.alpha.push_back(method == AlphaMethod::Bessel ? alpha_coeff_bessel(k, t)
                                                                : alpha_coeff(k, t));
        }
        return table.alpha[j];
    };

    double trunc_err = 0.0;
    for (int m = 0; m <= m_max; ++m) {
        Complex acc = 0.0;
        double scale = 1.0;
        for (int k = 0;; ++k) {
            acc += alpha_at(m + 2 * k) * scale;
            if (a_series_tail(m, k, t, band_count) <= coeff_tol) break;
            scale *= r;
        }
        table.a[m] = acc;
        trunc_err += 2.0 * std::abs(acc) * coeff_tol + coeff_tol * coeff_tol;
    }

    double tail = 0.0;
    for (int m = m_max + 1; m < m_max + 5000; ++m) {
        const double bound = alpha_bound(m, t) + a_series_tail(m, 0, t, band_count);
        tail += bound * bound;
        if (in_decay_regime(m, t) && bound * bound < 1e-300) break;
    }
    table.tail_bound = tail + trunc_err;
    return table;
}

int propagation_order(double t, double tol) {
    if (!(tol > 0.0)) throw ConfigError("propagation tolerance must be > 0");
    const int base = std::max(static_cast<int>(std::ceil(2.0 * kE * std::abs(t))), 30);
    const int digits = std::max(0, static_cast<int>(std::ceil(std::log10(1.0 / tol))));
    return base + 4 * digits;
}

NonBacktrackingColumn::NonBacktrackingColumn(const BandMatrixSample& h)
    : h_(&h), prev_(Eigen::VectorXcd::Zero(h.size())), cur_(Eigen::VectorXcd::Zero(h.size())),
      scratch_(h.size()) {
    cur_[0] = 1.0;
}

void NonBacktrackingColumn::advance() {
    scratch_.noalias() = h_->matrix() * cur_;
    if (order_ == 1) {
        const double m = h_->band_count();
        scratch_ -= (m / (m - 1.0)) * prev_;
    } else if (order_ >= 2) {
        scratch_ -= prev_;
    }
    prev_.swap(cur_);
    cur_.swap(scratch_);
    ++order_;
}

std::vector<Eigen::VectorXcd> nb_column(const BandMatrixSample& h, int m_max) {
    if (m_max < 0) throw ConfigError("nb_column: m_max must be >= 0");
    std::vector<Eigen::VectorXcd> out;
    out.reserve(m_max + 1);
    NonBacktrackingColumn col(h);
    out.push_back(col.current());
    for (int m = 1; m <= m_max; ++m) {
        col.advance();
        out.push_back(col.current());
    }
    return out;
}

namespace {

struct PathWalker {
    const SparseHermitian& h;
    int length;
    Eigen::VectorXcd& out;

    // Path x_0 = 0, ..., x_n; accumulates prod H_{x_{i+1} x_i} into out[x_n].
    void walk(Index prev, Index cur, int depth, Complex weight) {
        if (depth == length) {
            out[cur] += weight;
            return;
        }
        for (SparseHermitian::InnerIterator it(h, cur); it; ++it) {
            const Index next = it.col();
            if (next == prev) continue;
            walk(cur, next, depth + 1, weight * std::conj(it.value()));
        }
    }
};

}  // namespace

Eigen::VectorXcd nb_power_bruteforce(const BandMatrixSample& h, int n) {
    if (n < 0) throw ConfigError("nb_power_bruteforce: n must be >= 0");
    const double m = h.band_count();
    const double paths = n == 0 ? 1.0 : m * std::pow(m - 1.0, n - 1);
    if (n > 6 || h.size() > kDenseCap || paths > 5e7) {
        throw ResourceLimitError("nb_power_bruteforce limited to n <= 6, N^d <= 4096, 5e7 paths");
    }
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(h.size());
    PathWalker walker{h.matrix(), n, out};
    walker.walk(-1, 0, 0, Complex(1.0));
    return out;
}

double a_coeff_bound(int m, double t, int band_count) {
    return alpha_bound(m, t) + a_series_tail(m, 0, t, band_count);
}

Propagation propagate(const BandMatrixSample& h, double t, double tol) {
    const int m_max = propagation_order(t, tol);
    const double coeff_tol = std::max(tol / (10.0 * (m_max + 1)), 1e-17);
    const CoefficientTable table = make_coefficient_table(t, h.band_count(), m_max, coeff_tol);
    const int band = h.band_count();

    std::vector<double> norms(m_max + 1, 1.0);
    {
        NonBacktrackingColumn col(h);
        for (int m = 1; m <= m_max; ++m) {
            col.advance();
            norms[m] = col.current().norm();
        }
    }

    // Orders beyond m_max: ||v_{m+1}|| <= (||H||_inf + 1) max(||v_m||, ||v_{m-1}||).
    const double growth = band / std::sqrt(band - 1.0) + 1.0;
    double remainder = 0.0;
    double scale = norms[m_max];
    for (int m = m_max + 1; m < m_max + 10000; ++m) {
        scale *= growth;
        const double term = a_coeff_bound(m, t, band) * scale;
        remainder += term;
        if (in_decay_regime(m, t) && (term < 1e-300 || term < 1e-6 * remainder)) break;
    }
    int m_used = m_max;
    while (m_used > 0) {
        const double next = remainder + a_coeff_bound(m_used, t, band) * norms[m_used];
        if (!(next <= tol / 10.0)) break;
        remainder = next;
        --m_used;
    }

    Propagation result;
    result.m_max = m_max;
    result.m_used = m_used;
    result.truncation_bound = remainder;
    result.psi = table.a[0] * Eigen::VectorXcd::Unit(h.size(), 0);
    NonBacktrackingColumn col(h);
    for (int m = 1; m <= m_used; ++m) {
        col.advance();
        result.psi += table.a[m] * col.current();
    }
    result.norm_error = std::abs(result.psi.norm() - 1.0);
    const double check_tol = std::max(tol, 1e-13);
    if (!(result.norm_error <= check_tol)) {
        throw CheckFailure("propagate: norm check failed, | ||psi|| - 1 | = " +
                           std::to_string(result.norm_error) + " > " + std::to_string(check_tol));
    }
    return result;
}

Eigen::VectorXcd propagate_column(const BandMatrixSample& h, double t, double tol) {
    return propagate(h, t, tol).psi;
}

Eigen::VectorXcd dense_expm_oracle(const BandMatrixSample& h, double t) {
    if (h.size() > kDenseCap) throw ResourceLimitError("dense_expm_oracle limited to N^d <= 4096");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(densify(h));
    const Eigen::MatrixXcd& u = eig.eigenvectors();
    Eigen::VectorXcd coeffs = u.row(0).adjoint();
    for (Index k = 0; k < coeffs.size(); ++k) coeffs[k] *= std::polar(1.0, -0.5 * t * eig.eigenvalues()[k]);
    return u * coeffs;
}

Eigen::VectorXd dense_spectrum(const BandMatrixSample& h) {
    if (h.size() > kDenseCap) throw ResourceLimitError("dense_spectrum limited to N^d <= 4096");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(densify(h), Eigen::EigenvaluesOnly);
    return eig.eigenvalues();
}

}  // namespace qdiff

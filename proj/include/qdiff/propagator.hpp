#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "qdiff/band_matrix.hpp"

namespace qdiff {

/// alpha_k(t) = (2/pi) ∫_{-1}^{1} sqrt(1 - z^2) e^{-itz} U_k(z) dz, evaluated by
/// Gauss–Chebyshev quadrature of the second kind with
/// max(64, 2k + 2 ceil|t|) + 16 nodes.
Complex alpha_coeff(int k, double t);

/// Closed form 2 (-i)^k (k+1) J_{k+1}(t) / t. Independent cross-check for alpha_coeff.
Complex alpha_coeff_bessel(int k, double t);

/// Upper bound on |alpha_j(t)|: 2(j+1) min(1, 2 e^{j+1} |t|^j / (2j+2)^{j+1}).
double alpha_bound(int j, double t);

/// Certified bound on sum_{k > last} |alpha_{m+2k}(t)| / (M-1)^k.
double a_series_tail(int m, int last, double t, int band_count);

/// a_m(t) = sum_{k>=0} alpha_{m+2k}(t) / (M-1)^k, truncated once the
/// certified tail drops below tol.
Complex a_coeff(int m, double t, int band_count, double tol);

/// How alpha_k(t) is evaluated when tabulating. Quadrature carries ~1e-16
/// absolute error; the Bessel form keeps relative accuracy for tiny |alpha_k|.
enum class AlphaMethod { Quadrature, Bessel };

/// Truncated {a_m(t)} for fixed t and M, with the alpha_k it was built from.
struct CoefficientTable {
    double t = 0.0;
    int band_count = 0;
    int m_max = 0;
    std::vector<Complex> alpha;  // alpha_0 .. alpha_K
    std::vector<Complex> a;      // a_0 .. a_{m_max}
    /// Bound on sum_{m > m_max} |a_m|^2 plus the per-coefficient truncation error.
    double tail_bound = 0.0;

    double sum_sq() const;
    /// max over tabulated m of |a_m| / (t^m / m!); the growth constant actually needed.
    double growth_constant() const;
};

CoefficientTable make_coefficient_table(double t, int band_count, int m_max, double coeff_tol = 1e-15,
                                        AlphaMethod method = AlphaMethod::Quadrature);

/// Expansion order used by propagate_column:
/// max(ceil(2 e |t|), 30) + 4 ceil(log10(1/tol)).
int propagation_order(double t, double tol);

/// Three-term recursion for H^{(m)} e_0:
///   v_0 = e_0, v_1 = H e_0, v_2 = H v_1 - M/(M-1) v_0, v_{m+1} = H v_m - v_{m-1}.
class NonBacktrackingColumn {
public:
    explicit NonBacktrackingColumn(const BandMatrixSample& h);

    int order() const { return order_; }
    const Eigen::VectorXcd& current() const { return cur_; }
    void advance();

private:
    const BandMatrixSample* h_;
    Eigen::VectorXcd prev_;
    Eigen::VectorXcd cur_;
    Eigen::VectorXcd scratch_;
    int order_ = 0;
};

/// v_0 .. v_{m_max} from the recursion.
std::vector<Eigen::VectorXcd> nb_column(const BandMatrixSample& h, int m_max);

/// H^{(n)} e_0 by explicit summation over non-backtracking band paths.
/// Limited to n <= 6, N^d <= 4096 and at most 5e7 paths.
Eigen::VectorXcd nb_power_bruteforce(const BandMatrixSample& h, int n);

/// Certified bound on |a_m(t)|: alpha_bound(m, t) plus the series tail.
double a_coeff_bound(int m, double t, int band_count);

struct Propagation {
    Eigen::VectorXcd psi;
    int m_max = 0;                  // order cap from propagation_order
    int m_used = 0;                 // highest order actually summed
    double truncation_bound = 0.0;  // sum over dropped orders of |a_m|-bound * ||v_m||
    double norm_error = 0.0;        // | ||psi||_2 - 1 |
};

/// psi = sum_{m <= m_used} a_m(t) H^{(m)} e_0 ≈ e^{-itH/2} e_0.
/// ||v_m|| is measured up to m_max first; the top orders are dropped while the
/// certified remainder stays <= tol/10, so coefficients below the quadrature
/// noise floor never multiply a growing v_m. Throws CheckFailure when the
/// a-posteriori norm check | ||psi|| - 1 | <= max(tol, 1e-13) fails.
Propagation propagate(const BandMatrixSample& h, double t, double tol);

Eigen::VectorXcd propagate_column(const BandMatrixSample& h, double t, double tol);

/// Eigendecomposition oracle U e^{-itΛ/2} U* e_0. Limited to N^d <= 4096.
Eigen::VectorXcd dense_expm_oracle(const BandMatrixSample& h, double t);

/// Eigenvalues of the densified H (ascending). Limited to N^d <= 4096.
Eigen::VectorXd dense_spectrum(const BandMatrixSample& h);

}  // namespace qdiff

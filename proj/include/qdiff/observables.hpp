#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "qdiff/band_matrix.hpp"
#include "qdiff/lattice.hpp"
#include "qdiff/rng.hpp"

namespace qdiff {

/// Macroscopic time T and exponent kappa. Microscopic time is W^{d kappa} T,
/// microscopic length is W^{1 + d kappa / 2} X.
struct ScalingParams {
    double T = 1.0;
    double kappa = 0.1;
    double horizon = 10.0;  // largest admissible T

    static ScalingParams make(double T, double kappa, double horizon = 10.0);

    double micro_time(int d, int w) const;
    double length_scale(int d, int w) const;

    bool operator==(const ScalingParams&) const = default;
};

/// Bounded test function on R^d.
///   constant:c     phi(X) = c
///   gaussian:s     phi(X) = exp(-|X|^2 / (2 s^2))
///   box:h          phi(X) = 1 if max_k |X_k| <= h else 0
///   cos:f          phi(X) = prod_k cos(2 pi f X_k)
struct TestFunction {
    enum class Kind { Constant, Gaussian, Box, Cosine };
    Kind kind = Kind::Constant;
    double param = 1.0;

    static TestFunction parse(std::string_view text);
    std::string descriptor() const;

    double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    double sup_norm() const;
    bool nonnegative() const;

    /// phi(c .), in the same family.
    TestFunction dilated(double c) const;

    bool operator==(const TestFunction&) const = default;
};

struct TransitionProfile {
    LatticeConfig cfg;
    double t = 0.0;
    SeedSpec seed;
    int m_max = 0;
    Eigen::VectorXd p;  // P(t, x) by linear site index

    double mass() const { return p.sum(); }
};

/// P(t, x) = |(e^{-itH/2})_{0x}|^2. Throws CheckFailure if the propagator's
/// norm check fails.
TransitionProfile transition_profile(const BandMatrixSample& h, double t, double tol);

/// phi(x / scale) for every site, x in canonical signed coordinates.
Eigen::VectorXd observable_weights(const LatticeConfig& cfg, const TestFunction& phi, double scale);

struct YValue {
    double value = 0.0;
    double mass = 0.0;  // sum_x P(t, x); a normalization diagnostic
};

/// Y = sum_x P(t, x) phi(x / W^{1 + d kappa / 2}).
YValue y_observable(const TransitionProfile& profile, const TestFunction& phi, int w, double kappa);

struct VarianceReport {
    int w = 0;
    int n = 0;
    int d = 0;
    double kappa = 0.0;
    double T = 0.0;
    double t = 0.0;
    std::string phi;
    int replicas = 0;
    double mean = 0.0;
    double variance = 0.0;
    double variance_se = 0.0;  // jackknife; NaN for R = 2
    std::uint64_t master_seed = 0;
    double wall_time = 0.0;    // seconds
    int failed_replicas = 0;
    bool valid = true;
    std::vector<std::string> warnings;
    std::vector<double> samples;  // Y per replica, replica-index order
};

struct McOptions {
    int jobs = 1;
    double tol = 1e-12;
};

/// Var(Y) over R independent samples of H. Replica r uses SeedSpec{master_seed, r};
/// results are reduced in replica order, so output does not depend on jobs.
VarianceReport mc_variance(const LatticeConfig& cfg, const ScalingParams& sp, const TestFunction& phi,
                           int replicas, std::uint64_t master_seed, const McOptions& opts = {});

struct SampleVariance {
    double mean = 0.0;
    double variance = 0.0;
    double jackknife_se = 0.0;
};

/// Unbiased variance and its delete-one jackknife standard error.
SampleVariance sample_variance(const std::vector<double>& y);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

/// Weighted least squares y ≈ intercept + slope x; slope_se assumes the
/// weights are inverse variances.
LinearFit weighted_linear_fit(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y,
                              const Eigen::Ref<const Eigen::VectorXd>& weights);

/// Fit of log Var against log W with weights (Var/SE)^2 (the delta-method
/// inverse variance of log Var). Degenerate if any variance is <= 1e-18.
struct SlopeFit {
    bool degenerate = false;
    std::string message;
    LinearFit fit;
};

SlopeFit fit_variance_slope(const std::vector<int>& w, const std::vector<double>& var,
                            const std::vector<double>& se);

struct SweepSpec {
    std::vector<int> w_list;
    int d = 1;
    int min_n = 0;
    double beta_target = 0.3;
    double tolerance = 0.2;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<VarianceReport> reports;
    SlopeFit slope;
    bool valid = true;
    bool pass = false;  // slope <= -d beta_target + tolerance, or every variance <= 1e-18
};

/// Smallest admissible N for width w: max(min_n, 2w + 2, ceil(w^{1 + d/6})).
int sweep_lattice_size(int d, int w, int min_n);

SweepResult scaling_sweep(const SweepSpec& spec, const ScalingParams& sp, const TestFunction& phi,
                          int replicas, std::uint64_t master_seed, const McOptions& opts = {});

}  // namespace qdiff

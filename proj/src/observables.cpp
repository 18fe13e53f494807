#include "qdiff/observables.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "qdiff/errors.hpp"
#include "qdiff/propagator.hpp"

namespace qdiff {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v))
        throw ConfigError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
    return v;
}

}  // namespace

ScalingParams ScalingParams::make(double T, double kappa, double horizon) {
    if (!(kappa > 0.0 && kappa < 1.0 / 3.0)) throw ConfigError("kappa must lie in (0, 1/3)");
    if (!(T >= 0.0)) throw ConfigError("T must be >= 0");
    if (!(T <= horizon)) throw ConfigError("T exceeds the study horizon " + shortest(horizon));
    return ScalingParams{T, kappa, horizon};
}

double ScalingParams::micro_time(int d, int w) const { return std::pow(double(w), d * kappa) * T; }

double ScalingParams::length_scale(int d, int w) const {
    return std::pow(double(w), 1.0 + d * kappa / 2.0);
}

TestFunction TestFunction::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ConfigError("test function must be kind:param, got '" + std::string(text) + "'");
    const std::string_view kind = text.substr(0, colon);
    const double param = parse_double(text.substr(colon + 1), "test function parameter");
    TestFunction phi;
    phi.param = param;
    if (kind == "const" || kind == "constant") {
        phi.kind = Kind::Constant;
    } else if (kind == "gaussian") {
        if (!(param > 0.0)) throw ConfigError("gaussian width must be > 0");
        phi.kind = Kind::Gaussian;
    } else if (kind == "box") {
        if (!(param >= 0.0)) throw ConfigError("box half-width must be >= 0");
        phi.kind = Kind::Box;
    } else if (kind == "cos") {
        phi.kind = Kind::Cosine;
    } else {
        throw ConfigError("unknown test function kind '" + std::string(kind) + "'");
    }
    return phi;
}

std::string TestFunction::descriptor() const {
    switch (kind) {
        case Kind::Constant: return "const:" + shortest(param);
        case Kind::Gaussian: return "gaussian:" + shortest(param);
        case Kind::Box: return "box:" + shortest(param);
        case Kind::Cosine: return "cos:" + shortest(param);
    }
    return {};
}

double TestFunction::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    switch (kind) {
        case Kind::Constant: return param;
        case Kind::Gaussian: return std::exp(-x.squaredNorm() / (2.0 * param * param));
        case Kind::Box: return x.cwiseAbs().maxCoeff() <= param ? 1.0 : 0.0;
        case Kind::Cosine: {
            double acc = 1.0;
            for (Eigen::Index k = 0; k < x.size(); ++k) acc *= std::cos(2.0 * std::numbers::pi * param * x[k]);
            return acc;
        }
    }
    return 0.0;
}

double TestFunction::sup_norm() const { return kind == Kind::Constant ? std::abs(param) : 1.0; }

bool TestFunction::nonnegative() const {
    return kind == Kind::Gaussian || kind == Kind::Box || (kind == Kind::Constant && param >= 0.0);
}

TestFunction TestFunction::dilated(double c) const {
    if (!(c > 0.0)) throw ConfigError("dilation factor must be > 0");
    TestFunction out = *this;
    switch (kind) {
        case Kind::Constant: break;
        case Kind::Gaussian: out.param = param / c; break;
        case Kind::Box: out.param = param / c; break;
        case Kind::Cosine: out.param = param * c; break;
    }
    return out;
}

TransitionProfile transition_profile(const BandMatrixSample& h, double t, double tol) {
    if (!(tol > 0.0)) throw ConfigError("transition_profile: tol must be > 0");
    const Propagation prop = propagate(h, t, tol);
    TransitionProfile out;
    out.cfg = h.config();
    out.t = t;
    out.seed = h.seed();
    out.m_max = prop.m_max;
    out.p = prop.psi.cwiseAbs2();
    return out;
}

Eigen::VectorXd observable_weights(const LatticeConfig& cfg, const TestFunction& phi, double scale) {
    if (!(scale > 0.0)) throw ConfigError("observable scale must be > 0");
    const Index vol = cfg.volume();
    Eigen::VectorXd out(vol);
    for (Index idx = 0; idx < vol; ++idx) out[idx] = phi(site_at(cfg, idx).cast<double>() / scale);
    return out;
}

YValue y_observable(const TransitionProfile& profile, const TestFunction& phi, int w, double kappa) {
    const double scale = std::pow(double(w), 1.0 + profile.cfg.d * kappa / 2.0);
    const Eigen::VectorXd weights = observable_weights(profile.cfg, phi, scale);
    return {profile.p.dot(weights), profile.mass()};
}

SampleVariance sample_variance(const std::vector<double>& y) {
    const std::size_t n = y.size();
    if (n < 2) throw ConfigError("sample variance needs at least 2 samples");
    SampleVariance out;
    for (double v : y) out.mean += v;
    out.mean /= n;
    double ss = 0.0;
    for (double v : y) ss += (v - out.mean) * (v - out.mean);
    out.variance = ss / (n - 1);
    if (n < 3) {
        out.jackknife_se = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    // Leave-one-out: sum_{j != i} (y_j - mean_{(i)})^2 = ss - n/(n-1) (y_i - mean)^2.
    std::vector<double> loo(n);
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dev = y[i] - out.mean;
        loo[i] = std::max(0.0, ss - double(n) / (n - 1) * dev * dev) / (n - 2);
        loo_mean += loo[i];
    }
    loo_mean /= n;
    double acc = 0.0;
    for (double v : loo) acc += (v - loo_mean) * (v - loo_mean);
    out.jackknife_se = std::sqrt(double(n - 1) / n * acc);
    return out;
}

VarianceReport mc_variance(const LatticeConfig& cfg, const ScalingParams& sp, const TestFunction& phi,
                           int replicas, std::uint64_t master_seed, const McOptions& opts) {
    if (replicas < 2) throw ConfigError("mc_variance: replica count must be >= 2");
    if (opts.jobs < 1) throw ConfigError("mc_variance: jobs must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    VarianceReport report;
    report.w = cfg.w;
    report.n = cfg.n;
    report.d = cfg.d;
    report.kappa = sp.kappa;
    report.T = sp.T;
    report.t = sp.micro_time(cfg.d, cfg.w);
    report.phi = phi.descriptor();
    report.replicas = replicas;
    report.master_seed = master_seed;
    if (cfg.n < std::pow(double(cfg.w), 1.0 + cfg.d / 6.0))
        report.warnings.push_back("N below W^{1+d/6}; outside the regime of the variance bound");

    const BandProfile profile(cfg);
    const Eigen::VectorXd weights = observable_weights(cfg, phi, sp.length_scale(cfg.d, cfg.w));
    std::vector<double> values(replicas, std::numeric_limits<double>::quiet_NaN());
    std::vector<char> failed(replicas, 0);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < replicas; r = next++) {
            try {
                const BandMatrixSample h = sample_band_matrix(profile, SeedSpec{master_seed, std::uint64_t(r)});
                const Propagation prop = propagate(h, report.t, opts.tol);
                values[r] = prop.psi.cwiseAbs2().dot(weights);
            } catch (const CheckFailure&) {
                failed[r] = 1;
            }
        }
    };
    const int jobs = std::min(opts.jobs, replicas);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (char f : failed) report.failed_replicas += f;
    report.samples = values;
    if (report.failed_replicas > 0) {
        report.valid = false;
        report.mean = report.variance = report.variance_se = std::numeric_limits<double>::quiet_NaN();
    } else {
        const SampleVariance sv = sample_variance(values);
        report.mean = sv.mean;
        report.variance = sv.variance;
        report.variance_se = sv.jackknife_se;
        const double bound = phi.sup_norm() * phi.sup_norm();
        if (report.variance > bound * (1.0 + 1e-12)) {
            report.valid = false;
            report.warnings.push_back("variance exceeds sup|phi|^2");
        }
    }
    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

LinearFit weighted_linear_fit(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& y,
                              const Eigen::Ref<const Eigen::VectorXd>& weights) {
    if (x.size() != y.size() || x.size() != weights.size()) throw ConfigError("fit: length mismatch");
    if (x.size() < 2) throw ConfigError("fit: need at least 2 points");
    if ((weights.array() <= 0.0).any() || !weights.allFinite()) throw ConfigError("fit: weights must be positive and finite");
    const double sw = weights.sum();
    const double xm = weights.dot(x) / sw;
    const double ym = weights.dot(y) / sw;
    const Eigen::ArrayXd dx = x.array() - xm;
    const double sxx = (weights.array() * dx * dx).sum();
    if (!(sxx > 0.0)) throw ConfigError("fit: x values are all equal");
    LinearFit fit;
    fit.slope = (weights.array() * dx * (y.array() - ym)).sum() / sxx;
    fit.intercept = ym - fit.slope * xm;
    fit.slope_se = std::sqrt(1.0 / sxx);
    return fit;
}

SlopeFit fit_variance_slope(const std::vector<int>& w, const std::vector<double>& var,
                            const std::vector<double>& se) {
    if (w.size() != var.size() || w.size() != se.size()) throw ConfigError("slope fit: length mismatch");
    SlopeFit out;
    for (double v : var) {
        if (!(v > 1e-18)) {
            out.degenerate = true;
            out.message = "degenerate: zero variance";
            out.fit.slope = out.fit.intercept = out.fit.slope_se = std::numeric_limits<double>::quiet_NaN();
            return out;
        }
    }
    const Eigen::Index n = static_cast<Eigen::Index>(w.size());
    Eigen::VectorXd x(n), y(n), wt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = std::log(double(w[i]));
        y[i] = std::log(var[i]);
        const double rel = se[i] / var[i];
        wt[i] = rel > 0.0 && std::isfinite(rel) ? 1.0 / (rel * rel) : 1.0;
    }
    out.fit = weighted_linear_fit(x, y, wt);
    return out;
}

int sweep_lattice_size(int d, int w, int min_n) {
    const int need = static_cast<int>(std::ceil(std::pow(double(w), 1.0 + d / 6.0) - 1e-9));
    return std::max({min_n, 2 * w + 2, need});
}

SweepResult scaling_sweep(const SweepSpec& spec, const ScalingParams& sp, const TestFunction& phi,
                          int replicas, std::uint64_t master_seed, const McOptions& opts) {
    if (spec.w_list.size() < 2) throw ConfigError("scaling sweep needs at least 2 widths");
    for (std::size_t i = 1; i < spec.w_list.size(); ++i)
        if (spec.w_list[i] <= spec.w_list[i - 1]) throw ConfigError("W list must be strictly increasing");

    SweepResult out;
    out.spec = spec;
    std::vector<double> var, se;
    for (int w : spec.w_list) {
        const LatticeConfig cfg = LatticeConfig::make(spec.d, sweep_lattice_size(spec.d, w, spec.min_n), w);
        out.reports.push_back(mc_variance(cfg, sp, phi, replicas, master_seed, opts));
        out.valid = out.valid && out.reports.back().valid;
        var.push_back(out.reports.back().variance);
        se.push_back(out.reports.back().variance_se);
    }
    if (!out.valid) {
        out.slope.message = "invalid: a variance report failed";
        out.slope.fit.slope = out.slope.fit.intercept = out.slope.fit.slope_se = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.slope = fit_variance_slope(spec.w_list, var, se);
    const bool all_zero = std::all_of(var.begin(), var.end(), [](double v) { return v <= 1e-18; });
    out.pass = out.slope.degenerate ? all_zero
                                    : out.slope.fit.slope <= -spec.d * spec.beta_target + spec.tolerance;
    return out;
}

}  // namespace qdiff

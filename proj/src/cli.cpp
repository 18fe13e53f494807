#include "qdiff/cli.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "qdiff/covariance.hpp"
#include "qdiff/diagram_checks.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/observables.hpp"
#include "qdiff/propagator.hpp"
#include "qdiff/records.hpp"
#include "qdiff/rng.hpp"
#include "qdiff/skeleton.hpp"

namespace qdiff {

namespace {

constexpr double kLumpingTolerance = 1e-10;

struct Session {
    RunConfig cfg;
    std::string csv_path;
    std::vector<ResultRecord> records;

    ResultRecord& add(std::string kind, Json metrics, bool pass) {
        ResultRecord r;
        r.kind = std::move(kind);
        r.config = to_json(cfg);
        r.metrics = std::move(metrics);
        r.pass = pass;
        r.timestamp = iso_timestamp();
        r.generator_version = kGeneratorVersion;
        records.push_back(std::move(r));
        return records.back();
    }
};

Json bridges_json(const Pairing& p) {
    Json out = Json::array();
    for (auto [e, f] : p.bridges()) out.push_back({e, f});
    return out;
}

void run_coeffs(Session& s) {
    const int M = band_count(s.cfg.d, s.cfg.w);
    const CoefficientTable table = make_coefficient_table(s.cfg.t, M, s.cfg.m_max);
    Json m;
    m["t"] = table.t;
    m["M"] = M;
    std::vector<int> idx;
    std::vector<double> re, im;
    for (int k = 0; k <= table.m_max; ++k) {
        idx.push_back(k);
        re.push_back(table.a[k].real());
        im.push_back(table.a[k].imag());
    }
    m["m"] = idx;
    m["a_re"] = re;
    m["a_im"] = im;
    m["sum_sq"] = table.sum_sq();
    m["tail_bound"] = table.tail_bound;
    const bool pass = std::abs(table.sum_sq() - 1.0) <= 10.0 / M;
    s.add("coeffs", std::move(m), pass);
}

void run_propagate(Session& s) {
    const LatticeConfig cfg = LatticeConfig::make(s.cfg.d, s.cfg.n, s.cfg.w);
    const BandMatrixSample h = sample_band_matrix(cfg, SeedSpec{s.cfg.seed, 0});
    const Propagation prop = propagate(h, s.cfg.t, s.cfg.tol);
    Json m;
    m["t"] = s.cfg.t;
    m["m_max"] = prop.m_max;
    m["m_used"] = prop.m_used;
    m["truncation_bound"] = prop.truncation_bound;
    m["norm_error"] = prop.norm_error;
    std::vector<std::int64_t> x(prop.psi.size());
    std::vector<double> p(prop.psi.size());
    double mass = 0.0;
    for (Eigen::Index i = 0; i < prop.psi.size(); ++i) {
        x[i] = i;
        p[i] = std::norm(prop.psi[i]);
        mass += p[i];
    }
    m["mass"] = mass;
    m["x"] = x;
    m["p"] = p;
    s.add("propagate", std::move(m), true);
}

void run_mc_var(Session& s) {
    const LatticeConfig cfg = LatticeConfig::make(s.cfg.d, s.cfg.n, s.cfg.w);
    const ScalingParams sp = ScalingParams::make(s.cfg.T, s.cfg.kappa);
    const TestFunction phi = TestFunction::parse(s.cfg.phi);
    const VarianceReport r = mc_variance(cfg, sp, phi, s.cfg.replicas, s.cfg.seed, {s.cfg.jobs, s.cfg.tol});
    s.add("mc-var", variance_metrics(r), r.valid);
}

void run_scaling(Session& s) {
    const ScalingParams sp = ScalingParams::make(s.cfg.T, s.cfg.kappa);
    const TestFunction phi = TestFunction::parse(s.cfg.phi);
    SweepSpec spec;
    spec.w_list = s.cfg.w_list;
    spec.d = s.cfg.d;
    spec.min_n = s.cfg.n;
    spec.beta_target = s.cfg.beta_target;
    spec.tolerance = s.cfg.slope_tolerance;
    const SweepResult res = scaling_sweep(spec, sp, phi, s.cfg.replicas, s.cfg.seed, {s.cfg.jobs, s.cfg.tol});
    std::vector<int> ns;
    std::vector<double> var, se;
    for (const VarianceReport& r : res.reports) {
        s.add("mc-var", variance_metrics(r), r.valid);
        ns.push_back(r.n);
        var.push_back(r.variance);
        se.push_back(r.variance_se);
    }
    auto finite = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
    Json m;
    m["w_list"] = spec.w_list;
    m["n_list"] = ns;
    m["variance"] = var;
    m["variance_se"] = se;
    m["slope"] = finite(res.slope.fit.slope);
    m["slope_se"] = finite(res.slope.fit.slope_se);
    m["intercept"] = finite(res.slope.fit.intercept);
    m["threshold"] = -spec.d * spec.beta_target + spec.tolerance;
    m["degenerate"] = res.slope.degenerate;
    m["message"] = res.slope.message;
    m["valid"] = res.valid;
    s.add("scaling", std::move(m), res.pass);
}

std::array<int, 4> chain_tuple(const RunConfig& c) {
    if (c.chain_lengths.size() != 4) throw ConfigError("--n expects n11,n12,n21,n22");
    return {c.chain_lengths[0], c.chain_lengths[1], c.chain_lengths[2], c.chain_lengths[3]};
}

void run_verify_lumping(Session& s) {
    const LatticeConfig cfg = LatticeConfig::make(s.cfg.d, s.cfg.n, s.cfg.w);
    const BandProfile profile(cfg);
    const ChainGraph g = ChainGraph::make(chain_tuple(s.cfg));
    const int M = profile.band_count();
    const Index V = cfg.volume();
    for (auto y : {s.cfg.y1, s.cfg.y2})
        if (y && (*y < 0 || *y >= V)) throw ConfigError("summit label outside the lattice");

    const auto brute = covariance_table_bruteforce(profile, g);
    const auto lumps = covariance_table_via_lumpings(profile, g);
    double worst = -1.0, lhs = 0.0, rhs = 0.0;
    Index wy1 = 0, wy2 = 0;
    std::int64_t pairs = 0;
    for (Index y1 = 0; y1 < V; ++y1) {
        if (s.cfg.y1 && y1 != *s.cfg.y1) continue;
        for (Index y2 = 0; y2 < V; ++y2) {
            if (s.cfg.y2 && y2 != *s.cfg.y2) continue;
            const double a = lumps[y1 * V + y2].value(M);
            const double b = brute[y1 * V + y2].value(M);
            ++pairs;
            if (std::abs(a - b) > worst) {
                worst = std::abs(a - b);
                lhs = a;
                rhs = b;
                wy1 = y1;
                wy2 = y2;
            }
        }
    }
    Json m;
    m["instance"] = {{"chain_lengths", s.cfg.chain_lengths}, {"d", cfg.d}, {"lattice_n", cfg.n}, {"w", cfg.w},
                     {"y1", wy1}, {"y2", wy2}, {"pairs", pairs}};
    m["lhs"] = lhs;
    m["rhs"] = rhs;
    m["abs_error"] = worst;
    m["pass"] = worst <= kLumpingTolerance;
    const bool pass = m["pass"].get<bool>();
    s.add("verify-lumping", std::move(m), pass);
}

void run_skeletons(Session& s) {
    std::map<std::string, bool> want{{"two-thirds", false}, {"count", false}, {"adjacency", false}};
    for (const std::string& c : s.cfg.checks) {
        auto it = want.find(c);
        if (it == want.end()) throw ConfigError("unknown check " + c);
        it->second = true;
    }
    if (s.cfg.max_bridges < 1) throw ConfigError("--max-bridges must be >= 1");
    for (int m = 1; m <= s.cfg.max_bridges; ++m) {
        const auto skeletons = enumerate_skeletons(m);
        const int bound = orbit_bound(m);
        if (want["two-thirds"] || want["adjacency"]) {
            for (std::size_t id = 0; id < skeletons.size(); ++id) {
                const Skeleton& sk = skeletons[id];
                const int L = orbit_partition(sk).free_orbits;
                const auto n = sk.graph.lengths();
                Json metrics;
                metrics["instance"] = {{"bridges_count", m},
                                       {"skeleton_id", id},
                                       {"chain_lengths", std::vector<int>(n.begin(), n.end())},
                                       {"bridges", bridges_json(sk.pairing)}};
                bool pass = true;
                if (want["two-thirds"]) {
                    metrics["lhs"] = L;
                    metrics["rhs"] = bound;
                    metrics["abs_error"] = std::max(0, L - bound);
                    pass = pass && L <= bound;
                }
                if (want["adjacency"]) {
                    const bool ok = adjacency_ok(sk);
                    metrics["adjacency"] = ok;
                    pass = pass && ok;
                }
                metrics["pass"] = pass;
                s.add("skeleton", std::move(metrics), pass);
            }
        }
        if (want["count"]) {
            std::int64_t bound_count = 1;
            for (int k = 1; k <= m; ++k) bound_count *= 2 * k;
            const auto count = static_cast<std::int64_t>(skeletons.size());
            Json metrics;
            metrics["instance"] = {{"bridges_count", m}};
            metrics["lhs"] = count;
            metrics["rhs"] = bound_count;
            metrics["abs_error"] = std::max<std::int64_t>(0, count - bound_count);
            metrics["pass"] = count <= bound_count;
            const bool pass = count <= bound_count;
            s.add("skeleton-count", std::move(metrics), pass);
        }
    }
}

void run_r_value(Session& s) {
    const int m = static_cast<int>(s.cfg.multiplicity.size());
    if (m < 1) throw ConfigError("--l needs one multiplicity per bridge");
    const auto skeletons = enumerate_skeletons(m);
    if (s.cfg.skeleton_id < 0 || s.cfg.skeleton_id >= static_cast<int>(skeletons.size()))
        throw ConfigError("--skeleton-id out of range for " + std::to_string(m) + " bridges");
    const Skeleton& sk = skeletons[s.cfg.skeleton_id];
    const LatticeConfig cfg = LatticeConfig::make(s.cfg.d, s.cfg.n, s.cfg.w);
    const BandProfile profile(cfg);
    const double M = profile.band_count();
    int total = 0;
    for (int v : s.cfg.multiplicity) total += v;
    const double lhs = r_value(profile, sk, s.cfg.multiplicity);
    const double rhs = std::pow(M / (M - 1.0), total) * std::pow(M, -m / 3.0 + 2.0 / 3.0);
    const auto n = sk.graph.lengths();
    Json metrics;
    metrics["instance"] = {{"skeleton_id", s.cfg.skeleton_id},
                           {"chain_lengths", std::vector<int>(n.begin(), n.end())},
                           {"bridges", bridges_json(sk.pairing)},
                           {"multiplicity", s.cfg.multiplicity},
                           {"d", cfg.d},
                           {"lattice_n", cfg.n},
                           {"w", cfg.w}};
    metrics["lhs"] = lhs;
    metrics["rhs"] = rhs;
    metrics["abs_error"] = std::max(0.0, lhs - rhs);
    metrics["pass"] = lhs <= rhs;
    s.add("r-value", std::move(metrics), lhs <= rhs);
}

void print_error(std::ostream& err, const char* kind, const std::string& message, int code) {
    Json j;
    j["error"] = kind;
    j["message"] = message;
    j["exit_code"] = code;
    err << j.dump() << '\n';
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !is.eof()) throw ConfigError(std::string(flag) + ": bad list item '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Session s;
    RunConfig& c = s.cfg;
    std::string w_list, chain_list, l_list, check_list = "two-thirds,count,adjacency";
    std::int64_t y1 = -1, y2 = -1;

    CLI::App app{"Random band matrix quantum diffusion experiments", "qdiff"};
    app.require_subcommand(1);

    auto lattice = [&](CLI::App* sub, bool with_n) {
        sub->add_option("--d", c.d, "lattice dimension");
        if (with_n) sub->add_option("--n", c.n, "lattice side N");
        sub->add_option("--w", c.w, "band width W");
    };
    auto output = [&](CLI::App* sub) {
        sub->add_option("--out", c.out, "results file (JSON lines); '-' disables");
    };

    CLI::App* coeffs = app.add_subcommand("coeffs", "expansion coefficients a_m(t)");
    lattice(coeffs, false);
    coeffs->add_option("--t", c.t, "time");
    coeffs->add_option("--m-max", c.m_max, "highest order");
    output(coeffs);

    CLI::App* prop = app.add_subcommand("propagate", "transition profile of one sample");
    lattice(prop, true);
    prop->add_option("--t", c.t, "time");
    prop->add_option("--seed", c.seed, "master seed");
    prop->add_option("--tol", c.tol, "truncation tolerance");
    prop->add_option("--csv", s.csv_path, "write x,p plot data");
    output(prop);

    CLI::App* mc = app.add_subcommand("mc-var", "Monte Carlo variance of Y_T(phi)");
    lattice(mc, true);
    for (CLI::App* sub : {mc}) {
        sub->add_option("--kappa", c.kappa, "scaling exponent");
        sub->add_option("--T", c.T, "macroscopic time");
        sub->add_option("--phi", c.phi, "test function kind:param");
        sub->add_option("--replicas", c.replicas, "number of samples");
        sub->add_option("--seed", c.seed, "master seed");
        sub->add_option("--tol", c.tol, "truncation tolerance");
        sub->add_option("--jobs", c.jobs, "worker threads");
    }
    mc->add_option("--csv", s.csv_path, "write w,var,se,r,seed plot data");
    output(mc);

    CLI::App* sc = app.add_subcommand("scaling", "variance sweep over W and log-log slope");
    sc->add_option("--d", c.d, "lattice dimension");
    sc->add_option("--n", c.n, "smallest lattice side");
    sc->add_option("--w-list", w_list, "comma-separated band widths")->required();
    sc->add_option("--kappa", c.kappa, "scaling exponent");
    sc->add_option("--T", c.T, "macroscopic time");
    sc->add_option("--phi", c.phi, "test function kind:param");
    sc->add_option("--replicas", c.replicas, "samples per width");
    sc->add_option("--seed", c.seed, "master seed");
    sc->add_option("--tol", c.tol, "truncation tolerance");
    sc->add_option("--jobs", c.jobs, "worker threads");
    sc->add_option("--beta-target", c.beta_target, "target exponent beta");
    sc->add_option("--slope-tolerance", c.slope_tolerance, "allowed excess over -d beta");
    sc->add_option("--csv", s.csv_path, "write w,var,se,r,seed plot data");
    output(sc);

    CLI::App* diag = app.add_subcommand("diagrams", "diagrammatic identities and bounds");
    diag->require_subcommand(1);

    CLI::App* vl = diag->add_subcommand("verify-lumping", "lumping identity against brute force");
    vl->add_option("--n", chain_list, "chain lengths n11,n12,n21,n22")->required();
    vl->add_option("--d", c.d, "lattice dimension");
    vl->add_option("--lattice-n", c.n, "lattice side N");
    vl->add_option("--w", c.w, "band width W");
    vl->add_option("--y1", y1, "first summit label (default: all)");
    vl->add_option("--y2", y2, "second summit label (default: all)");
    output(vl);

    CLI::App* sk = diag->add_subcommand("skeletons", "skeleton enumeration checks");
    sk->add_option("--max-bridges", c.max_bridges, "largest number of bridges");
    sk->add_option("--check", check_list, "two-thirds,count,adjacency");
    output(sk);

    CLI::App* rv = diag->add_subcommand("r-value", "orbit label sum R for one skeleton");
    rv->add_option("--skeleton-id", c.skeleton_id, "index into the skeleton enumeration")->required();
    rv->add_option("--l", l_list, "multiplicity per bridge")->required();
    lattice(rv, true);
    output(rv);

    std::vector<std::string> argv_store{"qdiff"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const std::string& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        print_error(err, "usage", e.what(), 2);
        return 2;
    }

    try {
        void (*action)(Session&) = nullptr;
        if (*coeffs) {
            c.subcommand = "coeffs";
            action = run_coeffs;
        } else if (*prop) {
            c.subcommand = "propagate";
            action = run_propagate;
        } else if (*mc) {
            c.subcommand = "mc-var";
            action = run_mc_var;
        } else if (*sc) {
            c.subcommand = "scaling";
            if (sc->count("--n") == 0) c.n = 512;
            c.w_list = parse_list<int>(w_list, "--w-list");
            action = run_scaling;
        } else if (*vl) {
            c.subcommand = "diagrams verify-lumping";
            if (vl->count("--lattice-n") == 0) c.n = 5;
            if (vl->count("--w") == 0) c.w = 2;
            c.chain_lengths = parse_list<int>(chain_list, "--n");
            if (y1 >= 0) c.y1 = y1;
            if (y2 >= 0) c.y2 = y2;
            action = run_verify_lumping;
        } else if (*sk) {
            c.subcommand = "diagrams skeletons";
            c.checks = parse_list<std::string>(check_list, "--check");
            action = run_skeletons;
        } else if (*rv) {
            c.subcommand = "diagrams r-value";
            c.multiplicity = parse_list<int>(l_list, "--l");
            action = run_r_value;
        }
        action(s);

        if (c.out != "-") append_records(results_path(c.out), s.records);
        if (!s.csv_path.empty()) {
            std::vector<ResultRecord> plot;
            for (const ResultRecord& r : s.records)
                if (r.kind == "mc-var" || r.kind == "propagate") plot.push_back(r);
            emit_plot_data(plot, s.csv_path);
        }
        bool all_pass = true;
        for (const ResultRecord& r : s.records) {
            out << to_json(r).dump() << '\n';
            all_pass = all_pass && r.pass;
        }
        return all_pass ? 0 : 1;
    } catch (const ConfigError& e) {
        print_error(err, "config", e.what(), 2);
        return 2;
    } catch (const ResourceLimitError& e) {
        print_error(err, "resource-limit", e.what(), 3);
        return 3;
    } catch (const CheckFailure& e) {
        print_error(err, "check-failure", e.what(), 1);
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        print_error(err, "config", e.what(), 2);
        return 2;
    }
}

}  // namespace qdiff

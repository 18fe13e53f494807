#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "qdiff/cli.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/records.hpp"

using namespace qdiff;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qdiff_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<Json> lines(const std::string& text) {
    std::vector<Json> v;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) v.push_back(Json::parse(line));
    return v;
}

std::vector<double> csv_column(const std::string& csv, int col) {
    std::vector<double> v;
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string cell;
        for (int i = 0; i <= col; ++i) std::getline(ls, cell, ',');
        v.push_back(std::stod(cell));
    }
    return v;
}

}  // namespace

TEST_CASE("run config round trip") {
    RunConfig c;
    c.subcommand = "scaling";
    c.w_list = {8, 12, 16};
    c.seed = 18446744073709551615ULL;
    c.tol = 1.0 / 3.0;
    c.kappa = 0.1;
    c.y1 = 3;
    c.checks = {"count"};
    c.multiplicity = {1, 2};
    const Json j = to_json(c);
    CHECK(run_config_from_json(Json::parse(j.dump())) == c);
    Json broken = j;
    broken.erase("kappa");
    CHECK_THROWS_AS(run_config_from_json(broken), ConfigError);
}

TEST_CASE("result record round trip") {
    ResultRecord r;
    r.kind = "coeffs";
    r.config = to_json(RunConfig{});
    r.metrics = {{"x", 1.5}};
    r.pass = true;
    r.timestamp = iso_timestamp();
    r.generator_version = "g";
    const ResultRecord back = result_record_from_json(Json::parse(to_json(r).dump()));
    CHECK(to_json(back) == to_json(r));
    CHECK(r.timestamp.size() == 20);
    CHECK(r.timestamp.back() == 'Z');
}

TEST_CASE("plot data") {
    const fs::path dir = scratch_dir("plot");
    const fs::path out = dir / "r.jsonl";
    const auto o = invoke({"scaling", "--w-list", "2,3,4,5,6", "--n", "33", "--replicas", "6", "--out", out.string()});
    CHECK(o.code <= 1);
    std::vector<ResultRecord> mc, all = read_records(out);
    const ResultRecord* sweep = nullptr;
    for (const auto& r : all) {
        if (r.kind == "mc-var") mc.push_back(r);
        if (r.kind == "scaling") sweep = &r;
    }
    REQUIRE(mc.size() == 5);
    REQUIRE(sweep);
    const std::string csv = plot_csv(mc);
    CHECK(csv.rfind("w,var,se,r,seed\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

    // Re-importing the CSV reproduces the slope fit.
    const auto w = csv_column(csv, 0), var = csv_column(csv, 1), se = csv_column(csv, 2);
    std::vector<int> wi(w.begin(), w.end());
    const SlopeFit refit = fit_variance_slope(wi, var, se);
    CHECK(std::abs(refit.fit.slope - sweep->metrics.at("slope").get<double>()) <= 1e-12);

    std::vector<ResultRecord> mixed = mc;
    mixed.push_back(*sweep);
    CHECK_THROWS_AS(plot_csv(mixed), ConfigError);
    CHECK_THROWS_AS(plot_csv({}), ConfigError);
}

TEST_CASE("transition profile plot at t = 0") {
    const fs::path dir = scratch_dir("profile");
    const auto o = invoke({"propagate", "--t", "0", "--n", "9", "--w", "2", "--out", "-", "--csv", (dir / "p.csv").string()});
    CHECK(o.code == 0);
    std::ifstream f(dir / "p.csv");
    std::stringstream ss;
    ss << f.rdbuf();
    const auto p = csv_column(ss.str(), 1);
    REQUIRE(p.size() == 9);
    CHECK(p[0] == 1.0);
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] == 0.0);
}

TEST_CASE("exit codes and diagnostics") {
    CHECK(invoke({"mc-var", "--phi", "const:1", "--n", "33", "--w", "4", "--replicas", "4", "--out", "-"}).code == 0);
    const auto usage = invoke({"mc-var", "--bogus", "1"});
    CHECK(usage.code == 2);
    const Json diag = Json::parse(usage.err);
    CHECK(diag.at("exit_code") == 2);
    CHECK(std::count(usage.err.begin(), usage.err.end(), '\n') == 1);
    CHECK(invoke({"mc-var", "--n", "3", "--w", "2", "--out", "-"}).code == 2);
    CHECK(invoke({"mc-var", "--kappa", "0.5", "--out", "-"}).code == 2);
    CHECK(invoke({"diagrams", "skeletons", "--max-bridges", "6", "--out", "-"}).code == 3);
    CHECK(invoke({"diagrams", "skeletons", "--max-bridges", "2", "--check", "count", "--out", "-"}).code == 1);
    CHECK(invoke({"diagrams", "skeletons", "--max-bridges", "2", "--check", "nope", "--out", "-"}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("skeleton records") {
    const auto o = invoke({"diagrams", "skeletons", "--max-bridges", "3", "--check", "two-thirds", "--out", "-"});
    CHECK(o.code == 0);
    const auto recs = lines(o.out);
    CHECK(recs.size() == 4 + 38 + 436);
    for (const Json& r : recs) {
        CHECK(r.at("pass") == true);
        CHECK(r.at("metrics").contains("instance"));
        CHECK(r.at("metrics").contains("lhs"));
        CHECK(r.at("metrics").contains("rhs"));
        CHECK(r.at("metrics").contains("abs_error"));
    }
}

TEST_CASE("verify-lumping record") {
    const auto o = invoke({"diagrams", "verify-lumping", "--n", "2,2,2,2", "--out", "-"});
    CHECK(o.code == 0);
    const Json r = lines(o.out).at(0);
    CHECK(r.at("metrics").at("abs_error").get<double>() <= 1e-10);
    CHECK(r.at("metrics").at("instance").at("pairs") == 25);
}

TEST_CASE("determinism of metric fields") {
    const std::vector<std::string> args{"mc-var", "--n", "33", "--w", "4", "--replicas", "6", "--seed", "11", "--out", "-"};
    auto strip = [](const std::string& text) {
        Json m = lines(text).at(0).at("metrics");
        m.erase("wall_time");
        return m.dump();
    };
    const auto a = invoke(args), b = invoke(args);
    auto withjobs = args;
    withjobs.insert(withjobs.end(), {"--jobs", "3"});
    const auto c = invoke(withjobs);
    CHECK(strip(a.out) == strip(b.out));
    CHECK(strip(a.out) == strip(c.out));
}

TEST_CASE("results directory from the environment") {
    const fs::path dir = scratch_dir("env");
    setenv("QDIFF_RESULTS_DIR", dir.string().c_str(), 1);
    CHECK(results_path("") == dir / "results.jsonl");
    CHECK(results_path("x.jsonl") == fs::path("x.jsonl"));
    CHECK(invoke({"coeffs", "--t", "1", "--w", "8"}).code == 0);
    CHECK(invoke({"coeffs", "--t", "2", "--w", "8"}).code == 0);
    const auto recs = read_records(dir / "results.jsonl");
    CHECK(recs.size() == 2);
    CHECK(run_config_from_json(recs[1].config).t == 2.0);
    unsetenv("QDIFF_RESULTS_DIR");
}

#include "qdiff/records.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "qdiff/errors.hpp"
#include "qdiff/rng.hpp"

namespace qdiff {

namespace {

Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_or_nan(const Json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Json to_json(const RunConfig& c) {
    Json j;
    j["subcommand"] = c.subcommand;
    j["d"] = c.d;
    j["n"] = c.n;
    j["w"] = c.w;
    j["w_list"] = c.w_list;
    j["kappa"] = c.kappa;
    j["T"] = c.T;
    j["t"] = c.t;
    j["phi"] = c.phi;
    j["replicas"] = c.replicas;
    j["seed"] = c.seed;
    j["tol"] = c.tol;
    j["jobs"] = c.jobs;
    j["out"] = c.out;
    j["beta_target"] = c.beta_target;
    j["slope_tolerance"] = c.slope_tolerance;
    j["m_max"] = c.m_max;
    j["chain_lengths"] = c.chain_lengths;
    j["y1"] = c.y1 ? Json(*c.y1) : Json(nullptr);
    j["y2"] = c.y2 ? Json(*c.y2) : Json(nullptr);
    j["max_bridges"] = c.max_bridges;
    j["checks"] = c.checks;
    j["skeleton_id"] = c.skeleton_id;
    j["multiplicity"] = c.multiplicity;
    return j;
}

RunConfig run_config_from_json(const Json& j) {
    try {
        RunConfig c;
        c.subcommand = j.at("subcommand").get<std::string>();
        c.d = j.at("d").get<int>();
        c.n = j.at("n").get<int>();
        c.w = j.at("w").get<int>();
        c.w_list = j.at("w_list").get<std::vector<int>>();
        c.kappa = j.at("kappa").get<double>();
        c.T = j.at("T").get<double>();
        c.t = j.at("t").get<double>();
        c.phi = j.at("phi").get<std::string>();
        c.replicas = j.at("replicas").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.tol = j.at("tol").get<double>();
        c.jobs = j.at("jobs").get<int>();
        c.out = j.at("out").get<std::string>();
        c.beta_target = j.at("beta_target").get<double>();
        c.slope_tolerance = j.at("slope_tolerance").get<double>();
        c.m_max = j.at("m_max").get<int>();
        c.chain_lengths = j.at("chain_lengths").get<std::vector<int>>();
        if (!j.at("y1").is_null()) c.y1 = j.at("y1").get<std::int64_t>();
        if (!j.at("y2").is_null()) c.y2 = j.at("y2").get<std::int64_t>();
        c.max_bridges = j.at("max_bridges").get<int>();
        c.checks = j.at("checks").get<std::vector<std::string>>();
        c.skeleton_id = j.at("skeleton_id").get<int>();
        c.multiplicity = j.at("multiplicity").get<std::vector<int>>();
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
}

Json to_json(const ResultRecord& r) {
    Json j;
    j["schema_version"] = r.schema_version;
    j["kind"] = r.kind;
    j["config"] = r.config;
    j["metrics"] = r.metrics;
    j["pass"] = r.pass;
    j["timestamp"] = r.timestamp;
    j["tool_version"] = r.tool_version;
    j["generator_version"] = r.generator_version;
    return j;
}

ResultRecord result_record_from_json(const Json& j) {
    try {
        ResultRecord r;
        r.schema_version = j.at("schema_version").get<int>();
        r.kind = j.at("kind").get<std::string>();
        r.config = j.at("config");
        r.metrics = j.at("metrics");
        r.pass = j.at("pass").get<bool>();
        r.timestamp = j.at("timestamp").get<std::string>();
        r.tool_version = j.at("tool_version").get<std::string>();
        r.generator_version = j.at("generator_version").get<std::string>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("result record: ") + e.what());
    }
}

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json variance_metrics(const VarianceReport& r) {
    Json j;
    j["w"] = r.w;
    j["n"] = r.n;
    j["d"] = r.d;
    j["kappa"] = r.kappa;
    j["T"] = r.T;
    j["t"] = r.t;
    j["phi"] = r.phi;
    j["replicas"] = r.replicas;
    j["mean"] = nullable(r.mean);
    j["variance"] = nullable(r.variance);
    j["variance_se"] = nullable(r.variance_se);
    j["master_seed"] = r.master_seed;
    j["wall_time"] = r.wall_time;
    j["failed_replicas"] = r.failed_replicas;
    j["valid"] = r.valid;
    j["warnings"] = r.warnings;
    return j;
}

std::filesystem::path results_path(const std::string& out_flag) {
    if (!out_flag.empty()) return out_flag;
    if (const char* dir = std::getenv("QDIFF_RESULTS_DIR"); dir && *dir)
        return std::filesystem::path(dir) / "results.jsonl";
    return std::filesystem::path("results") / "results.jsonl";
}

void append_records(const std::filesystem::path& path, const std::vector<ResultRecord>& records) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::app);
    if (!f) throw ConfigError("cannot open results file " + path.string());
    for (const ResultRecord& r : records) f << to_json(r).dump() << '\n';
}

std::vector<ResultRecord> read_records(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path.string());
    std::vector<ResultRecord> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        try {
            out.push_back(result_record_from_json(Json::parse(line)));
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("malformed record: ") + e.what());
        }
    }
    return out;
}

std::string plot_csv(const std::vector<ResultRecord>& records) {
    if (records.empty()) throw ConfigError("plot data: no records");
    const std::string& kind = records.front().kind;
    for (const ResultRecord& r : records)
        if (r.kind != kind) throw ConfigError("plot data: records of kinds " + kind + " and " + r.kind);
    std::ostringstream os;
    if (kind == "mc-var") {
        os << "w,var,se,r,seed\n";
        for (const ResultRecord& r : records) {
            const Json& m = r.metrics;
            os << m.at("w").get<int>() << ',' << g17(number_or_nan(m.at("variance"))) << ','
               << g17(number_or_nan(m.at("variance_se"))) << ',' << m.at("replicas").get<int>() << ','
               << m.at("master_seed").get<std::uint64_t>() << '\n';
        }
    } else if (kind == "propagate") {
        if (records.size() != 1) throw ConfigError("plot data: one transition profile per file");
        const Json& m = records.front().metrics;
        const auto x = m.at("x").get<std::vector<std::int64_t>>();
        const auto p = m.at("p").get<std::vector<double>>();
        os << "x,p\n";
        for (std::size_t i = 0; i < x.size(); ++i) os << x[i] << ',' << g17(p[i]) << '\n';
    } else {
        throw ConfigError("plot data: unsupported kind " + kind);
    }
    return os.str();
}

void emit_plot_data(const std::vector<ResultRecord>& records, const std::filesystem::path& path) {
    const std::string csv = plot_csv(records);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot open " + path.string());
    f << csv;
}

}  // namespace qdiff

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qdiff/observables.hpp"

namespace qdiff {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";

using Json = nlohmann::ordered_json;

/// Fully resolved parameters of one CLI run. Every field is serialized, so a
/// record's config echo reproduces the run.
struct RunConfig {
    std::string subcommand;
    int d = 1;
    int n = 64;
    int w = 8;
    std::vector<int> w_list;
    double kappa = 0.1;
    double T = 1.0;
    double t = 1.0;
    std::string phi = "gaussian:1";
    int replicas = 200;
    std::uint64_t seed = 7;
    double tol = 1e-12;
    int jobs = 1;
    std::string out;
    double beta_target = 0.3;
    double slope_tolerance = 0.2;
    int m_max = 40;
    std::vector<int> chain_lengths;   // n11, n12, n21, n22
    std::optional<std::int64_t> y1;
    std::optional<std::int64_t> y2;
    int max_bridges = 3;
    std::vector<std::string> checks;
    int skeleton_id = 0;
    std::vector<int> multiplicity;

    bool operator==(const RunConfig&) const = default;
};

Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);

struct ResultRecord {
    int schema_version = kSchemaVersion;
    std::string kind;
    Json config;
    Json metrics;
    bool pass = false;
    std::string timestamp;
    std::string tool_version = kToolVersion;
    std::string generator_version;
};

Json to_json(const ResultRecord& r);
ResultRecord result_record_from_json(const Json& j);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string iso_timestamp();

Json variance_metrics(const VarianceReport& r);

/// --out if given, else $QDIFF_RESULTS_DIR/results.jsonl, else results/results.jsonl.
std::filesystem::path results_path(const std::string& out_flag);

/// Appends one JSON object per line; creates parent directories.
void append_records(const std::filesystem::path& path, const std::vector<ResultRecord>& records);

std::vector<ResultRecord> read_records(const std::filesystem::path& path);

/// CSV for external plotting. "mc-var" records give `w,var,se,r,seed`, one row
/// per record; a single "propagate" record gives `x,p`. Throws ConfigError on
/// mixed kinds or an unsupported kind.
std::string plot_csv(const std::vector<ResultRecord>& records);
void emit_plot_data(const std::vector<ResultRecord>& records, const std::filesystem::path& path);

}  // namespace qdiff

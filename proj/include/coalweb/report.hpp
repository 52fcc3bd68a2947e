#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace coalweb {

// One CSV row.  NaN numeric fields and n = -1 render as empty cells.
struct ResultRow {
    static constexpr double unset = std::numeric_limits<double>::quiet_NaN();

    std::string stat;
    double delta = unset;
    double t0 = unset;
    double t = unset;
    double a = unset;
    double b = unset;
    double u = unset;
    double epsilon = unset;
    std::int64_t n = -1;
    double estimate = unset;
    double std_error = unset;
    std::string extra;
};

struct CheckFlag {
    std::string name;
    double observed = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct RunReport {
    std::string kind;
    std::uint64_t config_hash = 0;
    std::uint64_t root_seed = 0;
    std::size_t n_replicas = 0;
    int threads = 0;
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<ResultRow> rows;
    std::vector<CheckFlag> checks;
    double wall_seconds = 0.0;  // informational; excluded from the determinism contract

    bool all_pass() const;
};

// results.csv content: a '#' header line embedding config hash and root
// seed, the column header, then the rows with shortest round-trip numbers.
// Byte-identical for identical (config, seed).
std::string results_csv_text(const RunReport& rep);

// report.json content (sorted keys, 2-space indent, trailing newline).
std::string report_json_text(const RunReport& rep);

// Writes results.csv and report.json into out_dir (created if needed).
void write_run_outputs(const RunReport& rep, const std::string& out_dir);

}  // namespace coalweb

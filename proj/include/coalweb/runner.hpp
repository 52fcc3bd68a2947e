#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "coalweb/config.hpp"
#include "coalweb/report.hpp"

namespace coalweb {

struct RunOptions {
    std::optional<std::uint64_t> seed;  // overrides the config's root seed
    std::optional<int> threads;
    std::string out_dir = ".";
};

// Executes the experiment described by cfg (kind = eta | tightness | bstats
// | donsker | dual | census | skeleton | metrics).  Pure compute; no files.
RunReport run_experiment(const Config& cfg, const RunOptions& opt);

// run_experiment + results.csv/report.json in opt.out_dir.
// Returns 0 iff every enabled check passed.
int run_and_write(const std::string& config_path, const RunOptions& opt);

// Builds the path family described by cfg (a web window or a skeleton) and
// writes paths.txt in the pathset text format.  Only format "pathset" is
// supported.
int export_paths(const std::string& config_path, const std::string& format,
                 const RunOptions& opt);

}  // namespace coalweb

#include "coalweb/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "coalweb/config.hpp"
#include "coalweb/path.hpp"
#include "json.hpp"

namespace coalweb {

namespace {

std::string cell(double v) { return std::isnan(v) ? std::string() : format_double(v); }

}  // namespace

bool RunReport::all_pass() const {
    for (const CheckFlag& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string results_csv_text(const RunReport& rep) {
    std::string out;
    out += "# config_hash=" + hex_u64(rep.config_hash) + " root_seed=" +
           std::to_string(rep.root_seed) + "\n";
    out += "stat,delta,t0,t,a,b,u,epsilon,n,estimate,std_error,extra\n";
    for (const ResultRow& r : rep.rows) {
        out += r.stat;
        out += ',' + cell(r.delta) + ',' + cell(r.t0) + ',' + cell(r.t);
        out += ',' + cell(r.a) + ',' + cell(r.b) + ',' + cell(r.u) + ',' + cell(r.epsilon);
        out += ',';
        if (r.n >= 0) out += std::to_string(r.n);
        out += ',' + cell(r.estimate) + ',' + cell(r.std_error) + ',' + r.extra + '\n';
    }
    return out;
}

std::string report_json_text(const RunReport& rep) {
    nlohmann::json j;
    j["kind"] = rep.kind;
    j["config_hash"] = hex_u64(rep.config_hash);
    j["root_seed"] = rep.root_seed;
    j["n_replicas"] = rep.n_replicas;
    j["threads"] = rep.threads;
    j["wall_clock_ms"] = static_cast<std::int64_t>(rep.wall_seconds * 1000.0);

    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : rep.config_echo) cfg[k] = v;
    j["config"] = cfg;

    nlohmann::json rows = nlohmann::json::array();
    for (const ResultRow& r : rep.rows) {
        nlohmann::json o;
        o["stat"] = r.stat;
        auto put = [&o](const char* name, double v) {
            if (!std::isnan(v)) o[name] = v;
        };
        put("delta", r.delta);
        put("t0", r.t0);
        put("t", r.t);
        put("a", r.a);
        put("b", r.b);
        put("u", r.u);
        put("epsilon", r.epsilon);
        if (r.n >= 0) o["n"] = r.n;
        put("estimate", r.estimate);
        put("std_error", r.std_error);
        if (!r.extra.empty()) o["extra"] = r.extra;
        rows.push_back(o);
    }
    j["results"] = rows;

    nlohmann::json checks = nlohmann::json::array();
    for (const CheckFlag& c : rep.checks) {
        nlohmann::json o;
        o["name"] = c.name;
        o["observed"] = c.observed;
        o["threshold"] = c.threshold;
        o["pass"] = c.pass;
        checks.push_back(o);
    }
    j["checks"] = checks;
    j["all_pass"] = rep.all_pass();
    return j.dump(2) + "\n";
}

void write_run_outputs(const RunReport& rep, const std::string& out_dir) {
    std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "results.csv", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / "results.csv").string());
        f << results_csv_text(rep);
    }
    {
        std::ofstream f(dir / "report.json", std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir / "report.json").string());
        f << report_json_text(rep);
    }
}

}  // namespace coalweb

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coalweb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value text, one experiment per file.  Keys are dotted lowercase
// identifiers; '#' starts a comment; blank lines are ignored.  Duplicate
// keys are rejected.  Errors carry the line number and key name.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text, const std::string& origin = "<text>");

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;  // on/off/true/false/1/0

    // Comma-separated doubles: "0.4, 0.2, 0.1".
    std::vector<double> get_double_list(const std::string& key) const;
    // Semicolon-separated pairs: "0,0; 0.5,0; -1,0.25".
    std::vector<std::pair<double, double>> get_point_list(const std::string& key) const;

    // Entries in file order, for echoing into reports.
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    // FNV-1a over the sorted canonical "key=value" lines.
    std::uint64_t hash() const;

    // Rejects any present key not in `known`, naming the offender.
    void require_known(const std::vector<std::string>& known) const;

private:
    std::string origin_;
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::string> map_;
};

std::string hex_u64(std::uint64_t v);

}  // namespace coalweb

#include "coalweb/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace coalweb {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
        if (!ok) return false;
    }
    return true;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

double parse_number(const std::string& raw, const std::string& key) {
    std::string v = trim(raw);
    if (v.empty()) throw ConfigError("key '" + key + "': empty numeric value");
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing junk");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number from '" + v + "'");
    }
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key=value, got '" + s + "'");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (!valid_key(key)) fail(origin, lineno, "invalid key '" + key + "'");
        if (cfg.map_.count(key)) fail(origin, lineno, "duplicate key '" + key + "'");
        cfg.entries_.emplace_back(key, value);
        cfg.map_[key] = value;
    }
    return cfg;
}

bool Config::has(const std::string& key) const { return map_.count(key) != 0; }

std::string Config::get_string(const std::string& key) const {
    auto it = map_.find(key);
    if (it == map_.end()) throw ConfigError("missing required key '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    return parse_number(get_string(key), key);
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    double d = get_double(key);
    auto v = static_cast<std::int64_t>(d);
    if (static_cast<double>(v) != d) throw ConfigError("key '" + key + "': expected an integer");
    return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    std::string v = trim(get_string(key));
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("key '" + key + "': cannot parse unsigned integer from '" + v + "'");
    return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string v = trim(get_string(key));
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ConfigError("key '" + key + "': expected on/off/true/false/1/0, got '" + v + "'");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& part : split(get_string(key), ',')) {
        std::string p = trim(part);
        if (p.empty()) continue;
        out.push_back(parse_number(p, key));
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

std::vector<std::pair<double, double>> Config::get_point_list(const std::string& key) const {
    std::vector<std::pair<double, double>> out;
    for (const std::string& item : split(get_string(key), ';')) {
        std::string p = trim(item);
        if (p.empty()) continue;
        auto xy = split(p, ',');
        if (xy.size() != 2)
            throw ConfigError("key '" + key + "': expected 'x,t' pairs separated by ';'");
        out.emplace_back(parse_number(xy[0], key), parse_number(xy[1], key));
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty point list");
    return out;
}

std::uint64_t Config::hash() const {
    std::vector<std::string> lines;
    lines.reserve(entries_.size());
    for (const auto& [k, v] : entries_) lines.push_back(k + "=" + v);
    std::sort(lines.begin(), lines.end());
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto eat = [&h](char c) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    };
    for (const std::string& l : lines) {
        for (char c : l) eat(c);
        eat('\n');
    }
    return h;
}

void Config::require_known(const std::vector<std::string>& known) const {
    for (const auto& [k, v] : entries_) {
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw ConfigError("unknown config key '" + k + "'");
    }
}

std::string hex_u64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

}  // namespace coalweb

#include "coalweb/path.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

namespace coalweb {

void validate_path(const Path& p) {
    if (p.times.empty() || p.times.size() != p.xs.size())
        throw std::invalid_argument("path: empty or mismatched breakpoint lists");
    for (std::size_t k = 0; k < p.times.size(); ++k) {
        if (std::isnan(p.times[k]) || std::isnan(p.xs[k]))
            throw std::invalid_argument("path: NaN breakpoint");
        if (k > 0 && !(p.times[k] > p.times[k - 1]))
            throw std::invalid_argument("path: breakpoint times not strictly increasing");
        if (std::isinf(p.times[k]) && k != 0 && k + 1 != p.times.size())
            throw std::invalid_argument("path: infinite time at an interior breakpoint");
        if (std::isinf(p.xs[k]) && !std::isinf(p.times[k]))
            throw std::invalid_argument("path: infinite position at a finite time");
    }
}

double eval_path(const Path& p, double t) {
    const auto& ts = p.times;
    const auto& xs = p.xs;
    if (t <= ts.front()) return xs.front();
    if (t >= ts.back()) return xs.back();
    // first breakpoint with time > t; the segment [it-1, it] contains t
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    std::size_t lo = hi - 1;
    if (std::isinf(ts[lo])) return xs[hi];  // constant tail from -inf
    if (std::isinf(ts[hi])) return xs[lo];  // constant tail to +inf
    double frac = (t - ts[lo]) / (ts[hi] - ts[lo]);
    return xs[lo] + (xs[hi] - xs[lo]) * frac;
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::discrete_web: return "discrete-web";
        case Provenance::continuous_web: return "continuous-web";
        case Provenance::skeleton: return "skeleton";
        case Provenance::dual_web: return "dual-web";
    }
    return "discrete-web";
}

Provenance provenance_from_name(const std::string& name) {
    if (name == "discrete-web") return Provenance::discrete_web;
    if (name == "continuous-web") return Provenance::continuous_web;
    if (name == "skeleton") return Provenance::skeleton;
    if (name == "dual-web") return Provenance::dual_web;
    throw std::invalid_argument("unknown provenance tag: " + name);
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("bad numeric token: '" + s + "'");
    return v;
}

void write_pathset(std::ostream& os, const PathSet& ps) {
    os << "#pathset provenance=" << provenance_name(ps.provenance)
       << " delta=" << format_double(ps.delta) << "\n";
    for (const Path& p : ps.paths) {
        os << format_double(p.t0()) << '\t';
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (k) os << ';';
            os << format_double(p.times[k]) << ':' << format_double(p.xs[k]);
        }
        os << '\n';
    }
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            return out;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

}  // namespace

PathSet read_pathset(std::istream& is) {
    PathSet ps;
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("#pathset", 0) == 0) {
                for (const std::string& tok : split(line, ' ')) {
                    auto eq = tok.find('=');
                    if (eq == std::string::npos) continue;
                    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                    if (key == "provenance") ps.provenance = provenance_from_name(val);
                    if (key == "delta") ps.delta = parse_double(val);
                }
                have_header = true;
            }
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::invalid_argument("pathset line " + std::to_string(lineno) +
                                        ": missing tab separator");
        double t0 = parse_double(line.substr(0, tab));
        Path p;
        for (const std::string& rec : split(line.substr(tab + 1), ';')) {
            auto colon = rec.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("pathset line " + std::to_string(lineno) +
                                            ": breakpoint without ':'");
            p.push(parse_double(rec.substr(0, colon)), parse_double(rec.substr(colon + 1)));
        }
        validate_path(p);
        if (p.t0() != t0)
            throw std::invalid_argument("pathset line " + std::to_string(lineno) +
                                        ": t0 field disagrees with first breakpoint");
        ps.paths.push_back(std::move(p));
    }
    (void)have_header;
    return ps;
}

}  // namespace coalweb

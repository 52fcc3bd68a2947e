#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace coalweb {

// A single trajectory: piecewise-linear between breakpoints, born at the
// first breakpoint's time.  For metric work the path is extended to the
// whole time axis by holding the first value before birth and the last
// value after the final breakpoint.
//
// Breakpoint times are strictly increasing.  The first time may be -inf and
// the last may be +inf; a segment incident to an infinite time is treated as
// constant at its finite end's value.
struct Path {
    std::vector<double> times;
    std::vector<double> xs;

    double t0() const { return times.front(); }
    double t_last() const { return times.back(); }
    std::size_t size() const { return times.size(); }

    void push(double t, double x) {
        times.push_back(t);
        xs.push_back(x);
    }
};

// Throws std::invalid_argument unless breakpoint times are strictly
// increasing, non-empty, and positions are finite away from infinite times.
void validate_path(const Path& p);

// Value of the held extension at any time, including +-inf.
double eval_path(const Path& p, double t);

enum class Provenance { discrete_web, continuous_web, skeleton, dual_web };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

// A finite family of paths with a common origin story.  `delta` records the
// diffusive rescale applied to the members (1 = unscaled lattice units).
struct PathSet {
    Provenance provenance = Provenance::discrete_web;
    double delta = 1.0;
    std::vector<Path> paths;
};

// Line-oriented text format, one path per record:
//   t0 <tab> t:x;t:x;...
// Values are written with shortest round-trip precision; infinities appear
// as "inf"/"-inf".  A leading "#pathset" line carries provenance and delta.
// Round-trips are bit-exact.
void write_pathset(std::ostream& os, const PathSet& ps);
PathSet read_pathset(std::istream& is);

std::string format_double(double v);   // shortest round-trip decimal
double parse_double(const std::string& s);

}  // namespace coalweb

#pragma once

#include <algorithm>
#include <cmath>

namespace coalweb {

// A point of the extended space-time plane; either coordinate may be +-inf.
struct SpaceTimePoint {
    double x = 0.0;
    double t = 0.0;
};

// Image of a point under the compactification
//   (phi, psi) = (tanh(x) / (1 + |t|), tanh(t)).
// Every point with t = +inf collapses to (0, 1) and every point with
// t = -inf to (0, -1); x no longer matters on the two time caps.
struct CompactCoords {
    double phi = 0.0;
    double psi = 0.0;
};

inline CompactCoords compactify(const SpaceTimePoint& p) {
    CompactCoords c;
    c.psi = std::tanh(p.t);
    if (std::isinf(p.t)) {
        c.phi = 0.0;  // the caps are single points, independent of x
    } else {
        c.phi = std::tanh(p.x) / (1.0 + std::fabs(p.t));
    }
    return c;
}

// Metric on the compactified plane: max-distance of the (phi, psi) images.
// Bounded by 2, and zero exactly on pairs identified by the caps.
inline double rho(const SpaceTimePoint& a, const SpaceTimePoint& b) {
    CompactCoords ca = compactify(a);
    CompactCoords cb = compactify(b);
    return std::max(std::fabs(ca.phi - cb.phi), std::fabs(ca.psi - cb.psi));
}

// Equality in the quotient: interior points compare coordinate-wise, points
// on a time cap compare by cap only.
inline bool same_point(const SpaceTimePoint& a, const SpaceTimePoint& b) {
    if (std::isinf(a.t) || std::isinf(b.t)) return a.t == b.t;
    return a.x == b.x && a.t == b.t;
}

}  // namespace coalweb

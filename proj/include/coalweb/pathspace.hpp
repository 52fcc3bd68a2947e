#pragma once

#include "coalweb/path.hpp"

namespace coalweb {

// Distance between two held-extension trajectories:
//   max( sup_t |phi(f1(t), t) - phi(f2(t), t)|,  |psi(t0_1) - psi(t0_2)| )
// with (phi, psi) the compactified coordinates.  The sup is evaluated on the
// merged breakpoint grid refined so consecutive nodes are at most `psi_step`
// apart in psi; constant tails beyond the breakpoints are handled in closed
// form.  The returned value is a lower bound of the true sup; `refine_error`
// bounds how far below it can sit.
struct PathDistResult {
    double value = 0.0;
    double refine_error = 0.0;
};

PathDistResult path_dist_detailed(const Path& a, const Path& b, double psi_step = 1e-3);

inline double path_dist(const Path& a, const Path& b, double psi_step = 1e-3) {
    return path_dist_detailed(a, b, psi_step).value;
}

// Hausdorff distance between two non-empty path families under path_dist.
// Throws std::invalid_argument on an empty side.
struct HausdorffResult {
    double value = 0.0;
    double refine_error = 0.0;
};

HausdorffResult hausdorff_dist_detailed(const PathSet& a, const PathSet& b,
                                        double psi_step = 1e-3);

inline double hausdorff_dist(const PathSet& a, const PathSet& b, double psi_step = 1e-3) {
    return hausdorff_dist_detailed(a, b, psi_step).value;
}

}  // namespace coalweb

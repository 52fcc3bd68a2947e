#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "coalweb/path.hpp"
#include "coalweb/stats.hpp"

namespace coalweb {

struct SeedPoint {
    double x = 0.0;
    double t = 0.0;
};

// Ordered seed list; the order is part of the value (it is the construction
// order, not a spatial sort).
struct SeedSet {
    std::vector<SeedPoint> pts;
    void validate() const;
};

// Uniform grid covering [t_start, t_end].
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 1.0;
    double step = 1e-3;

    void validate() const;
    std::int64_t n_steps() const;
    double time(std::int64_t k) const { return t_start + step * static_cast<double>(k); }
    std::int64_t snap(double t) const;  // nearest grid index, clamped to the grid
};

// One constructed path: free Gaussian steps of variance `step` until the
// first grid time at which it meets or crosses an earlier path, exactly
// equal to that path from then on.
struct SkeletonPath {
    int seed_index = 0;
    std::int64_t birth_index = 0;
    double snap_distance = 0.0;
    int coalesced_with = -1;       // earlier path index, or -1
    std::int64_t merge_index = -1;  // grid index where equality starts, or -1
    std::vector<double> values;    // values[m] is the position at birth_index + m
};

struct Skeleton {
    TimeGrid grid;
    std::vector<SkeletonPath> paths;

    bool alive_at(std::size_t path, std::int64_t grid_index) const;
    double value_at(std::size_t path, std::int64_t grid_index) const;
};

// Build the family in seed order.  Meeting detection per step: exact
// equality, a sign change of the difference, or (with bridge_correction) a
// same-sign step declared a meeting with the conditional crossing
// probability exp(-d0*d1/step) of the difference process, a Brownian bridge
// of variance 2 per unit time.  One shared uniform draw per step keeps the
// set of bridge hits nested, so the walker always joins the nearest hit
// partner and grid non-crossing holds realization by realization.
// Simultaneous interpolated crossings resolve to the earliest crossing
// fraction, ties to the lower path index.
Skeleton sample_skeleton_detailed(const SeedSet& seeds, const TimeGrid& grid, std::uint64_t seed,
                                  bool bridge_correction);

PathSet sample_skeleton(const SeedSet& seeds, const TimeGrid& grid, std::uint64_t seed,
                        bool bridge_correction = false);

// True iff no pair of paths changes the sign of its difference before the
// first grid time at which the two are exactly equal, and every pair stays
// exactly equal from that time on.
bool check_skeleton_noncrossing(const Skeleton& sk);

// First grid time at which two paths hold the same value, or t_end + step
// if they never do within the horizon.
double meeting_time(const Skeleton& sk, std::size_t a, std::size_t b);

struct OrderingCheckConfig {
    SeedSet seeds;
    TimeGrid grid;
    std::size_t n_replicas = 1000;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = auto
    // Interval at t_start selecting the paths counted by the eta statistic.
    double eta_a = -std::numeric_limits<double>::infinity();
    double eta_b = std::numeric_limits<double>::infinity();
    // Second construction order as a permutation of seed indices; empty
    // means reversed.
    std::vector<std::size_t> second_order;
};

// Distribution equality under seed reordering: two ensembles with
// independent randomness, construction in the given order vs the permuted
// order, compared by two-sample KS on per-replica summaries.  The meeting
// time tracks the same two seed identities (the first two of the given
// order) in both ensembles; the marginal tracks the first seed; eta counts
// distinct horizon values over paths born at t_start inside [eta_a, eta_b].
struct OrderingInvarianceReport {
    double ks_meet_time = 0.0;
    double ks_marginal = 0.0;
    double ks_eta = 0.0;
    std::size_t n_replicas = 0;
};

OrderingInvarianceReport ordering_invariance_check(const OrderingCheckConfig& cfg);

// Modulus-of-continuity diagnostic.  One fine path per replica at step
// dt_base/16 over n_coarse*dt_base of time, subsampled at strides 16 (the
// base grid), 4, and 1; per-path statistic
//   sup over grid pairs of |f(t') - f(t)| / |t' - t|^xi,
// reported as the median over replicas of the refined/base statistic ratio.
struct HolderReport {
    double ratio_4x_xi045 = 0.0;
    double ratio_16x_xi055 = 0.0;
    std::size_t n_paths = 0;
};

HolderReport holder_diagnostic(double dt_base, int n_coarse, std::size_t n_paths,
                               std::uint64_t root_seed);

}  // namespace coalweb

#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "coalweb/lattice.hpp"
#include "coalweb/path.hpp"
#include "coalweb/stats.hpp"

namespace coalweb {

// Counting query: paths through [a,b] x {t0}, counted at time t0 + t.
struct EtaQuery {
    double t0 = 0.0;
    double t = 1.0;
    double a = 0.0;
    double b = 0.0;

    void validate() const;  // t > 0, a <= b, finite
};

// Number of distinct values at t0 + t among paths of K whose value at t0
// lies in [a,b] (closed interval, exact evaluation).  Coalesced paths carry
// exactly equal values, so distinctness is plain comparison.  Throws if a
// touching path ends before t0 + t.
std::size_t count_eta(const PathSet& K, const EtaQuery& q);

struct EnsembleConfig {
    std::size_t n_replicas = 1000;
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = one per hardware thread
};

struct EtaEnsembleResult {
    double delta = 0.0;
    EtaQuery query;
    StatSummary summary;  // integer histogram of the eta samples
};

// Monte Carlo eta over independent rescaled discrete webs.  Each replica
// follows the coalescing walkers from the lattice sites inside [a,b] at row
// t0/delta^2 for t/delta^2 rows and counts distinct endpoints; walkers
// starting elsewhere cannot change the count, so this equals the all-site
// web query in law.
EtaEnsembleResult eta_ensemble(double delta, const EtaQuery& q, const EnsembleConfig& ens);

// P(two independent unit Brownian motions started dist apart meet by t).
// The difference is a Brownian motion of variance 2 per unit time, so the
// reflection principle gives erfc(dist / (2 sqrt(t))).
double theta_closed(double dist, double t);

// Monte Carlo oracle for theta_closed: the difference walk on n_steps grid
// steps with the per-step bridge crossing correction exp(-d0*d1/dt), which
// makes the meeting event exact in law at any step count.
double theta_mc(double dist, double t, std::size_t n_pairs, std::uint64_t seed, int n_steps = 32);

struct EtaBoundRow {
    int k = 0;
    double p_k = 0.0;          // empirical P(eta >= k)
    double bound = 0.0;        // P(eta >= 2)^(k-1)
    double combined_se = 0.0;  // SEs of both sides, combined in quadrature
    bool pass = false;         // p_k <= bound + 3 * combined_se
};

struct EtaBoundReport {
    std::vector<EtaBoundRow> rows;  // k = 3 .. k_max_used
    int k_max_used = 0;
    bool degraded = false;  // k_max reduced for lack of observed counts
    bool pass = true;
};

EtaBoundReport check_etabound(const StatSummary& summary, int k_max);

// Fitted constants of p_k ~ C_k (eps/sqrt(t))^(k-1) across an epsilon grid;
// spread is the max/min ratio of the per-epsilon constants.
struct TailScalingFit {
    int k = 0;
    double c_k = 0.0;
    double spread = 0.0;
    std::size_t n_points = 0;
};

std::vector<TailScalingFit> eta_tail_scaling(
    const std::vector<std::pair<double, StatSummary>>& by_epsilon, double t, int k_max);

// True iff some path of K passes through the rectangle
// [x0 - sqrt(t)/2, x0 + sqrt(t)/2] x [t0, t0+t] at some time s1 and touches
// one of the lines x = x0 +- u/2 at some later time s2 <= t0 + 2t.  Paths
// are extended by the hold-last convention beyond their final breakpoint.
bool indicator_A(const PathSet& K, double x0, double t0, double t, double u);

struct GEstimate {
    double g = 0.0;          // max over placements of the event frequency
    double std_error = 0.0;  // binomial SE at the selected placement
    double x_offset = 0.0;   // selected placement, offsets within one cell
    double t_offset = 0.0;
    double g_over_t32 = 0.0;        // g / t^(3/2)
    double shape_u4_over_t2 = 0.0;  // g * u^4 / t^2
    std::size_t n_placements = 0;
    std::size_t n_replicas = 0;
};

// Frequency of the crossing event for the rescaled discrete web, maximized
// over placements of (x0, t0) inside one lattice cell: offsets aligning the
// rectangle and boundary lines with site columns and rows, plus midpoints,
// over both column parity classes.  The law is invariant under whole-cell
// translations, so these representatives cover the sup.  Exact segment
// geometry, lazily hashed arrows, identical seeds give identical output.
GEstimate estimate_g(double delta, double t, double u, const EnsembleConfig& ens);

struct BStatRow {
    double delta = 0.0;
    double epsilon = 0.0;
    std::int64_t n_sites = 0;
    double b1 = 0.0;  // sup over placements of P(eta >= 2)
    double b1_se = 0.0;
    double b2 = 0.0;  // sup over placements of P(eta >= 3) / epsilon
    double b2_se = 0.0;
    std::size_t n = 0;
};

// Small-interval multiplicity statistics.  The placement sup is exact: the
// count is monotone in the start-site set, so the alignment holding the
// most lattice sites, floor(eps/(2 delta)) + 1 of them, dominates every
// other placement of [a, a+eps].
std::vector<BStatRow> b_statistics(const std::vector<double>& deltas, double t0, double t,
                                   const std::vector<double>& epsilons,
                                   const EnsembleConfig& ens);

// KS distance of the rescaled single-walker position at t_eval against
// Normal(0, t_eval).
double donsker_marginal_check(double delta, double t_eval, const EnsembleConfig& ens);

// Sup over [0, t_max] of |empirical meeting-time CDF - theta_closed(dist,.)|
// for two rescaled walkers started dist apart (dist/delta must be even).
double donsker_pair_meeting(double delta, double dist, double t_max, const EnsembleConfig& ens);

// Forward eta and dual eta on one arrow-field realization.  Requires an
// open window and t0, t0+t, a, b all even integers, so forward starts sit
// on even cells and dual positions (odd at even rows) avoid the interval
// endpoints.  On the line these satisfy eta = 1 + eta_dual exactly.
std::pair<std::size_t, std::size_t> count_eta_dual(const ArrowField& forward, const EtaQuery& q);

struct CensusCounts {
    std::map<std::pair<int, int>, std::size_t> classes;  // (m_in, m_out) -> count
    std::size_t total = 0;

    std::size_t at(int m_in, int m_out) const;
};

struct CensusReport {
    CensusCounts forward;
    CensusCounts dual;
};

// Segment-occupancy census of the all-site web: per lattice point, m_in
// counts incoming occupied unit segments (0, 1 or 2) and m_out is always 1.
// The dual census reads the backward field the same way.  Points whose
// neighbor lookups would leave the field's window are skipped.
CensusReport point_census(const ArrowField& forward, const Window& region);

}  // namespace coalweb

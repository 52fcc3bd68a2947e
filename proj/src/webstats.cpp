#include "coalweb/webstats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "coalweb/rng.hpp"

namespace coalweb {

namespace {

constexpr double kAlignTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t require_aligned(double value, double unit, const char* what) {
    double q = value / unit;
    double r = std::round(q);
    if (std::abs(q - r) > kAlignTol * std::max(1.0, std::abs(q)))
        throw std::invalid_argument(std::string(what) + " is not a multiple of the lattice unit");
    return static_cast<std::int64_t>(r);
}

std::int64_t require_integer(double value, const char* what) {
    double r = std::round(value);
    if (std::abs(value - r) > kAlignTol)
        throw std::invalid_argument(std::string(what) + " must be an integer");
    return static_cast<std::int64_t>(r);
}

template <typename F>
void parallel_replicas(std::size_t n, int threads, F&& body) {
    if (n == 0) return;
    std::size_t nt = threads > 0 ? static_cast<std::size_t>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
    nt = std::min(nt, n);
    if (nt <= 1) {
        for (std::size_t r = 0; r < n; ++r) body(r, std::size_t{0});
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t tid = 0; tid < nt; ++tid)
        pool.emplace_back([&, tid] {
            for (std::size_t r = tid; r < n; r += nt) body(r, tid);
        });
    for (auto& th : pool) th.join();
}

// Coalescing walkers on the lazily hashed lattice: columns sorted and
// deduplicated; same-parity walkers cannot cross, so sortedness survives
// each row and merging is adjacent-equal removal.
std::size_t coalescing_distinct_count(std::vector<std::int64_t> cols, std::int64_t j0,
                                      std::int64_t rows, std::uint64_t seed) {
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    for (std::int64_t r = 0; r < rows && cols.size() > 1; ++r) {
        std::int64_t j = j0 + r;
        for (auto& c : cols) c += cell_coin(seed, c, j);
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    }
    return cols.size();
}

std::vector<std::int64_t> interval_columns(double a, double b, double delta, std::int64_t j0) {
    auto lo = static_cast<std::int64_t>(std::ceil(a / delta - kAlignTol));
    auto hi = static_cast<std::int64_t>(std::floor(b / delta + kAlignTol));
    std::vector<std::int64_t> cols;
    for (std::int64_t i = lo; i <= hi; ++i)
        if (((i + j0) & 1) == 0) cols.push_back(i);
    return cols;
}

}  // namespace

void EtaQuery::validate() const {
    if (!std::isfinite(t0) || !std::isfinite(t) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("eta query fields must be finite");
    if (!(t > 0.0)) throw std::invalid_argument("eta query needs t > 0");
    if (!(a <= b)) throw std::invalid_argument("eta query needs a <= b");
}

std::size_t count_eta(const PathSet& K, const EtaQuery& q) {
    q.validate();
    const double t1 = q.t0 + q.t;
    const double horizon_slack = kAlignTol * std::max(1.0, std::abs(t1));
    std::vector<double> vals;
    for (const Path& p : K.paths) {
        if (p.t0() > q.t0) continue;
        double x = eval_path(p, q.t0);
        if (!(x >= q.a && x <= q.b)) continue;
        if (p.t_last() < t1 - horizon_slack)
            throw std::invalid_argument("path set horizon does not cover the eta query");
        vals.push_back(eval_path(p, t1));
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals.size();
}

EtaEnsembleResult eta_ensemble(double delta, const EtaQuery& q, const EnsembleConfig& ens) {
    q.validate();
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must be in (0, 1]");
    const double dd = delta * delta;
    const std::int64_t j0 = require_aligned(q.t0, dd, "t0");
    const std::int64_t rows = require_aligned(q.t, dd, "t");
    if (rows < 1) throw std::invalid_argument("t is smaller than one lattice step");

    const std::vector<std::int64_t> cols = interval_columns(q.a, q.b, delta, j0);
    std::vector<double> counts(ens.n_replicas, 0.0);
    parallel_replicas(ens.n_replicas, ens.threads, [&](std::size_t r, std::size_t) {
        counts[r] = static_cast<double>(
            coalescing_distinct_count(cols, j0, rows, derive_seed(ens.seed, r)));
    });

    EtaEnsembleResult out;
    out.delta = delta;
    out.query = q;
    out.summary = summarize(counts, true);
    return out;
}

double theta_closed(double dist, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("theta needs t > 0");
    if (!(dist >= 0.0)) throw std::invalid_argument("theta needs dist >= 0");
    return std::erfc(dist / (2.0 * std::sqrt(t)));
}

double theta_mc(double dist, double t, std::size_t n_pairs, std::uint64_t seed, int n_steps) {
    if (!(t > 0.0)) throw std::invalid_argument("theta needs t > 0");
    if (!(dist >= 0.0)) throw std::invalid_argument("theta needs dist >= 0");
    if (n_steps < 1) throw std::invalid_argument("theta_mc needs n_steps >= 1");
    if (n_pairs == 0) return 0.0;

    const double dt = t / n_steps;
    const double sd = std::sqrt(2.0 * dt);
    std::size_t met = 0;
    for (std::size_t r = 0; r < n_pairs; ++r) {
        Rng rng(derive_seed(seed, r));
        double d0 = dist;
        bool hit = dist == 0.0;
        for (int k = 0; k < n_steps && !hit; ++k) {
            double d1 = d0 + sd * rng.next_gaussian();
            if ((d0 > 0.0) != (d1 > 0.0) || d1 == 0.0)
                hit = true;
            else if (rng.next_unit() < std::exp(-(d0 * d1) / dt))
                hit = true;
            else
                d0 = d1;
        }
        met += hit ? 1 : 0;
    }
    return static_cast<double>(met) / static_cast<double>(n_pairs);
}

EtaBoundReport check_etabound(const StatSummary& summary, int k_max) {
    if (summary.n == 0) throw std::invalid_argument("empty summary");
    if (k_max < 3) throw std::invalid_argument("check_etabound needs k_max >= 3");

    long max_seen = 0;
    for (const auto& [value, count] : summary.histogram)
        if (count > 0) max_seen = std::max(max_seen, value);

    EtaBoundReport rep;
    rep.k_max_used = static_cast<int>(std::min<long>(k_max, std::max<long>(3, max_seen)));
    rep.degraded = rep.k_max_used < k_max;

    const double n = static_cast<double>(summary.n);
    const double p2 = summary.tail_prob(2);
    const double se_p2 = std::sqrt(std::max(0.0, p2 * (1.0 - p2) / n));
    for (int k = 3; k <= rep.k_max_used; ++k) {
        EtaBoundRow row;
        row.k = k;
        row.p_k = summary.tail_prob(k);
        row.bound = std::pow(p2, k - 1);
        double se_pk = std::sqrt(std::max(0.0, row.p_k * (1.0 - row.p_k) / n));
        double se_bound = p2 > 0.0 ? (k - 1) * std::pow(p2, k - 2) * se_p2 : 0.0;
        row.combined_se = std::sqrt(se_pk * se_pk + se_bound * se_bound);
        row.pass = row.p_k <= row.bound + 3.0 * row.combined_se;
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

std::vector<TailScalingFit> eta_tail_scaling(
    const std::vector<std::pair<double, StatSummary>>& by_epsilon, double t, int k_max) {
    if (!(t > 0.0)) throw std::invalid_argument("eta_tail_scaling needs t > 0");
    std::vector<TailScalingFit> out;
    for (int k = 2; k <= k_max; ++k) {
        TailScalingFit fit;
        fit.k = k;
        double lo = kInf, hi = 0.0, sum = 0.0;
        for (const auto& [eps, summary] : by_epsilon) {
            double p = summary.tail_prob(k);
            if (p <= 0.0) continue;
            double c = p / std::pow(eps / std::sqrt(t), k - 1);
            lo = std::min(lo, c);
            hi = std::max(hi, c);
            sum += c;
            ++fit.n_points;
        }
        if (fit.n_points > 0) {
            fit.c_k = sum / static_cast<double>(fit.n_points);
            fit.spread = hi / lo;
        }
        out.push_back(fit);
    }
    return out;
}

namespace {

struct SegTouch {
    bool touched = false;
    double when = 0.0;
};

// Earliest time in [w_lo, w_hi] at which the linear segment (ta,xa)-(tb,xb)
// has value inside [lo, hi].
SegTouch first_band_touch(double ta, double xa, double tb, double xb, double w_lo, double w_hi,
                          double lo, double hi) {
    if (!std::isfinite(xa) || !std::isfinite(xb)) return {};
    double c0 = std::max(ta, w_lo), c1 = std::min(tb, w_hi);
    if (!(c0 <= c1)) return {};
    double slope = tb > ta ? (xb - xa) / (tb - ta) : 0.0;
    double x0 = xa + slope * (c0 - ta);
    if (x0 >= lo && x0 <= hi) return {true, c0};
    if (slope == 0.0) return {};
    if ((x0 < lo && slope < 0.0) || (x0 > hi && slope > 0.0)) return {};
    double edge = x0 < lo ? lo : hi;
    double s = ta + (edge - xa) / slope;
    if (s >= c0 && s <= c1) return {true, s};
    return {};
}

// Earliest time strictly after s_min in [w_lo, w_hi] at which the segment
// value equals `line`.
SegTouch line_touch_after(double ta, double xa, double tb, double xb, double w_lo, double w_hi,
                          double line, double s_min) {
    if (!std::isfinite(xa) || !std::isfinite(xb)) return {};
    double c0 = std::max(ta, w_lo), c1 = std::min(tb, w_hi);
    if (!(c0 <= c1)) return {};
    double slope = tb > ta ? (xb - xa) / (tb - ta) : 0.0;
    if (slope == 0.0) {
        if (xa == line && c1 > s_min) return {true, std::max(c0, s_min)};
        return {};
    }
    double s = ta + (line - xa) / slope;
    if (s >= c0 && s <= c1 && s > s_min) return {true, s};
    return {};
}

// Knot sequence of a path clipped to [lo, hi], hold extensions included.
std::vector<std::pair<double, double>> clipped_knots(const Path& p, double lo, double hi) {
    std::vector<std::pair<double, double>> knots;
    knots.emplace_back(lo, eval_path(p, lo));
    for (std::size_t i = 0; i < p.size(); ++i) {
        double tk = p.times[i];
        if (tk > lo && tk < hi) knots.emplace_back(tk, p.xs[i]);
    }
    knots.emplace_back(hi, eval_path(p, hi));
    return knots;
}

}  // namespace

bool indicator_A(const PathSet& K, double x0, double t0, double t, double u) {
    if (!(t > 0.0)) throw std::invalid_argument("indicator_A needs t > 0");
    if (!(u > std::sqrt(t))) throw std::invalid_argument("indicator_A needs u > sqrt(t)");

    const double w = std::sqrt(t) / 2.0;
    const double band_lo = x0 - w, band_hi = x0 + w;
    const double t_rect_hi = t0 + t, t_all_hi = t0 + 2.0 * t;

    for (const Path& p : K.paths) {
        if (p.t0() > t_rect_hi) continue;
        double start = std::max(p.t0(), t0);
        if (!(start < t_all_hi)) continue;
        auto knots = clipped_knots(p, start, t_all_hi);

        double s1 = kInf;
        for (std::size_t i = 0; i + 1 < knots.size() && s1 == kInf; ++i) {
            auto st = first_band_touch(knots[i].first, knots[i].second, knots[i + 1].first,
                                       knots[i + 1].second, t0, t_rect_hi, band_lo, band_hi);
            if (st.touched) s1 = st.when;
        }
        if (s1 == kInf) continue;

        for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
            if (knots[i + 1].first <= s1) continue;
            for (double line : {x0 - u / 2.0, x0 + u / 2.0}) {
                auto lt = line_touch_after(knots[i].first, knots[i].second, knots[i + 1].first,
                                           knots[i + 1].second, t0, t_all_hi, line, s1);
                if (lt.touched) return true;
            }
        }
    }
    return false;
}

namespace {

struct Placement {
    double x0 = 0.0, t_begin = 0.0;
    double band_lo = 0.0, band_hi = 0.0;
    double rect_t_hi = 0.0;
    double win_t_hi = 0.0;
    double line_lo = 0.0, line_hi = 0.0;
};

// Offsets of the given alignment values modulo `period`, optionally with
// the midpoints of consecutive representatives; always contains 0.
std::vector<double> cell_offsets(double period, const std::vector<double>& crit,
                                 bool midpoints) {
    const double tol = 1e-9 * period;
    std::vector<double> pts{0.0};
    for (double v : crit) {
        double m = std::fmod(v, period);
        if (m < 0.0) m += period;
        if (m < tol || m > period - tol) m = 0.0;
        pts.push_back(m);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [&](double a, double b) { return std::abs(a - b) <= tol; }),
              pts.end());
    if (!midpoints) return pts;
    std::vector<double> out = pts;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double next = i + 1 < pts.size() ? pts[i + 1] : pts[0] + period;
        double mid = 0.5 * (pts[i] + next);
        if (mid < period - tol) out.push_back(mid);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Placement> tightness_placements(double delta, double t, double u, bool midpoints) {
    const double w = std::sqrt(t) / 2.0;
    std::vector<double> xo = cell_offsets(delta, {w, -w, u / 2.0, -u / 2.0}, midpoints);
    std::vector<double> to = cell_offsets(delta * delta, {-t, -2.0 * t}, midpoints);
    std::vector<Placement> ps;
    for (double base : xo)
        for (int parity = 0; parity < 2; ++parity)
            for (double ot : to) {
                double ox = base + parity * delta;
                Placement p;
                p.x0 = ox;
                p.t_begin = ot;
                p.band_lo = ox - w;
                p.band_hi = ox + w;
                p.rect_t_hi = ot + t;
                p.win_t_hi = ot + 2.0 * t;
                p.line_lo = ox - u / 2.0;
                p.line_hi = ox + u / 2.0;
                ps.push_back(p);
            }
    return ps;
}

}  // namespace

GEstimate estimate_g(double delta, double t, double u, const EnsembleConfig& ens) {
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must be in (0, 1]");
    if (!(t > 0.0)) throw std::invalid_argument("estimate_g needs t > 0");
    if (!(u > std::sqrt(t))) throw std::invalid_argument("estimate_g needs u > sqrt(t)");

    std::vector<Placement> ps = tightness_placements(delta, t, u, true);
    if (ps.size() > 64) ps = tightness_placements(delta, t, u, false);
    if (ps.size() > 64) throw ResourceError("too many tightness placements for this (t, u)");
    const std::size_t np = ps.size();
    const std::uint64_t all_mask = np == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << np) - 1);

    const double dd = delta * delta;
    const double w = std::sqrt(t) / 2.0;
    const double half_u = u / 2.0;

    std::int64_t rect_rows = 0, total_rows = 0;
    double band_min = kInf, band_max = -kInf;
    for (const Placement& p : ps) {
        rect_rows = std::max(rect_rows, static_cast<std::int64_t>(std::ceil(p.rect_t_hi / dd)));
        total_rows = std::max(total_rows, static_cast<std::int64_t>(std::ceil(p.win_t_hi / dd)) + 1);
        band_min = std::min(band_min, p.band_lo);
        band_max = std::max(band_max, p.band_hi);
    }
    const auto margin =
        static_cast<std::int64_t>(std::ceil(5.0 * std::sqrt(static_cast<double>(rect_rows)))) + 4;
    std::int64_t col_lo = static_cast<std::int64_t>(std::floor(band_min / delta)) - margin;
    std::int64_t col_hi = static_cast<std::int64_t>(std::ceil(band_max / delta)) + margin;
    col_lo += col_lo & 1;  // row 0 sites are even

    std::size_t nt = ens.threads > 0 ? static_cast<std::size_t>(ens.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    nt = std::max<std::size_t>(1, std::min(nt, std::max<std::size_t>(ens.n_replicas, 1)));
    std::vector<std::vector<std::size_t>> hits(nt, std::vector<std::size_t>(np, 0));

    parallel_replicas(ens.n_replicas, ens.threads, [&](std::size_t r, std::size_t tid) {
        const std::uint64_t seed_r = derive_seed(ens.seed, r);
        std::vector<std::int64_t> cols;
        for (std::int64_t c = col_lo; c <= col_hi; c += 2) cols.push_back(c);
        std::vector<std::uint64_t> flags(cols.size(), 0);
        std::vector<double> s1(cols.size() * np, kInf);
        std::uint64_t fired = 0;

        for (std::int64_t j = 0; j < total_rows && fired != all_mask && !cols.empty(); ++j) {
            const double ta = static_cast<double>(j) * dd;
            const double tb = ta + dd;
            for (std::size_t ci = 0; ci < cols.size(); ++ci) {
                const std::int64_t c = cols[ci];
                const int a = cell_coin(seed_r, c, j);
                const std::int64_t nc = c + a;
                const double xa = static_cast<double>(c) * delta;
                const double xb = static_cast<double>(nc) * delta;
                std::uint64_t f = flags[ci];
                cols[ci] = nc;

                if ((f & ~fired) == 0 && (xa < band_min - delta || xa > band_max + delta))
                    continue;

                for (std::size_t p = 0; p < np; ++p) {
                    const std::uint64_t bit = std::uint64_t{1} << p;
                    if (fired & bit) continue;
                    const Placement& P = ps[p];
                    if (tb < P.t_begin || ta > P.win_t_hi) continue;
                    if (!(f & bit)) {
                        if (ta <= P.rect_t_hi && std::abs(xa - P.x0) <= w + delta) {
                            auto st = first_band_touch(ta, xa, tb, xb, P.t_begin, P.rect_t_hi,
                                                       P.band_lo, P.band_hi);
                            if (st.touched) {
                                f |= bit;
                                s1[ci * np + p] = st.when;
                            }
                        }
                    }
                    if (f & bit) {
                        double ref = xa - P.x0;
                        if (std::abs(std::abs(ref) - half_u) <= delta) {
                            double line = ref >= 0.0 ? P.line_hi : P.line_lo;
                            auto lt = line_touch_after(ta, xa, tb, xb, P.t_begin, P.win_t_hi,
                                                       line, s1[ci * np + p]);
                            if (lt.touched) fired |= bit;
                        }
                    }
                }
                flags[ci] = f;
            }

            // Merge coalesced walkers (order is preserved, duplicates adjacent).
            std::size_t out = 0;
            for (std::size_t ci = 0; ci < cols.size(); ++ci) {
                if (out > 0 && cols[ci] == cols[out - 1]) {
                    flags[out - 1] |= flags[ci];
                    for (std::size_t p = 0; p < np; ++p)
                        s1[(out - 1) * np + p] = std::min(s1[(out - 1) * np + p], s1[ci * np + p]);
                    continue;
                }
                if (out != ci) {
                    cols[out] = cols[ci];
                    flags[out] = flags[ci];
                    for (std::size_t p = 0; p < np; ++p) s1[out * np + p] = s1[ci * np + p];
                }
                ++out;
            }
            cols.resize(out);
            flags.resize(out);
            s1.resize(out * np);

            // Drop walkers that can no longer matter: unflagged ones too far
            // from every rectangle to reach it in the remaining rect rows.
            if ((j & 15) == 15) {
                double reach = delta * (5.0 * std::sqrt(static_cast<double>(
                                                std::max<std::int64_t>(rect_rows - j, 0))) +
                                        4.0);
                std::size_t keep = 0;
                for (std::size_t ci = 0; ci < cols.size(); ++ci) {
                    bool pending = (flags[ci] & ~fired) != 0;
                    if (!pending && j < rect_rows) {
                        double x = static_cast<double>(cols[ci]) * delta;
                        pending = x >= band_min - reach && x <= band_max + reach;
                    }
                    if (!pending) continue;
                    if (keep != ci) {
                        cols[keep] = cols[ci];
                        flags[keep] = flags[ci];
                        for (std::size_t p = 0; p < np; ++p) s1[keep * np + p] = s1[ci * np + p];
                    }
                    ++keep;
                }
                cols.resize(keep);
                flags.resize(keep);
                s1.resize(keep * np);
            }
        }
        for (std::size_t p = 0; p < np; ++p)
            if (fired & (std::uint64_t{1} << p)) ++hits[tid][p];
    });

    std::vector<std::size_t> total(np, 0);
    for (const auto& part : hits)
        for (std::size_t p = 0; p < np; ++p) total[p] += part[p];

    std::size_t best = 0;
    for (std::size_t p = 1; p < np; ++p)
        if (total[p] > total[best]) best = p;

    GEstimate out;
    out.n_placements = np;
    out.n_replicas = ens.n_replicas;
    if (ens.n_replicas > 0) {
        double n = static_cast<double>(ens.n_replicas);
        out.g = static_cast<double>(total[best]) / n;
        out.std_error = std::sqrt(std::max(0.0, out.g * (1.0 - out.g) / n));
    }
    out.x_offset = ps[best].x0;
    out.t_offset = ps[best].t_begin;
    out.g_over_t32 = out.g / std::pow(t, 1.5);
    out.shape_u4_over_t2 = out.g * std::pow(u, 4.0) / (t * t);
    return out;
}

std::vector<BStatRow> b_statistics(const std::vector<double>& deltas, double t0, double t,
                                   const std::vector<double>& epsilons,
                                   const EnsembleConfig& ens) {
    if (!(t > 0.0)) throw std::invalid_argument("b_statistics needs t > 0");
    std::vector<BStatRow> out;
    std::size_t run = 0;
    for (double delta : deltas) {
        if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must be in (0, 1]");
        const double dd = delta * delta;
        const std::int64_t j0 = require_aligned(t0, dd, "t0");
        const std::int64_t rows = require_aligned(t, dd, "t");
        for (double eps : epsilons) {
            if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
            const auto n_sites =
                static_cast<std::int64_t>(std::floor(eps / (2.0 * delta) + kAlignTol)) + 1;
            std::vector<std::int64_t> cols;
            for (std::int64_t k = 0; k < n_sites; ++k) cols.push_back(2 * k);

            std::vector<double> counts(ens.n_replicas, 0.0);
            const std::uint64_t run_seed = derive_seed(ens.seed, 1000 + run);
            parallel_replicas(ens.n_replicas, ens.threads, [&](std::size_t r, std::size_t) {
                counts[r] = static_cast<double>(
                    coalescing_distinct_count(cols, j0, rows, derive_seed(run_seed, r)));
            });
            StatSummary s = summarize(counts, true);

            BStatRow row;
            row.delta = delta;
            row.epsilon = eps;
            row.n_sites = n_sites;
            row.n = ens.n_replicas;
            row.b1 = s.tail_prob(2);
            row.b1_se = std::sqrt(std::max(0.0, row.b1 * (1.0 - row.b1) /
                                                    std::max<double>(1.0, double(s.n))));
            double p3 = s.tail_prob(3);
            double p3_se =
                std::sqrt(std::max(0.0, p3 * (1.0 - p3) / std::max<double>(1.0, double(s.n))));
            row.b2 = p3 / eps;
            row.b2_se = p3_se / eps;
            out.push_back(row);
            ++run;
        }
    }
    return out;
}

double donsker_marginal_check(double delta, double t_eval, const EnsembleConfig& ens) {
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must be in (0, 1]");
    if (!(t_eval > 0.0)) throw std::invalid_argument("t_eval must be positive");
    const std::int64_t n_steps = require_aligned(t_eval, delta * delta, "t_eval");
    if (n_steps < 1) throw std::invalid_argument("t_eval is smaller than one lattice step");
    if (ens.n_replicas == 0) return 0.0;

    std::vector<double> pos(ens.n_replicas);
    parallel_replicas(ens.n_replicas, ens.threads, [&](std::size_t r, std::size_t) {
        Rng rng(derive_seed(ens.seed, r));
        std::int64_t heads = 0;
        const std::int64_t full = n_steps / 64;
        const int rem = static_cast<int>(n_steps % 64);
        for (std::int64_t i = 0; i < full; ++i)
            heads += std::popcount(rng.next_u64());
        if (rem > 0) heads += std::popcount(rng.next_u64() & (~std::uint64_t{0} >> (64 - rem)));
        pos[r] = delta * static_cast<double>(2 * heads - n_steps);
    });

    const double sd = std::sqrt(t_eval);
    return ks_vs_cdf(pos, [sd](double x) { return normal_cdf(x / sd); });
}

double donsker_pair_meeting(double delta, double dist, double t_max, const EnsembleConfig& ens) {
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must be in (0, 1]");
    if (!(dist > 0.0)) throw std::invalid_argument("dist must be positive");
    const std::int64_t gap = require_aligned(dist, delta, "dist");
    if (gap <= 0 || (gap & 1)) throw std::invalid_argument("dist must be an even multiple of delta");
    const double dd = delta * delta;
    const std::int64_t rows = require_aligned(t_max, dd, "t_max");
    if (rows < 1) throw std::invalid_argument("t_max is smaller than one lattice step");
    if (ens.n_replicas == 0) return 0.0;

    std::vector<double> meet(ens.n_replicas, kInf);
    parallel_replicas(ens.n_replicas, ens.threads, [&](std::size_t r, std::size_t) {
        Rng rng(derive_seed(ens.seed, r));
        std::int64_t d = gap;
        std::uint64_t word = 0;
        int avail = 0;
        for (std::int64_t k = 1; k <= rows; ++k) {
            if (avail == 0) {
                word = rng.next_u64();
                avail = 32;
            }
            const unsigned two = word & 3u;
            word >>= 2;
            --avail;
            if (two == 0u)
                d -= 2;
            else if (two == 3u)
                d += 2;
            if (d == 0) {
                meet[r] = dd * static_cast<double>(k);
                break;
            }
        }
    });

    std::vector<double> times;
    for (double m : meet)
        if (m < kInf) times.push_back(m);
    std::sort(times.begin(), times.end());

    const double n = static_cast<double>(ens.n_replicas);
    double sup = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        double s = theta_closed(dist, times[i]);
        sup = std::max(sup, std::abs(static_cast<double>(i + 1) / n - s));
        sup = std::max(sup, std::abs(static_cast<double>(i) / n - s));
    }
    sup = std::max(sup, std::abs(static_cast<double>(times.size()) / n - theta_closed(dist, t_max)));
    return sup;
}

std::pair<std::size_t, std::size_t> count_eta_dual(const ArrowField& forward, const EtaQuery& q) {
    q.validate();
    if (forward.orientation() != ArrowField::Orientation::forward)
        throw std::invalid_argument("count_eta_dual needs a forward field");
    if (forward.window().boundary == Boundary::periodic)
        throw std::invalid_argument(
            "count_eta_dual needs an open window (the identity fails on a cylinder)");
    const std::int64_t t0 = require_integer(q.t0, "t0");
    const std::int64_t tt = require_integer(q.t, "t");
    const std::int64_t a = require_integer(q.a, "a");
    const std::int64_t b = require_integer(q.b, "b");
    if ((t0 & 1) || ((t0 + tt) & 1) || (a & 1) || (b & 1))
        throw std::invalid_argument("count_eta_dual needs even t0, t0+t, a, b");

    std::vector<std::int64_t> cols;
    for (std::int64_t i = a; i <= b; i += 2) cols.push_back(i);
    for (std::int64_t j = t0; j < t0 + tt; ++j) {
        for (auto& c : cols) c += forward.arrow(c, j);
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    }
    const std::size_t eta = cols.size();

    const ArrowField dual = dual_field(forward);
    std::vector<std::int64_t> dcols;
    for (std::int64_t i = a - tt + 1; i <= b + tt - 1; i += 2) dcols.push_back(i);
    for (std::int64_t j = t0 + tt; j > t0; --j) {
        for (auto& c : dcols) c += dual.arrow(c, j);
        dcols.erase(std::unique(dcols.begin(), dcols.end()), dcols.end());
    }
    std::size_t eta_dual = 0;
    for (auto c : dcols)
        if (c > a && c < b) ++eta_dual;
    return {eta, eta_dual};
}

std::size_t CensusCounts::at(int m_in, int m_out) const {
    auto it = classes.find({m_in, m_out});
    return it == classes.end() ? 0 : it->second;
}

CensusReport point_census(const ArrowField& forward, const Window& region) {
    if (forward.orientation() != ArrowField::Orientation::forward)
        throw std::invalid_argument("point_census needs a forward field");
    const Window& fw = forward.window();
    const bool periodic = fw.boundary == Boundary::periodic;

    const std::int64_t i_lo = periodic ? std::max(region.i_min, fw.i_min)
                                       : std::max(region.i_min, fw.i_min + 1);
    const std::int64_t i_hi = periodic ? std::min(region.i_max, fw.i_max)
                                       : std::min(region.i_max, fw.i_max - 1);

    CensusReport rep;
    {
        const std::int64_t j_lo = std::max(region.j_min(), fw.j_min() + 1);
        const std::int64_t j_hi = std::min(region.j_max(), fw.j_max());
        for (std::int64_t j = j_lo; j <= j_hi; ++j)
            for (std::int64_t i = i_lo; i <= i_hi; ++i) {
                if (((i + j) & 1) != 0) continue;
                int m_in = (forward.arrow(i - 1, j - 1) == 1 ? 1 : 0) +
                           (forward.arrow(i + 1, j - 1) == -1 ? 1 : 0);
                ++rep.forward.classes[{m_in, 1}];
                ++rep.forward.total;
            }
    }
    {
        const ArrowField dual = dual_field(forward);
        const std::int64_t j_lo = std::max(region.j_min(), fw.j_min() + 1);
        const std::int64_t j_hi = std::min(region.j_max(), fw.j_max() - 1);
        for (std::int64_t j = j_lo; j <= j_hi; ++j)
            for (std::int64_t i = i_lo; i <= i_hi; ++i) {
                if (((i + j) & 1) == 0) continue;
                int m_in = (dual.arrow(i - 1, j + 1) == 1 ? 1 : 0) +
                           (dual.arrow(i + 1, j + 1) == -1 ? 1 : 0);
                ++rep.dual.classes[{m_in, 1}];
                ++rep.dual.total;
            }
    }
    return rep;
}

}  // namespace coalweb

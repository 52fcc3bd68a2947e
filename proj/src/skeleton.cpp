#include "coalweb/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <thread>

#include "coalweb/rng.hpp"

namespace coalweb {

void SeedSet::validate() const {
    if (pts.empty()) throw std::invalid_argument("seed set is empty");
    for (const auto& p : pts) {
        if (!std::isfinite(p.x) || !std::isfinite(p.t))
            throw std::invalid_argument("seed coordinates must be finite");
    }
    for (std::size_t a = 0; a + 1 < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b)
            if (pts[a].x == pts[b].x && pts[a].t == pts[b].t)
                throw std::invalid_argument("duplicate seed point");
}

void TimeGrid::validate() const {
    if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
    if (!(t_start < t_end)) throw std::invalid_argument("grid needs t_start < t_end");
}

std::int64_t TimeGrid::n_steps() const {
    validate();
    double q = (t_end - t_start) / step;
    return static_cast<std::int64_t>(std::ceil(q - 1e-9 * std::max(1.0, q)));
}

std::int64_t TimeGrid::snap(double t) const {
    double k = std::round((t - t_start) / step);
    if (k < 0.0) k = 0.0;
    double n = static_cast<double>(n_steps());
    if (k > n) k = n;
    return static_cast<std::int64_t>(k);
}

bool Skeleton::alive_at(std::size_t path, std::int64_t grid_index) const {
    const auto& p = paths.at(path);
    std::int64_t off = grid_index - p.birth_index;
    return off >= 0 && off < static_cast<std::int64_t>(p.values.size());
}

double Skeleton::value_at(std::size_t path, std::int64_t grid_index) const {
    const auto& p = paths.at(path);
    std::int64_t off = grid_index - p.birth_index;
    if (off < 0 || off >= static_cast<std::int64_t>(p.values.size()))
        throw std::out_of_range("grid index outside path support");
    return p.values[static_cast<std::size_t>(off)];
}

namespace {

// Copies the partner's values from grid index `from` to the horizon.
void adopt_tail(SkeletonPath& path, const SkeletonPath& tgt, std::int64_t from) {
    std::int64_t off = from - tgt.birth_index;
    for (std::size_t m = static_cast<std::size_t>(off); m < tgt.values.size(); ++m)
        path.values.push_back(tgt.values[m]);
}

}  // namespace

Skeleton sample_skeleton_detailed(const SeedSet& seeds, const TimeGrid& grid, std::uint64_t seed,
                                  bool bridge_correction) {
    if (seeds.pts.empty()) throw std::invalid_argument("seed set is empty");
    grid.validate();
    for (const auto& p : seeds.pts) {
        if (!std::isfinite(p.x) || !std::isfinite(p.t))
            throw std::invalid_argument("seed coordinates must be finite");
        if (p.t < grid.t_start - grid.step / 2 || p.t > grid.t_end + grid.step / 2)
            throw std::out_of_range("seed time outside the grid");
    }

    Skeleton sk;
    sk.grid = grid;
    const std::int64_t n = grid.n_steps();
    const double dt = grid.step;

    Rng rng(seed);
    for (std::size_t idx = 0; idx < seeds.pts.size(); ++idx) {
        const SeedPoint& sp = seeds.pts[idx];
        SkeletonPath path;
        path.seed_index = static_cast<int>(idx);
        path.birth_index = grid.snap(sp.t);
        path.snap_distance = std::abs(sp.t - grid.time(path.birth_index));
        path.values.push_back(sp.x);

        for (std::size_t e = 0; e < sk.paths.size(); ++e) {
            if (sk.alive_at(e, path.birth_index) &&
                sk.value_at(e, path.birth_index) == sp.x) {
                path.coalesced_with = static_cast<int>(e);
                path.merge_index = path.birth_index;
                adopt_tail(path, sk.paths[e], path.birth_index + 1);
                break;
            }
        }

        for (std::int64_t k = path.birth_index; path.coalesced_with < 0 && k < n; ++k) {
            double x0 = path.values.back();
            double x1 = x0 + std::sqrt(dt) * rng.next_gaussian();
            double u = bridge_correction ? rng.next_unit() : 2.0;

            int best = -1;
            double best_frac = 2.0;
            double best_p = -1.0;
            for (std::size_t e = 0; e < sk.paths.size(); ++e) {
                if (!sk.alive_at(e, k) || !sk.alive_at(e, k + 1)) continue;
                double d0 = x0 - sk.value_at(e, k);
                double d1 = x1 - sk.value_at(e, k + 1);
                double frac;
                double p = -1.0;
                if ((d0 > 0.0) != (d1 > 0.0) || d1 == 0.0) {
                    frac = d0 / (d0 - d1);
                } else {
                    p = std::exp(-(d0 * d1) / dt);
                    if (!(u < p)) continue;
                    frac = 1.0;
                }
                bool better = frac < best_frac ||
                              (frac == best_frac && (p > best_p || (p == best_p && best < 0)));
                if (better) {
                    best = static_cast<int>(e);
                    best_frac = frac;
                    best_p = p;
                }
            }

            if (best >= 0) {
                path.coalesced_with = best;
                path.merge_index = k + 1;
                adopt_tail(path, sk.paths[static_cast<std::size_t>(best)], k + 1);
            } else {
                path.values.push_back(x1);
            }
        }
        sk.paths.push_back(std::move(path));
    }
    return sk;
}

PathSet sample_skeleton(const SeedSet& seeds, const TimeGrid& grid, std::uint64_t seed,
                        bool bridge_correction) {
    Skeleton sk = sample_skeleton_detailed(seeds, grid, seed, bridge_correction);
    PathSet out;
    out.provenance = Provenance::skeleton;
    for (const auto& p : sk.paths) {
        Path path;
        for (std::size_t m = 0; m < p.values.size(); ++m)
            path.push(sk.grid.time(p.birth_index + static_cast<std::int64_t>(m)), p.values[m]);
        out.paths.push_back(std::move(path));
    }
    return out;
}

bool check_skeleton_noncrossing(const Skeleton& sk) {
    const std::int64_t n = sk.grid.n_steps();
    for (std::size_t a = 0; a + 1 < sk.paths.size(); ++a) {
        for (std::size_t b = a + 1; b < sk.paths.size(); ++b) {
            std::int64_t start = std::max(sk.paths[a].birth_index, sk.paths[b].birth_index);
            bool met = false;
            int sign = 0;
            for (std::int64_t k = start; k <= n; ++k) {
                if (!sk.alive_at(a, k) || !sk.alive_at(b, k)) return false;
                double d = sk.value_at(a, k) - sk.value_at(b, k);
                if (met) {
                    if (d != 0.0) return false;
                } else if (d == 0.0) {
                    met = true;
                } else {
                    int s = d > 0.0 ? 1 : -1;
                    if (sign != 0 && s != sign) return false;
                    sign = s;
                }
            }
        }
    }
    return true;
}

double meeting_time(const Skeleton& sk, std::size_t a, std::size_t b) {
    const std::int64_t n = sk.grid.n_steps();
    std::int64_t start = std::max(sk.paths.at(a).birth_index, sk.paths.at(b).birth_index);
    for (std::int64_t k = start; k <= n; ++k)
        if (sk.value_at(a, k) == sk.value_at(b, k)) return sk.grid.time(k);
    return sk.grid.t_end + sk.grid.step;
}

namespace {

struct ReplicaSummary {
    double meet_time = 0.0;
    double marginal = 0.0;
    double eta = 0.0;
};

ReplicaSummary run_replica(const SeedSet& seeds, const TimeGrid& grid, std::uint64_t seed,
                           std::size_t pair_a, std::size_t pair_b, std::size_t marginal_path,
                           double eta_a, double eta_b) {
    Skeleton sk = sample_skeleton_detailed(seeds, grid, seed, true);
    ReplicaSummary out;
    out.meet_time = seeds.pts.size() > 1 ? meeting_time(sk, pair_a, pair_b) : grid.t_end;
    out.marginal = sk.paths.at(marginal_path).values.back();

    std::vector<double> finals;
    for (const auto& p : sk.paths) {
        if (p.birth_index != 0) continue;
        if (p.values.front() < eta_a || p.values.front() > eta_b) continue;
        finals.push_back(p.values.back());
    }
    std::sort(finals.begin(), finals.end());
    finals.erase(std::unique(finals.begin(), finals.end()), finals.end());
    out.eta = static_cast<double>(finals.size());
    return out;
}

}  // namespace

OrderingInvarianceReport ordering_invariance_check(const OrderingCheckConfig& cfg) {
    cfg.seeds.validate();
    const std::size_t n_seeds = cfg.seeds.pts.size();
    if (n_seeds < 2) throw std::invalid_argument("ordering check needs at least two seeds");

    std::vector<std::size_t> order2 = cfg.second_order;
    if (order2.empty()) {
        order2.resize(n_seeds);
        for (std::size_t i = 0; i < n_seeds; ++i) order2[i] = n_seeds - 1 - i;
    }
    if (order2.size() != n_seeds) throw std::invalid_argument("second order has wrong length");
    std::vector<std::size_t> pos2(n_seeds, n_seeds);
    for (std::size_t i = 0; i < n_seeds; ++i) {
        if (order2[i] >= n_seeds || pos2[order2[i]] != n_seeds)
            throw std::invalid_argument("second order is not a permutation");
        pos2[order2[i]] = i;
    }

    SeedSet permuted;
    for (std::size_t i = 0; i < n_seeds; ++i) permuted.pts.push_back(cfg.seeds.pts[order2[i]]);

    std::vector<ReplicaSummary> fwd(cfg.n_replicas), alt(cfg.n_replicas);
    int n_threads = cfg.threads > 0
                        ? cfg.threads
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto worker = [&](int tid) {
        for (std::size_t r = static_cast<std::size_t>(tid); r < cfg.n_replicas;
             r += static_cast<std::size_t>(n_threads)) {
            fwd[r] = run_replica(cfg.seeds, cfg.grid, derive_seed(cfg.seed, 2 * r), 0, 1, 0,
                                 cfg.eta_a, cfg.eta_b);
            alt[r] = run_replica(permuted, cfg.grid, derive_seed(cfg.seed, 2 * r + 1), pos2[0],
                                 pos2[1], pos2[0], cfg.eta_a, cfg.eta_b);
        }
    };
    std::vector<std::thread> pool;
    for (int tid = 0; tid < n_threads; ++tid) pool.emplace_back(worker, tid);
    for (auto& th : pool) th.join();

    auto column = [](const std::vector<ReplicaSummary>& v, double ReplicaSummary::*field) {
        std::vector<double> out;
        out.reserve(v.size());
        for (const auto& s : v) out.push_back(s.*field);
        return out;
    };

    OrderingInvarianceReport rep;
    rep.n_replicas = cfg.n_replicas;
    rep.ks_meet_time = ks_two_sample(column(fwd, &ReplicaSummary::meet_time),
                                     column(alt, &ReplicaSummary::meet_time));
    rep.ks_marginal = ks_two_sample(column(fwd, &ReplicaSummary::marginal),
                                    column(alt, &ReplicaSummary::marginal));
    rep.ks_eta =
        ks_two_sample(column(fwd, &ReplicaSummary::eta), column(alt, &ReplicaSummary::eta));
    return rep;
}

namespace {

double holder_sup(const std::vector<double>& xs, double dt, double xi) {
    double sup = 0.0;
    for (std::size_t a = 0; a + 1 < xs.size(); ++a) {
        for (std::size_t b = a + 1; b < xs.size(); ++b) {
            double gap = dt * static_cast<double>(b - a);
            double v = std::abs(xs[b] - xs[a]) / std::pow(gap, xi);
            sup = std::max(sup, v);
        }
    }
    return sup;
}

std::vector<double> subsample(const std::vector<double>& xs, std::size_t stride) {
    std::vector<double> out;
    for (std::size_t k = 0; k < xs.size(); k += stride) out.push_back(xs[k]);
    return out;
}

}  // namespace

HolderReport holder_diagnostic(double dt_base, int n_coarse, std::size_t n_paths,
                               std::uint64_t root_seed) {
    if (!(dt_base > 0.0) || n_coarse < 1)
        throw std::invalid_argument("holder diagnostic needs positive dt and step count");
    const std::size_t refine = 16;
    const double dt_fine = dt_base / static_cast<double>(refine);
    const std::size_t n_fine = static_cast<std::size_t>(n_coarse) * refine;

    std::vector<double> r4(n_paths), r16(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        Rng rng(derive_seed(root_seed, p));
        std::vector<double> xs(n_fine + 1, 0.0);
        for (std::size_t k = 1; k <= n_fine; ++k)
            xs[k] = xs[k - 1] + std::sqrt(dt_fine) * rng.next_gaussian();

        std::vector<double> base = subsample(xs, refine);
        std::vector<double> mid = subsample(xs, 4);

        r4[p] = holder_sup(mid, dt_fine * 4.0, 0.45) / holder_sup(base, dt_base, 0.45);
        r16[p] = holder_sup(xs, dt_fine, 0.55) / holder_sup(base, dt_base, 0.55);
    }

    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        std::size_t n = v.size();
        return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };

    HolderReport rep;
    rep.n_paths = n_paths;
    rep.ratio_4x_xi045 = median(r4);
    rep.ratio_16x_xi055 = median(r16);
    return rep;
}

}  // namespace coalweb

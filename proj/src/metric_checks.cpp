#include "coalweb/metric_checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "coalweb/lattice.hpp"
#include "coalweb/path.hpp"
#include "coalweb/pathspace.hpp"
#include "coalweb/rng.hpp"
#include "coalweb/spacetime.hpp"

namespace coalweb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExactTol = 1e-12;
constexpr double kPathTol = 1e-9;

std::vector<Path> build_pool(std::uint64_t seed) {
    Window w;
    w.i_min = -96;
    w.i_max = 96;
    w.t_min = 0;
    w.t_max = 32;
    w.boundary = Boundary::open_buffer;
    ArrowField f = sample_arrow_field(w, seed);

    std::vector<std::pair<std::int64_t, std::int64_t>> starts;
    for (std::int64_t j : {std::int64_t{0}, std::int64_t{9}, std::int64_t{17}})
        for (std::int64_t i = -30; i <= 30; i += 3)
            if (((i + j) & 1) == 0) starts.emplace_back(i, j);
    std::vector<Path> pool = build_discrete_web(f, starts).paths;

    for (double x : {-3.0, 0.0, 0.25, 7.5}) {
        Path c;
        c.push(-2.0, x);
        c.push(5.0, x);
        pool.push_back(c);
    }
    Path old;
    old.push(-kInf, 1.0);
    old.push(0.0, 1.0);
    old.push(4.0, -3.0);
    pool.push_back(old);
    return pool;
}

SpaceTimePoint random_point(Rng& rng) {
    SpaceTimePoint p;
    double kind = rng.next_unit();
    if (kind < 0.1) {
        p.t = rng.next_unit() < 0.5 ? kInf : -kInf;
        p.x = 10.0 * (rng.next_unit() - 0.5);
    } else {
        p.x = std::tan((rng.next_unit() - 0.5) * 3.0);
        p.t = std::tan((rng.next_unit() - 0.5) * 3.0);
    }
    return p;
}

}  // namespace

MetricTripleReport run_metric_triples(std::size_t n_triples, std::uint64_t seed,
                                      double psi_step) {
    MetricTripleReport rep;
    rep.n_triples = n_triples;

    const std::vector<Path> pool = build_pool(derive_seed(seed, 0));
    Rng rng(derive_seed(seed, 1));

    for (std::size_t it = 0; it < n_triples; ++it) {
        {
            SpaceTimePoint pa = random_point(rng), pb = random_point(rng),
                           pc = random_point(rng);
            double ab = rho(pa, pb), ba = rho(pb, pa);
            double ac = rho(pa, pc), cb = rho(pc, pb);
            bool ok = std::abs(ab - ba) <= kExactTol && rho(pa, pa) == 0.0 &&
                      ab <= ac + cb + kExactTol && ab <= 2.0 + kExactTol;
            if (!ok) ++rep.rho_violations;

            double x1 = 10.0 * (rng.next_unit() - 0.5), x2 = 10.0 * (rng.next_unit() - 0.5);
            double cap = rng.next_unit() < 0.5 ? kInf : -kInf;
            if (rho({x1, cap}, {x2, cap}) != 0.0) ++rep.cap_identity_failures;
        }
        {
            const Path& f = pool[rng.next_u64() % pool.size()];
            const Path& g = pool[rng.next_u64() % pool.size()];
            const Path& h = pool[rng.next_u64() % pool.size()];
            PathDistResult fg = path_dist_detailed(f, g, psi_step);
            PathDistResult gf = path_dist_detailed(g, f, psi_step);
            PathDistResult fh = path_dist_detailed(f, h, psi_step);
            PathDistResult hg = path_dist_detailed(h, g, psi_step);
            rep.max_refine_error = std::max(
                {rep.max_refine_error, fg.refine_error, fh.refine_error, hg.refine_error});
            double slack = kPathTol + fh.refine_error + hg.refine_error;
            bool ok = std::abs(fg.value - gf.value) <= kExactTol &&
                      path_dist(f, f, psi_step) == 0.0 &&
                      fg.value <= fh.value + hg.value + slack;
            if (!ok) ++rep.path_violations;
        }
        if (it % 4 == 0) {
            auto pick_family = [&](std::size_t n) {
                PathSet s;
                for (std::size_t k = 0; k < n; ++k)
                    s.paths.push_back(pool[rng.next_u64() % pool.size()]);
                return s;
            };
            PathSet A = pick_family(1 + rng.next_u64() % 4);
            PathSet B = pick_family(1 + rng.next_u64() % 4);
            PathSet C = pick_family(1 + rng.next_u64() % 4);
            HausdorffResult ab = hausdorff_dist_detailed(A, B, psi_step);
            HausdorffResult ba = hausdorff_dist_detailed(B, A, psi_step);
            HausdorffResult ac = hausdorff_dist_detailed(A, C, psi_step);
            HausdorffResult cb = hausdorff_dist_detailed(C, B, psi_step);
            rep.max_refine_error = std::max(
                {rep.max_refine_error, ab.refine_error, ac.refine_error, cb.refine_error});
            double slack = kPathTol + ac.refine_error + cb.refine_error;
            bool ok = std::abs(ab.value - ba.value) <= kExactTol &&
                      hausdorff_dist(A, A, psi_step) == 0.0 &&
                      ab.value <= ac.value + cb.value + slack;
            if (!ok) ++rep.family_violations;
        }
    }
    return rep;
}

}  // namespace coalweb

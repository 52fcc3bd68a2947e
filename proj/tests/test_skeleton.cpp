#include <cmath>
#include <stdexcept>
#include <vector>

#include "coalweb/rng.hpp"
#include "coalweb/skeleton.hpp"
#include "doctest.h"

using namespace coalweb;

TEST_CASE("time grid basics") {
    TimeGrid g{0.0, 1.0, 0.25};
    CHECK_NOTHROW(g.validate());
    CHECK(g.n_steps() == 4);
    CHECK(g.time(3) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(g.snap(0.26) == 1);
    CHECK(g.snap(-5.0) == 0);
    CHECK(g.snap(99.0) == g.n_steps());

    TimeGrid bad{1.0, 0.0, 0.25};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    TimeGrid zero{0.0, 1.0, 0.0};
    CHECK_THROWS_AS(zero.validate(), std::invalid_argument);
}

TEST_CASE("seeds at the same point coalesce immediately") {
    SeedSet seeds;
    seeds.pts = {{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}};
    TimeGrid grid{0.0, 1.0, 0.01};
    Skeleton sk = sample_skeleton_detailed(seeds, grid, 5, true);
    REQUIRE(sk.paths.size() == 3);
    CHECK(sk.paths[1].coalesced_with == 0);
    CHECK(sk.paths[1].merge_index == 0);
    for (std::int64_t k = 0; k <= grid.n_steps(); ++k)
        CHECK(sk.value_at(1, k) == sk.value_at(0, k));
    CHECK(check_skeleton_noncrossing(sk));
}

TEST_CASE("construction is non-crossing with and without the bridge rule") {
    SeedSet seeds;
    seeds.pts = {{-1.0, 0.0}, {0.0, 0.0}, {0.5, 0.0}, {-0.25, 0.3}, {1.5, 0.1}};
    TimeGrid grid{0.0, 1.0, 0.02};
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        for (bool bridge : {false, true}) {
            Skeleton sk = sample_skeleton_detailed(seeds, grid, seed, bridge);
            CHECK(check_skeleton_noncrossing(sk));
            for (const SkeletonPath& p : sk.paths)
                if (p.coalesced_with >= 0) {
                    // equal from the merge time on
                    for (std::int64_t k = p.merge_index; k <= grid.n_steps(); ++k)
                        CHECK(sk.value_at(static_cast<std::size_t>(p.seed_index), k) ==
                              sk.value_at(static_cast<std::size_t>(p.coalesced_with), k));
                }
        }
    }
}

TEST_CASE("meeting times are symmetric and respect the horizon") {
    SeedSet seeds;
    seeds.pts = {{0.0, 0.0}, {0.4, 0.0}};
    TimeGrid grid{0.0, 1.0, 0.01};
    int met = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Skeleton sk = sample_skeleton_detailed(seeds, grid, seed, true);
        double m01 = meeting_time(sk, 0, 1);
        CHECK(m01 == meeting_time(sk, 1, 0));
        if (m01 <= grid.t_end) {
            ++met;
            CHECK(m01 >= 0.0);
        } else {
            CHECK(m01 == doctest::Approx(grid.t_end + grid.step));
        }
    }
    CHECK(met > 25);  // theta(0.4, 1) is about 0.78
}

TEST_CASE("bridge correction recovers the meeting probability") {
    SeedSet seeds;
    seeds.pts = {{0.0, 0.0}, {1.0, 0.0}};
    TimeGrid grid{0.0, 1.0, 0.01};
    const int n = 1500;
    int with = 0, without = 0;
    for (int r = 0; r < n; ++r) {
        Skeleton a = sample_skeleton_detailed(seeds, grid, derive_seed(70, static_cast<std::uint64_t>(r)), true);
        Skeleton b = sample_skeleton_detailed(seeds, grid, derive_seed(71, static_cast<std::uint64_t>(r)), false);
        if (meeting_time(a, 0, 1) <= 1.0) ++with;
        if (meeting_time(b, 0, 1) <= 1.0) ++without;
    }
    double p_with = static_cast<double>(with) / n;
    double p_without = static_cast<double>(without) / n;
    // theta(1, 1) = erfc(0.5); the grid-only rule misses in-step crossings
    CHECK(std::abs(p_with - 0.4795001221869535) < 0.04);
    CHECK(p_without < p_with - 0.02);
}

TEST_CASE("path set export matches the detailed construction") {
    SeedSet seeds;
    seeds.pts = {{-0.5, 0.0}, {0.5, 0.05}};
    TimeGrid grid{0.0, 0.2, 0.05};
    PathSet ps = sample_skeleton(seeds, grid, 9, true);
    Skeleton sk = sample_skeleton_detailed(seeds, grid, 9, true);
    CHECK(ps.provenance == Provenance::skeleton);
    REQUIRE(ps.paths.size() == 2);
    for (std::size_t p = 0; p < 2; ++p) {
        const SkeletonPath& d = sk.paths[p];
        CHECK(ps.paths[p].t0() == doctest::Approx(grid.time(d.birth_index)).epsilon(1e-12));
        CHECK(ps.paths[p].xs.size() == d.values.size());
        CHECK(ps.paths[p].xs.front() == d.values.front());
        CHECK(ps.paths[p].xs.back() == d.values.back());
    }
}

TEST_CASE("seed order does not change the law") {
    OrderingCheckConfig cfg;
    cfg.seeds.pts = {{-0.5, 0.0}, {0.0, 0.0}, {0.5, 0.0}};
    cfg.grid = {0.0, 1.0, 0.01};
    cfg.n_replicas = 400;
    cfg.seed = 21;
    OrderingInvarianceReport rep = ordering_invariance_check(cfg);
    CHECK(rep.n_replicas == 400);
    CHECK(rep.ks_meet_time < 0.15);
    CHECK(rep.ks_marginal < 0.15);
    CHECK(rep.ks_eta < 0.15);
}

TEST_CASE("refinement ratios of the continuity modulus") {
    HolderReport rep = holder_diagnostic(1.0 / 3.0, 3, 60, 33);
    CHECK(rep.n_paths == 60);
    // the fine grid contains the coarse pairs, so both ratios are >= 1
    CHECK(rep.ratio_4x_xi045 >= 1.0);
    CHECK(rep.ratio_16x_xi055 >= 1.0);
    CHECK(rep.ratio_16x_xi055 > rep.ratio_4x_xi045);
}

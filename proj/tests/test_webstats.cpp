#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "coalweb/lattice.hpp"
#include "coalweb/rng.hpp"
#include "coalweb/webstats.hpp"
#include "doctest.h"

using namespace coalweb;

namespace {

Path make_path(std::initializer_list<std::pair<double, double>> pts) {
    Path p;
    for (auto [t, x] : pts) p.push(t, x);
    return p;
}

}  // namespace

TEST_CASE("eta counting on a hand-built path set") {
    PathSet K;
    K.paths.push_back(make_path({{0.0, 0.0}, {2.0, 0.0}}));
    K.paths.push_back(make_path({{0.0, 0.5}, {1.0, 0.0}, {2.0, 0.0}}));
    K.paths.push_back(make_path({{0.0, 3.0}, {2.0, 3.0}}));
    K.paths.push_back(make_path({{0.5, 0.25}, {2.0, 0.25}}));  // born too late

    CHECK(count_eta(K, {0.0, 2.0, 0.0, 1.0}) == 1);
    CHECK(count_eta(K, {0.0, 0.5, 0.0, 1.0}) == 2);
    CHECK(count_eta(K, {0.0, 1.0, 0.0, 3.0}) == 2);
    CHECK(count_eta(K, {0.0, 1.0, 3.0, 3.0}) == 1);
    CHECK(count_eta(K, {0.0, 1.0, 4.0, 5.0}) == 0);

    CHECK_THROWS_AS(count_eta(K, {0.0, 5.0, 0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(count_eta(K, {0.0, -1.0, 0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(count_eta(K, {0.0, 1.0, 1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("eta is monotone in the interval and in time") {
    // wider interval starts more walkers; later evaluation only merges them
    const EnsembleConfig ens{400, 77, 0};
    double delta = 0.125;
    EtaEnsembleResult narrow = eta_ensemble(delta, {0.0, 1.0, 0.0, 0.25}, ens);
    EtaEnsembleResult wide = eta_ensemble(delta, {0.0, 1.0, -0.5, 0.75}, ens);
    CHECK(narrow.summary.mean <= wide.summary.mean + 1e-12);

    EtaEnsembleResult early = eta_ensemble(delta, {0.0, 0.5, 0.0, 1.0}, ens);
    EtaEnsembleResult late = eta_ensemble(delta, {0.0, 1.0, 0.0, 1.0}, ens);
    CHECK(late.summary.mean <= early.summary.mean + 1e-12);
}

TEST_CASE("ensemble eta matches the web built from the same seeds") {
    const double delta = 0.25;
    const EtaQuery q{0.0, 1.0, -0.5, 0.5};
    const std::size_t n = 24;
    const EnsembleConfig ens{n, 13, 1};
    EtaEnsembleResult res = eta_ensemble(delta, q, ens);

    // walkers live on columns -2..2 of parity 0 for 16 rows
    Window w{-24, 24, 0.0, 16.0, Boundary::open_buffer};
    std::vector<double> counts;
    for (std::size_t r = 0; r < n; ++r) {
        ArrowField f(w, derive_seed(13, r));
        PathSet web = build_discrete_web(f, {{-2, 0}, {0, 0}, {2, 0}});
        PathSet scaled = rescale_web(web, delta);
        counts.push_back(static_cast<double>(count_eta(scaled, q)));
    }
    StatSummary direct = summarize(counts, true);
    CHECK(direct.mean == res.summary.mean);
    CHECK(direct.histogram == res.summary.histogram);
}

TEST_CASE("thread count does not change ensemble results") {
    const EtaQuery q{0.0, 1.0, 0.0, 1.0};
    EtaEnsembleResult serial = eta_ensemble(0.1, q, {300, 5, 1});
    EtaEnsembleResult parallel = eta_ensemble(0.1, q, {300, 5, 4});
    CHECK(serial.summary.mean == parallel.summary.mean);
    CHECK(serial.summary.std_error == parallel.summary.std_error);
    CHECK(serial.summary.histogram == parallel.summary.histogram);
}

TEST_CASE("mean path count through a unit interval") {
    EtaEnsembleResult res = eta_ensemble(0.05, {0.0, 1.0, 0.0, 1.0}, {3000, 19, 0});
    CHECK(std::abs(res.summary.mean - 1.5641895835477562) < 0.1);
}

TEST_CASE("closed-form meeting probability") {
    CHECK(theta_closed(2.0, 1.0) == doctest::Approx(0.15729920705028513).epsilon(1e-14));
    CHECK(theta_closed(1.0, 1.0) == doctest::Approx(0.4795001221869535).epsilon(1e-14));
    CHECK(theta_closed(0.0, 0.5) == 1.0);
    // diffusive scaling leaves it invariant
    CHECK(theta_closed(0.7, 0.3) == doctest::Approx(theta_closed(1.4, 1.2)).epsilon(1e-14));
    CHECK_THROWS_AS(theta_closed(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(theta_closed(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("monte carlo meeting probability tracks the closed form") {
    double closed = theta_closed(1.0, 1.0);
    CHECK(std::abs(theta_mc(1.0, 1.0, 20000, 101) - closed) < 0.015);
    // the bridge correction makes the law exact at any step count
    CHECK(std::abs(theta_mc(1.0, 1.0, 20000, 102, 8) - closed) < 0.015);
    CHECK(std::abs(theta_mc(1.0, 1.0, 20000, 103, 64) - closed) < 0.015);
    CHECK(theta_mc(0.0, 1.0, 10, 104) == 1.0);
}

TEST_CASE("tail bound report on synthetic histograms") {
    std::vector<double> ok;
    for (int i = 0; i < 700; ++i) ok.push_back(1.0);
    for (int i = 0; i < 200; ++i) ok.push_back(2.0);
    for (int i = 0; i < 80; ++i) ok.push_back(3.0);
    for (int i = 0; i < 20; ++i) ok.push_back(4.0);
    EtaBoundReport good = check_etabound(summarize(ok, true), 4);
    CHECK(good.pass);
    CHECK(good.k_max_used == 4);
    CHECK(!good.degraded);
    REQUIRE(good.rows.size() == 2);
    CHECK(good.rows[0].k == 3);
    CHECK(good.rows[0].p_k == doctest::Approx(0.1));
    CHECK(good.rows[0].bound == doctest::Approx(0.09));

    std::vector<double> bad;
    for (int i = 0; i < 900; ++i) bad.push_back(1.0);
    for (int i = 0; i < 50; ++i) bad.push_back(2.0);
    for (int i = 0; i < 50; ++i) bad.push_back(3.0);
    EtaBoundReport violated = check_etabound(summarize(bad, true), 3);
    CHECK(!violated.pass);
    REQUIRE(violated.rows.size() == 1);
    CHECK(!violated.rows[0].pass);

    std::vector<double> low{1.0, 1.0, 2.0, 2.0};
    EtaBoundReport degraded = check_etabound(summarize(low, true), 6);
    CHECK(degraded.k_max_used == 3);
    CHECK(degraded.degraded);

    CHECK_THROWS_AS(check_etabound(StatSummary{}, 4), std::invalid_argument);
    CHECK_THROWS_AS(check_etabound(summarize(ok, true), 2), std::invalid_argument);
}

TEST_CASE("tail scaling fit recovers an exact power law") {
    auto with_tail = [](double p2, double p3, std::size_t n) {
        std::vector<double> sample;
        auto c3 = static_cast<std::size_t>(std::round(p3 * static_cast<double>(n)));
        auto c2 = static_cast<std::size_t>(std::round(p2 * static_cast<double>(n))) - c3;
        for (std::size_t i = 0; i + c2 + c3 < n; ++i) sample.push_back(1.0);
        for (std::size_t i = 0; i < c2; ++i) sample.push_back(2.0);
        for (std::size_t i = 0; i < c3; ++i) sample.push_back(3.0);
        return summarize(sample, true);
    };
    // p_k = 0.5 (eps/sqrt(t))^(k-1) for t = 1
    std::vector<std::pair<double, StatSummary>> by_eps = {
        {0.1, with_tail(0.05, 0.005, 10000)},
        {0.2, with_tail(0.10, 0.020, 10000)},
    };
    std::vector<TailScalingFit> fits = eta_tail_scaling(by_eps, 1.0, 3);
    REQUIRE(fits.size() == 2);
    CHECK(fits[0].k == 2);
    CHECK(fits[0].c_k == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(fits[0].spread == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fits[1].k == 3);
    CHECK(fits[1].c_k == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(fits[1].n_points == 2);
}

TEST_CASE("crossing indicator on hand-built paths") {
    PathSet still;
    still.paths.push_back(make_path({{0.0, 0.0}, {2.0, 0.0}}));
    CHECK(!indicator_A(still, 0.0, 0.0, 1.0, 4.0));

    PathSet crossing;
    crossing.paths.push_back(make_path({{0.0, 0.0}, {0.5, 3.0}, {2.0, 3.0}}));
    CHECK(indicator_A(crossing, 0.0, 0.0, 1.0, 4.0));

    // touches the band late, then the line after the window closes
    PathSet late;
    late.paths.push_back(make_path({{0.0, 5.0}, {2.5, 0.0}, {3.0, 5.0}}));
    CHECK(!indicator_A(late, 0.0, 0.0, 1.0, 4.0));

    // the line must be reached strictly after the band
    PathSet fromline;
    fromline.paths.push_back(make_path({{0.0, 2.0}, {1.0, 0.0}, {2.0, 0.0}}));
    CHECK(!indicator_A(fromline, 0.0, 0.0, 1.0, 4.0));
    PathSet outback;
    outback.paths.push_back(make_path({{0.0, 2.0}, {1.0, 0.0}, {2.0, 2.0}}));
    CHECK(indicator_A(outback, 0.0, 0.0, 1.0, 4.0));

    CHECK_THROWS_AS(indicator_A(still, 0.0, 0.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(indicator_A(still, 0.0, 0.0, -1.0, 4.0), std::invalid_argument);
}

TEST_CASE("crossing frequency maximization is deterministic and self-consistent") {
    const double delta = 0.25, t = 0.25, u = 1.0;
    const EnsembleConfig ens{160, 31, 0};
    GEstimate a = estimate_g(delta, t, u, ens);
    GEstimate b = estimate_g(delta, t, u, ens);
    CHECK(a.g == b.g);
    CHECK(a.x_offset == b.x_offset);
    CHECK(a.t_offset == b.t_offset);
    CHECK(a.n_placements == b.n_placements);

    GEstimate serial = estimate_g(delta, t, u, {160, 31, 1});
    CHECK(serial.g == a.g);
    CHECK(serial.x_offset == a.x_offset);

    CHECK(a.g >= 0.0);
    CHECK(a.g <= 1.0);
    CHECK(a.n_placements <= 64);
    CHECK(a.g_over_t32 == a.g / std::pow(t, 1.5));
    CHECK(a.shape_u4_over_t2 == a.g * std::pow(u, 4.0) / (t * t));

    // replay the winning placement through the path-level indicator
    std::size_t hits = 0;
    Window w{-32, 32, 0.0, 10.0, Boundary::open_buffer};
    for (std::size_t r = 0; r < ens.n_replicas; ++r) {
        ArrowField f(w, derive_seed(ens.seed, r));
        std::vector<std::pair<std::int64_t, std::int64_t>> starts;
        for (std::int64_t i = -20; i <= 20; i += 2) starts.emplace_back(i, 0);
        PathSet web = rescale_web(build_discrete_web(f, starts), delta);
        if (indicator_A(web, a.x_offset, a.t_offset, t, u)) ++hits;
    }
    CHECK(static_cast<double>(hits) / static_cast<double>(ens.n_replicas) == a.g);
}

TEST_CASE("estimate_g validates its arguments") {
    CHECK_THROWS_AS(estimate_g(0.25, 1.0, 0.5, {10, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(estimate_g(0.0, 1.0, 2.0, {10, 1, 0}), std::invalid_argument);
}

TEST_CASE("small-interval statistics collapse below one lattice spacing") {
    std::vector<BStatRow> rows =
        b_statistics({0.25}, 0.0, 1.0, {0.4, 0.8, 1.6}, {600, 23, 0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].n_sites == 1);
    CHECK(rows[0].b1 == 0.0);
    CHECK(rows[0].b2 == 0.0);
    CHECK(rows[1].n_sites == 2);
    CHECK(rows[1].b2 == 0.0);  // two walkers never reach three endpoints
    CHECK(rows[2].n_sites == 4);
    CHECK(rows[2].b1 > rows[1].b1);

    // two sites half a unit apart stay distinct with probability
    // 1 - theta(0.5, 1), up to lattice effects
    CHECK(std::abs(rows[1].b1 - (1.0 - 0.7236736098317631)) < 0.08);
}

TEST_CASE("marginal law converges to the normal") {
    // one +-1 step: the KS distance against the normal is Phi(1) - 1/2
    double coarse = donsker_marginal_check(1.0, 1.0, {2000, 3, 0});
    CHECK(std::abs(coarse - 0.3413447460685429) < 0.04);

    double fine = donsker_marginal_check(0.05, 1.0, {2000, 3, 0});
    CHECK(fine < 0.05);
    CHECK(fine < coarse);

    CHECK_THROWS_AS(donsker_marginal_check(0.1, 0.105, {10, 3, 0}), std::invalid_argument);
}

TEST_CASE("pair meeting law converges to the closed form") {
    CHECK_THROWS_AS(donsker_pair_meeting(0.1, 0.3, 1.0, {10, 3, 0}), std::invalid_argument);
    double dev = donsker_pair_meeting(0.05, 0.2, 1.0, {2000, 9, 0});
    CHECK(dev < 0.08);
}

TEST_CASE("forward and dual counts satisfy the line identity") {
    const EtaQuery q{0.0, 2.0, 0.0, 4.0};
    Window w{-6, 10, 0.0, 2.0, Boundary::open_buffer};
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
        ArrowField f(w, seed);
        auto [eta, eta_dual] = count_eta_dual(f, q);
        CHECK(eta == eta_dual + 1);

        // oracle: follow forward walks and dual walks path by path
        std::set<double> ends;
        for (std::int64_t i = 0; i <= 4; i += 2)
            ends.insert(eval_path(discrete_path(f, i, 0), 2.0));
        CHECK(eta == ends.size());

        std::vector<std::pair<std::int64_t, std::int64_t>> dstarts;
        for (std::int64_t i = -1; i <= 5; i += 2) dstarts.emplace_back(i, 2);
        PathSet duals = build_dual_web(dual_field(f), dstarts);
        std::set<double> landings;
        for (const Path& p : duals.paths) {
            double x = eval_path(p, 0.0);
            if (x > 0.0 && x < 4.0) landings.insert(x);
        }
        CHECK(eta_dual == landings.size());
    }
}

TEST_CASE("dual count rejects bad queries and periodic windows") {
    Window w{-6, 10, 0.0, 2.0, Boundary::open_buffer};
    ArrowField f(w, 1);
    CHECK_THROWS_AS(count_eta_dual(f, {0.0, 2.0, 1.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(count_eta_dual(f, {0.0, 1.0, 0.0, 4.0}), std::invalid_argument);
    CHECK_THROWS_AS(count_eta_dual(f, {0.5, 2.0, 0.0, 4.0}), std::invalid_argument);

    Window pw{0, 15, 0.0, 4.0, Boundary::periodic};
    ArrowField pf(pw, 1);
    CHECK_THROWS_AS(count_eta_dual(pf, {0.0, 2.0, 4.0, 8.0}), std::invalid_argument);
}

TEST_CASE("point census classes on hand fields") {
    Window w{0, 3, 0.0, 2.0, Boundary::periodic};
    ArrowField uniform(w, std::vector<std::int8_t>{1, 1, 1, 1, 1, 1});
    CensusReport rep = point_census(uniform, w);
    CHECK(rep.forward.total == 4);
    CHECK(rep.forward.at(1, 1) == 4);
    CHECK(rep.forward.at(0, 1) == 0);
    CHECK(rep.forward.at(2, 1) == 0);
    CHECK(rep.dual.total == 2);
    CHECK(rep.dual.at(1, 1) == 2);

    // opposing arrows at row 0 make one doubly fed point and one starved one
    ArrowField split(w, std::vector<std::int8_t>{1, -1, 1, 1, 1, 1});
    CensusReport rep2 = point_census(split, w);
    CHECK(rep2.forward.at(2, 1) == 1);
    CHECK(rep2.forward.at(0, 1) == 1);
    CHECK(rep2.forward.at(2, 1) == rep2.forward.at(0, 1));
}

TEST_CASE("periodic census balances sources and sinks exactly") {
    Window w{0, 31, 0.0, 16.0, Boundary::periodic};
    for (std::uint64_t seed = 200; seed < 208; ++seed) {
        ArrowField f(w, seed);
        CensusReport rep = point_census(f, w);
        CHECK(rep.forward.at(2, 1) == rep.forward.at(0, 1));
        CHECK(rep.dual.at(2, 1) == rep.dual.at(0, 1));
        CHECK(rep.forward.at(0, 1) + rep.forward.at(1, 1) + rep.forward.at(2, 1) ==
              rep.forward.total);
        CHECK(rep.forward.total > 0);
    }
}

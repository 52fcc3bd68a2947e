#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "coalweb/rng.hpp"
#include "coalweb/stats.hpp"
#include "doctest.h"

using namespace coalweb;

TEST_CASE("rng streams are deterministic and distinct") {
    Rng a(42), b(42);
    for (int i = 0; i < 32; ++i) CHECK(a.next_u64() == b.next_u64());

    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(7, i));
    CHECK(seeds.size() == 1000);

    // derive_seed(root, k) is the (k+1)-th state-walk output of Rng(root).
    Rng walk(9001);
    CHECK(walk.next_u64() == derive_seed(9001, 0));
    CHECK(walk.next_u64() == derive_seed(9001, 1));
}

TEST_CASE("uniform draws stay inside their half-open ranges") {
    Rng rng(3);
    for (int i = 0; i < 20000; ++i) {
        double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        double v = rng.next_unit_pos();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("gaussian and exponential moments") {
    Rng rng(11);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double g = rng.next_gaussian();
        sum += g;
        sq += g * g;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);

    double esum = 0.0;
    for (int i = 0; i < n; ++i) esum += rng.next_exponential();
    CHECK(std::abs(esum / n - 1.0) < 0.01);
}

TEST_CASE("gaussian sample passes a KS check against the normal cdf") {
    Rng rng(12);
    std::vector<double> sample(50000);
    for (double& x : sample) x = rng.next_gaussian();
    CHECK(ks_vs_cdf(sample, [](double z) { return normal_cdf(z); }) < 0.012);
}

TEST_CASE("cell coins are balanced and reproducible") {
    long sum = 0;
    long n = 0;
    for (std::int64_t i = -50; i <= 50; ++i)
        for (std::int64_t j = 0; j < 100; ++j) {
            int c = cell_coin(1, i, j);
            CHECK((c == 1 || c == -1));
            CHECK(c == cell_coin(1, i, j));
            sum += c;
            ++n;
        }
    CHECK(std::abs(static_cast<double>(sum) / static_cast<double>(n)) < 0.05);
    CHECK(cell_hash(1, 0, 0) != cell_hash(2, 0, 0));
}

TEST_CASE("summarize reports mean, standard error and histogram") {
    StatSummary s = summarize({1.0, 2.0, 3.0, 4.0}, true);
    CHECK(s.n == 4);
    CHECK(s.mean == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(s.std_error == doctest::Approx(0.6454972243679028).epsilon(1e-12));
    CHECK(s.histogram.size() == 4);
    CHECK(s.histogram.at(3) == 1);
    CHECK(s.tail_prob(1) == doctest::Approx(1.0));
    CHECK(s.tail_prob(3) == doctest::Approx(0.5));
    CHECK(s.tail_prob(5) == 0.0);

    StatSummary empty = summarize({});
    CHECK(empty.n == 0);
    CHECK(empty.mean == 0.0);
    CHECK(empty.std_error == 0.0);

    StatSummary plain = summarize({0.25, 0.75});
    CHECK(plain.histogram.empty());
}

TEST_CASE("normal cdf fixed points") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
    CHECK(normal_cdf(-1.0) + normal_cdf(1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ks distance of the +-1 coin law against the normal cdf") {
    // Two equally weighted atoms at -1 and 1: the sup deviation sits at the
    // atoms and equals Phi(1) - 1/2.
    std::vector<double> coin{-1.0, 1.0};
    double ks = ks_vs_cdf(coin, [](double z) { return normal_cdf(z); });
    CHECK(ks == doctest::Approx(0.3413447460685429).epsilon(1e-12));
    CHECK_THROWS_AS(ks_vs_cdf({}, [](double) { return 0.5; }), std::invalid_argument);
}

TEST_CASE("two-sample ks handles atoms") {
    CHECK(ks_two_sample({0.0, 1.0}, {0.0, 1.0}) == 0.0);
    CHECK(ks_two_sample({0.0}, {1.0}) == doctest::Approx(1.0));
    CHECK(ks_two_sample({0.0}, {0.0, 1.0}) == doctest::Approx(0.5));
    CHECK(ks_two_sample({0.0, 0.0}, {0.0, 0.0}) == 0.0);
}

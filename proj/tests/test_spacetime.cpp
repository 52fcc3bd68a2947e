#include <cmath>
#include <limits>

#include "coalweb/spacetime.hpp"
#include "doctest.h"

using namespace coalweb;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("compactified coordinates at reference points") {
    CompactCoords o = compactify({0.0, 0.0});
    CHECK(o.phi == 0.0);
    CHECK(o.psi == 0.0);

    CHECK(compactify({0.0, 1.0}).psi == doctest::Approx(0.7615941559557649).epsilon(1e-15));
    CHECK(compactify({1.0, 0.0}).phi == doctest::Approx(0.7615941559557649).epsilon(1e-15));
    CHECK(compactify({1.0, 1.0}).phi == doctest::Approx(0.7615941559557649 / 2.0).epsilon(1e-15));
    CHECK(compactify({-1.0, -1.0}).phi == doctest::Approx(-0.7615941559557649 / 2.0).epsilon(1e-15));
}

TEST_CASE("the time caps collapse the space coordinate") {
    CHECK(rho({5.0, kInf}, {-3.0, kInf}) == 0.0);
    CHECK(rho({1e300, -kInf}, {0.0, -kInf}) == 0.0);
    CHECK(rho({2.0, kInf}, {2.0, -kInf}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(same_point({1.0, kInf}, {7.0, kInf}));
    CHECK(!same_point({1.0, kInf}, {1.0, -kInf}));
    CHECK(same_point({1.0, 0.0}, {1.0, 0.0}));
    CHECK(!same_point({1.0, 0.0}, {2.0, 0.0}));
}

TEST_CASE("rho is a bounded metric on sampled points") {
    const SpaceTimePoint pts[] = {{0.0, 0.0},  {1.0, 0.0},   {-2.0, 3.0}, {0.5, -0.5},
                                  {100.0, 2.0}, {0.0, kInf},  {3.0, -kInf}, {-1e6, 40.0}};
    for (const auto& a : pts)
        for (const auto& b : pts) {
            double d = rho(a, b);
            CHECK(d >= 0.0);
            CHECK(d <= 2.0);
            CHECK(d == rho(b, a));
            if (same_point(a, b)) CHECK(d == 0.0);
            for (const auto& c : pts) CHECK(rho(a, b) <= rho(a, c) + rho(c, b) + 1e-15);
        }
}

TEST_CASE("spatial separation fades at large times") {
    double near = rho({0.0, 0.0}, {1.0, 0.0});
    double far = rho({0.0, 10.0}, {1.0, 10.0});
    CHECK(far < near);
    CHECK(far == doctest::Approx(0.7615941559557649 / 11.0).epsilon(1e-12));
}

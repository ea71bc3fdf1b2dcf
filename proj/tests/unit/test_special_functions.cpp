#include "doctest.h"

#include "routh/rng.hpp"
#include "routh/special_functions.hpp"

#include <cmath>

using namespace routh;

namespace {
constexpr double pi = 3.14159265358979323846;
}

TEST_CASE("unit sphere areas match the classical values")
{
    CHECK(unit_sphere_area(1) == doctest::Approx(2.0).epsilon(1e-14));        // S^0: two points
    CHECK(unit_sphere_area(2) == doctest::Approx(2.0 * pi).epsilon(1e-14));   // circle
    CHECK(unit_sphere_area(3) == doctest::Approx(4.0 * pi).epsilon(1e-14));   // S^2
    CHECK(unit_sphere_area(4) == doctest::Approx(2.0 * pi * pi).epsilon(1e-14));
    CHECK(unit_sphere_area(5) == doctest::Approx(8.0 * pi * pi / 3.0).epsilon(1e-14));
}

TEST_CASE("gamma, beta, and digamma helpers")
{
    CHECK(std::exp(log_gamma(5.0)) == doctest::Approx(24.0).epsilon(1e-13));
    CHECK(beta(2.0, 3.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-13)); // G(2)G(3)/G(5)
    CHECK(beta(0.5, 0.5) == doctest::Approx(pi).epsilon(1e-13));

    const double euler_gamma = 0.57721566490153286;
    CHECK(digamma_half_integer(1.0) == doctest::Approx(-euler_gamma).epsilon(1e-13));
    CHECK(digamma_half_integer(0.5) ==
          doctest::Approx(-euler_gamma - 2.0 * std::log(2.0)).epsilon(1e-13));
    CHECK(digamma_half_integer(3.0) ==
          doctest::Approx(-euler_gamma + 1.0 + 0.5).epsilon(1e-13));
    // recurrence psi(x+1) = psi(x) + 1/x at a half-integer
    CHECK(digamma_half_integer(2.5) ==
          doctest::Approx(digamma_half_integer(1.5) + 1.0 / 1.5).epsilon(1e-13));
}

TEST_CASE("hemisphere first moment: closed form and known low-dimensional value")
{
    // n = 3: integral of w_3 over the upper half of S^2 is pi.
    CHECK(hemisphere_first_moment(3) == doctest::Approx(pi).epsilon(1e-14));
    // closed form sigma_{n-2}/(n-1) for several n
    for (int n = 3; n <= 10; ++n)
        CHECK(hemisphere_first_moment(n) ==
              doctest::Approx(unit_sphere_area(n - 1) / (n - 1)).epsilon(1e-14));
}

TEST_CASE("hemisphere second moment: closed form")
{
    // By symmetry each coordinate square integrates to area/n; halved for the
    // hemisphere.
    for (int n = 3; n <= 10; ++n)
        CHECK(hemisphere_second_moment(n) ==
              doctest::Approx(0.5 * unit_sphere_area(n) / n).epsilon(1e-14));
}

TEST_CASE("hemisphere moments agree with Monte Carlo sphere sampling")
{
    // The reduction factors are derived by hand; validate them against a
    // direct simulation before trusting them anywhere else.
    // Uniform directions w on S^{n-1}:
    //   integral over the hemisphere of w_n    = (sigma/2) E[|w_n|],
    //   integral over the hemisphere of w_1^2  = (sigma/2) E[w_1^2].
    const int n = 5;
    NormalGen gen(12345);
    const std::uint64_t N = 400000;
    double sum1 = 0.0, sum2 = 0.0, sq1 = 0.0, sq2 = 0.0;
    for (std::uint64_t k = 0; k < N; ++k) {
        double g[5];
        double norm2 = 0.0;
        for (int c = 0; c < n; ++c) {
            g[c] = gen();
            norm2 += g[c] * g[c];
        }
        const double inv = 1.0 / std::sqrt(norm2);
        const double awn = std::abs(g[n - 1]) * inv;
        const double w1sq = g[0] * g[0] * inv * inv;
        sum1 += awn;
        sq1 += awn * awn;
        sum2 += w1sq;
        sq2 += w1sq * w1sq;
    }
    const double half_area = 0.5 * unit_sphere_area(n);
    const double m1 = half_area * sum1 / N;
    const double m2 = half_area * sum2 / N;
    const double err1 = half_area * std::sqrt((sq1 / N - (sum1 / N) * (sum1 / N)) / N);
    const double err2 = half_area * std::sqrt((sq2 / N - (sum2 / N) * (sum2 / N)) / N);
    CHECK(std::abs(m1 - hemisphere_first_moment(n)) < 5.0 * err1);
    CHECK(std::abs(m2 - hemisphere_second_moment(n)) < 5.0 * err2);
}

TEST_CASE("integer and half-integer power helpers")
{
    for (int n = 5; n <= 12; ++n)
        for (double x : {0.0, 1e-8, 0.37, 1.0, 2.5, 1000.0})
            CHECK(pow_half_nm2(x, n) ==
                  doctest::Approx(std::pow(x, 0.5 * (n - 2))).epsilon(1e-13));
    CHECK(pow_int(3.0, 0) == 1.0);
    CHECK(pow_int(2.0, 10) == 1024.0);
    CHECK(pow_int(-2.0, 3) == -8.0);
    for (int k = 1; k <= 9; ++k)
        CHECK(pow_int(1.7, k) == doctest::Approx(std::pow(1.7, k)).epsilon(1e-14));
}

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "blockmix/oracle.hpp"

using namespace blockmix::oracle;

TEST_CASE("absolute uniform moments") {
    REQUIRE(abs_uniform_moment(0) == Catch::Approx(1.0));
    REQUIRE(abs_uniform_moment(1) == Catch::Approx(std::sqrt(3.0) / 2.0));
    REQUIRE(abs_uniform_moment(2) == Catch::Approx(1.0));
    REQUIRE(abs_uniform_moment(4) == Catch::Approx(9.0 / 5.0));
    REQUIRE(abs_uniform_moment(6) == Catch::Approx(27.0 / 7.0));
    REQUIRE_THROWS_AS(abs_uniform_moment(-1), std::invalid_argument);
}

TEST_CASE("Gaussian even moments are double factorials") {
    REQUIRE(gaussian_even_moment(2) == 1.0);
    REQUIRE(gaussian_even_moment(4) == 3.0);
    REQUIRE(gaussian_even_moment(6) == 15.0);
    REQUIRE(gaussian_even_moment(8) == 105.0);
    REQUIRE_THROWS_AS(gaussian_even_moment(3), std::invalid_argument);
}

TEST_CASE("level-1 parity moments") {
    using P = std::pair<int, int>;
    // all exponents even: product of absolute moments
    std::vector<P> even = {{0, 2}, {3, 2}};
    REQUIRE(parity_moment_level1(6, even) == Catch::Approx(1.0));
    // a proper odd subset kills the moment
    std::vector<P> mixed = {{0, 1}, {1, 2}};
    REQUIRE(parity_moment_level1(6, mixed) == 0.0);
    std::vector<P> single = {{2, 1}};
    REQUIRE(parity_moment_level1(6, single) == 0.0);
    // all six coordinates odd: -(E|R|)^6 = -(sqrt(3)/2)^6 = -27/64
    std::vector<P> all_odd = {{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}};
    REQUIRE(parity_moment_level1(6, all_odd) == Catch::Approx(-27.0 / 64.0));
    REQUIRE(parity_moment_level1(6, all_odd) == Catch::Approx(-0.421875));
    // duplicate coordinate is rejected
    std::vector<P> dup = {{1, 2}, {1, 2}};
    REQUIRE_THROWS_AS(parity_moment_level1(6, dup), std::invalid_argument);
}

TEST_CASE("second partial-sum moments are additive") {
    // pairwise independence makes the variance additive: E S_h^2 = h
    for (int h : {2, 3, 5, 6, 9, 12}) {
        REQUIRE(exact_partial_sum_moment_level1(6, h, 2, false) ==
                Catch::Approx(double(h)));
        REQUIRE(exact_partial_sum_moment_level1(6, h, 2, true) ==
                Catch::Approx(double(h)));
    }
}

TEST_CASE("aligned sixth moment of one full block") {
    REQUIRE(exact_partial_sum_moment_level1(6, 6, 6, false) ==
            Catch::Approx(2329.3928571428573).epsilon(1e-12));
}

// Independent oracle: 4-point Gauss-Legendre quadrature per coordinate
// (exact for polynomial degree <= 7) averaged over the 32 admissible sign
// vectors; no parity algebra or multinomial enumeration involved.
TEST_CASE("quadrature confirms the aligned sixth moment") {
    constexpr std::array<double, 4> t = {-0.8611363115940526, -0.3399810435848563,
                                         0.3399810435848563, 0.8611363115940526};
    constexpr std::array<double, 4> wt = {0.3478548451374538, 0.6521451548625461,
                                          0.6521451548625461, 0.3478548451374538};
    const double sqrt3 = std::sqrt(3.0);
    double total = 0.0;
    int sign_vectors = 0;
    for (int s = 0; s < 64; ++s) {
        int prod = 1;
        for (int k = 0; k < 6; ++k) prod *= (s >> k & 1) ? -1 : 1;
        if (prod != -1) continue;
        ++sign_vectors;
        std::array<int, 6> sg;
        for (int k = 0; k < 6; ++k) sg[k] = (s >> k & 1) ? -1 : 1;
        std::array<int, 6> idx{};
        while (true) {
            double sum = 0.0, weight = 1.0;
            for (int k = 0; k < 6; ++k) {
                const double u = 0.5 * (t[idx[k]] + 1.0);  // node on [0,1]
                sum += sg[k] * sqrt3 * u;
                weight *= 0.5 * wt[idx[k]];
            }
            double p = 1.0;
            for (int i = 0; i < 6; ++i) p *= sum;
            total += weight * p;
            int k = 0;
            while (k < 6 && ++idx[k] == 4) idx[k++] = 0;
            if (k == 6) break;
        }
    }
    REQUIRE(sign_vectors == 32);
    const double quadrature = total / 32.0;
    REQUIRE(quadrature == Catch::Approx(2329.3928571428573).epsilon(1e-10));
    REQUIRE(quadrature ==
            Catch::Approx(exact_partial_sum_moment_level1(6, 6, 6, false))
                .epsilon(1e-10));
}

TEST_CASE("shifted sixth moment over two blocks (regression)") {
    const double v = exact_partial_sum_moment_level1(6, 12, 6, true);
    REQUIRE(v == Catch::Approx(23055.910714285714).epsilon(1e-12));
    // strictly below the Gaussian reference minus the deficit
    REQUIRE(v <= 15.0 * 12.0 * 12.0 * 12.0 - 11.25);
}

TEST_CASE("partial-sum moment argument validation") {
    REQUIRE_THROWS_AS(exact_partial_sum_moment_level1(5, 6, 6, false),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(exact_partial_sum_moment_level1(6, 1, 2, false),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(exact_partial_sum_moment_level1(6, 19, 2, false),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(exact_partial_sum_moment_level1(6, 6, 3, false),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(exact_partial_sum_moment_level1(6, 6, 8, false),
                      std::invalid_argument);
}

TEST_CASE("deficit bound values") {
    REQUIRE(deficit_bound(6, 0) == Catch::Approx(11.25));
    REQUIRE(deficit_bound(6, 1) == Catch::Approx(2430.0));
    REQUIRE(deficit_bound(6, 2) == Catch::Approx(2430.0 * 216.0));
    REQUIRE_THROWS_AS(deficit_bound(6, -1), std::invalid_argument);
}

TEST_CASE("clt gap constants") {
    // 2^-17 * 720 / 6^6
    REQUIRE(clt_gap_constant(6) ==
            Catch::Approx(720.0 / (131072.0 * 46656.0)).epsilon(1e-14));
    REQUIRE(clt_gap_constant_finite_h(6) ==
            Catch::Approx(2.0 * clt_gap_constant(6)).epsilon(1e-14));
}

TEST_CASE("gaussian mixture moment") {
    // h = 1: only j = 1 contributes, weight p, value 15
    REQUIRE(gaussian_mixture_moment(1, 6, 0.5) == Catch::Approx(7.5));
    // large h: converges to 15 / 2^3 = 1.875
    REQUIRE(gaussian_mixture_moment(100000, 6, 0.5) ==
            Catch::Approx(1.875).margin(1e-3));
    REQUIRE_THROWS_AS(gaussian_mixture_moment(0, 6, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(gaussian_mixture_moment(5, 6, 1.0), std::invalid_argument);
}

TEST_CASE("binomial residue distributions, exact small cases") {
    const auto m1 = binomial_mod_distribution(1, 6);
    REQUIRE(m1[0] == Catch::Approx(0.5));
    REQUIRE(m1[1] == Catch::Approx(0.5));
    REQUIRE(m1[2] == 0.0);
    const auto m2 = binomial_mod_distribution(2, 6);
    REQUIRE(m2[0] == Catch::Approx(0.25));
    REQUIRE(m2[1] == Catch::Approx(0.5));
    REQUIRE(m2[2] == Catch::Approx(0.25));
}

TEST_CASE("least equidistribution trial count (regression)") {
    REQUIRE(least_equidistribution_trials(6) == 89);
    // at m = 88 the tolerance is still violated
    const auto before = binomial_mod_distribution(88, 6);
    double dev = 0.0;
    for (double p : before) dev = std::max(dev, std::abs(p - 1.0 / 6.0));
    REQUIRE(dev > 1e-6);
    // at m = 89 it holds
    const auto after = binomial_mod_distribution(89, 6);
    dev = 0.0;
    for (double p : after) dev = std::max(dev, std::abs(p - 1.0 / 6.0));
    REQUIRE(dev <= 1e-6);
}

TEST_CASE("binomial median tail") {
    REQUIRE(binomial_tail_half(1) == Catch::Approx(1.0));
    REQUIRE(binomial_tail_half(2) == Catch::Approx(0.75));
    REQUIRE(binomial_tail_half(3) == Catch::Approx(0.875));
    REQUIRE(binomial_tail_half(4) == Catch::Approx(11.0 / 16.0));
    for (std::int64_t h = 1; h <= 64; ++h)
        REQUIRE(binomial_tail_half(h) >= 0.5);
}

TEST_CASE("normalized fourth moment formula") {
    REQUIRE(normalized_fourth_moment(1) == Catch::Approx(0.9));
    REQUIRE(normalized_fourth_moment(3) == Catch::Approx(0.8));
    REQUIRE(normalized_fourth_moment(1000000) ==
            Catch::Approx(0.75).margin(1e-5));
    REQUIRE_THROWS_AS(normalized_fourth_moment(0), std::invalid_argument);
}

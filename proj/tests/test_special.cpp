#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "fracalc/special.hpp"

#include "oracles.hpp"

using fracalc::FracOrder;

TEST_CASE("gamma: integer values") {
    CHECK(fracalc::gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fracalc::gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-14));
    CHECK(fracalc::gamma_fn(2.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gamma: half-integer against the quadrature oracle") {
    const double ref = oracle::gamma_quadrature(0.5);
    CHECK(std::abs(ref - 1.772453850905516) < 1e-12);
    CHECK(std::abs(fracalc::gamma_fn(0.5) - ref) < 1e-12);
}

TEST_CASE("gamma: relative error across the contract range") {
    for (double x : {0.05, 0.17, 0.9, 1.5, 3.7, 7.3, 14.2, 23.1, 38.0, 50.0}) {
        const double ref = oracle::gamma_quadrature(x);
        CHECK(std::abs(fracalc::gamma_fn(x) - ref) <= 1e-13 * std::abs(ref));
    }
}

TEST_CASE("gamma: recurrence Gamma(x+1) = x Gamma(x)") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.1, 20.0);
    for (int k = 0; k < 1000; ++k) {
        const double x = uni(rng);
        const double lhs = fracalc::gamma_fn(x + 1.0);
        const double rhs = x * fracalc::gamma_fn(x);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
    }
}

TEST_CASE("gamma: domain errors") {
    CHECK_THROWS_AS(fracalc::gamma_fn(0.0), std::domain_error);
    CHECK_THROWS_AS(fracalc::gamma_fn(-2.5), std::domain_error);
    CHECK_THROWS_AS(fracalc::log_gamma(0.0), std::domain_error);
}

TEST_CASE("mittag_leffler: E_1 is the exponential") {
    const FracOrder one(1.0);
    for (double z = -5.0; z <= 5.0; z += 0.5) {
        const double ref = std::exp(z);
        // For z << 0 the alternating series caps the attainable relative
        // accuracy at ~(max term) * eps / e^z, hence the absolute floor.
        CHECK(std::abs(fracalc::mittag_leffler(one, z) - ref)
              <= 1e-12 * std::max(1.0, ref));
    }
}

TEST_CASE("mittag_leffler: value at zero") {
    for (double a : {0.1, 0.3, 0.5, 0.8, 1.0}) {
        CHECK(fracalc::mittag_leffler(FracOrder(a), 0.0) == 1.0);
    }
}

TEST_CASE("mittag_leffler: E_{1/2} against the erfc identity") {
    for (double z : {-2.0, -0.5, 0.3, 1.0, 2.0}) {
        const double ref = oracle::mittag_leffler_half(z);
        CHECK(std::abs(fracalc::mittag_leffler(FracOrder(0.5), z) - ref)
              <= 1e-11 * std::abs(ref));
    }
    CHECK(fracalc::mittag_leffler(FracOrder(0.5), 1.0) == doctest::Approx(5.00898).epsilon(1e-5));
}

TEST_CASE("mittag_leffler: out-of-contract arguments") {
    CHECK_THROWS_AS(fracalc::mittag_leffler(FracOrder(1.5), 1.0), std::domain_error);
    CHECK_THROWS_AS(fracalc::mittag_leffler(FracOrder(1.0), 1e6), std::overflow_error);
}

TEST_CASE("power_rule: ordinary integration of a constant") {
    CHECK(fracalc::power_rule(0.0, FracOrder(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("power_rule: the introductory example coefficient") {
    const double got = fracalc::power_rule(-0.3, FracOrder(0.6));
    const double ref = fracalc::gamma_fn(0.7) / fracalc::gamma_fn(1.3);
    CHECK(got == doctest::Approx(ref).epsilon(1e-13));
    // Independent route through the quadrature oracle.
    const double quad = oracle::gamma_quadrature(0.7) / oracle::gamma_quadrature(1.3);
    CHECK(got == doctest::Approx(quad).epsilon(1e-11));
}

TEST_CASE("power_rule: semigroup of coefficients") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mu_dist(-0.9, 4.0);
    std::uniform_real_distribution<double> a_dist(0.05, 3.0);
    for (int k = 0; k < 200; ++k) {
        const double mu = mu_dist(rng);
        const double a = a_dist(rng);
        const double b = a_dist(rng);
        const double lhs = fracalc::power_rule(mu, FracOrder(a))
                           * fracalc::power_rule(mu + a, FracOrder(b));
        const double rhs = fracalc::power_rule(mu, FracOrder(a + b));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
    }
}

TEST_CASE("power_rule: divergent integral rejected") {
    CHECK_THROWS_AS(fracalc::power_rule(-1.0, FracOrder(0.5)), std::domain_error);
    CHECK_THROWS_AS(fracalc::power_rule(-1.7, FracOrder(0.5)), std::domain_error);
}

TEST_CASE("incomplete beta: basic identities") {
    CHECK(fracalc::incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-13));
    for (double x : {0.1, 0.42, 0.9}) {
        const double s = fracalc::incomplete_beta(0.7, 2.3, x)
                         + fracalc::incomplete_beta(2.3, 0.7, 1.0 - x);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    // B(1/2, 1/2) = pi.
    CHECK(fracalc::incomplete_beta_unreg(0.5, 0.5, 1.0)
          == doctest::Approx(3.14159265358979).epsilon(1e-12));
    // Against direct quadrature of t^(-1/2)(1-t)^(-1/2) truncated at x.
    const double quad = oracle::integrate(
        [](double t) { return std::pow(t, -0.3) * std::pow(1.0 - t, -0.5); },
        1e-12, 0.6, 1e-13);
    CHECK(fracalc::incomplete_beta_unreg(0.7, 0.5, 0.6)
          == doctest::Approx(quad).epsilon(1e-7));
}

TEST_CASE("frac order decomposition") {
    FracOrder a(2.3);
    CHECK(a.m() == 3);
    CHECK(a.sigma() == doctest::Approx(0.3).epsilon(1e-12));
    CHECK_FALSE(a.is_integer());
    CHECK(FracOrder(2.0).is_integer());
    CHECK(FracOrder(2.0).m() == 2);
    CHECK_THROWS_AS(FracOrder(0.0), std::domain_error);
    CHECK_THROWS_AS(FracOrder(-1.0), std::domain_error);
}

#include "flexhawkes/special.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace flexhawkes::special;

TEST_CASE("regularized incomplete gamma against closed forms") {
    for (double x : {0.01, 0.5, 1.0, 3.0, 12.0, 40.0}) {
        CHECK(gamma_p(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-13));
        CHECK(gamma_p(2.0, x) == doctest::Approx(1.0 - (1.0 + x) * std::exp(-x)).epsilon(1e-12));
        CHECK(gamma_p(0.5, x) == doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
    }
    CHECK(gamma_p(2.5, 0.0) == 0.0);
    CHECK(gamma_q(2.5, 0.0) == 1.0);
}

TEST_CASE("regularized incomplete gamma against boost on random arguments") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> a_dist(0.05, 30.0);
    std::uniform_real_distribution<double> x_dist(0.0, 60.0);
    for (int i = 0; i < 2000; ++i) {
        const double a = a_dist(rng);
        const double x = x_dist(rng);
        const double p = boost::math::gamma_p(a, x);
        const double q = boost::math::gamma_q(a, x);
        CHECK(std::fabs(gamma_p(a, x) - p) <= 1e-12 + 1e-11 * p);
        CHECK(std::fabs(gamma_q(a, x) - q) <= 1e-300 + 1e-10 * q);
    }
}

TEST_CASE("log upper tail stays finite deep in the tail") {
    CHECK(log_gamma_q(1.0, 800.0) == doctest::Approx(-800.0).epsilon(1e-12));
    // Q(2, x) = (1 + x) e^-x
    CHECK(log_gamma_q(2.0, 900.0) == doctest::Approx(std::log(901.0) - 900.0).epsilon(1e-12));
    CHECK(std::isfinite(log_gamma_q(0.45, 2000.0)));
}

TEST_CASE("Kolmogorov p-values match the asymptotic table") {
    // d chosen so that the small-sample corrected statistic equals the table argument
    const std::size_t n = 400;
    const double s = std::sqrt(static_cast<double>(n)) + 0.12 + 0.11 / std::sqrt(static_cast<double>(n));
    CHECK(kolmogorov_pvalue(1.0 / s, n) == doctest::Approx(0.2699996716735).epsilon(1e-9));
    CHECK(kolmogorov_pvalue(1.36 / s, n) == doctest::Approx(0.0494858).epsilon(1e-5));
    CHECK(kolmogorov_pvalue(1.63 / s, n) == doctest::Approx(0.0098).epsilon(2e-2));
    CHECK(kolmogorov_pvalue(0.25 / s, n) == doctest::Approx(0.9999999731761899).epsilon(1e-12));
    CHECK(kolmogorov_pvalue(0.5 / s, n) == doctest::Approx(0.9639452436648751).epsilon(1e-12));
    CHECK(kolmogorov_pvalue(0.8 / s, n) == doctest::Approx(0.5441424115741981).epsilon(1e-12));
    CHECK(kolmogorov_pvalue(1.17 / s, n) == doctest::Approx(0.12939004218561884).epsilon(1e-10));
    CHECK(kolmogorov_pvalue(1.19 / s, n) == doctest::Approx(0.11774229287977166).epsilon(1e-10));
    CHECK(kolmogorov_pvalue(1.5 / s, n) == doctest::Approx(0.022217962616525127).epsilon(1e-10));
    CHECK(kolmogorov_pvalue(0.0, 10) == 1.0);
    CHECK(kolmogorov_pvalue(1.0, 1000) < 1e-100);
}

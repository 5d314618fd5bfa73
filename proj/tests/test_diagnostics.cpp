#include "flexhawkes/diagnostics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace flexhawkes;

TEST_CASE("empirical quantile interpolates") {
    const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
    CHECK(empirical_quantile(v, 0.0) == 1.0);
    CHECK(empirical_quantile(v, 1.0) == 4.0);
    CHECK(empirical_quantile(v, 0.5) == doctest::Approx(2.5));
    CHECK(empirical_quantile(v, 0.25) == doctest::Approx(1.75));
    CHECK_THROWS(empirical_quantile(std::vector<double>{}, 0.5));
}

TEST_CASE("tail fractions are strict") {
    const std::vector<double> v{1, 2, 2, 3, 4};
    CHECK(fraction_below(v, 2.0) == doctest::Approx(0.2));
    CHECK(fraction_above(v, 3.0) == doctest::Approx(0.2));
    CHECK(fraction_below(v, 10.0) == 1.0);
}

TEST_CASE("histogram") {
    const std::vector<double> v{0.0, 0.1, 0.5, 0.99, 1.0, 1.5, -0.1};
    const auto h = histogram(v, 2, 0.0, 1.0);
    REQUIRE(h.edges.size() == 3);
    CHECK(h.edges[1] == 0.5);
    CHECK(h.counts[0] == 2);
    CHECK(h.counts[1] == 3);
    CHECK_THROWS(histogram(v, 0, 0.0, 1.0));
}

TEST_CASE("one-sample KS") {
    std::vector<double> grid;
    for (int i = 0; i < 1000; ++i) grid.push_back((i + 0.5) / 1000.0);
    const auto r = ks_test(grid, [](double x) { return std::clamp(x, 0.0, 1.0); });
    CHECK(r.statistic == doctest::Approx(0.0005).epsilon(1e-9));
    CHECK(r.p_value > 0.999);
    const auto shifted = ks_test(grid, [](double x) { return std::clamp(x - 0.2, 0.0, 1.0); });
    CHECK(shifted.statistic == doctest::Approx(0.2).epsilon(1e-2));
    CHECK(shifted.p_value < 1e-10);
}

TEST_CASE("two-sample KS") {
    const std::vector<double> a{1, 2, 3, 4};
    CHECK(ks_two_sample(a, a).statistic == 0.0);
    const std::vector<double> b{5, 6, 7};
    CHECK(ks_two_sample(a, b).statistic == 1.0);
    std::mt19937_64 rng(31);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> x(5000);
    std::vector<double> y(5000);
    for (auto& v : x) v = e(rng);
    for (auto& v : y) v = e(rng);
    CHECK(ks_two_sample(x, y).p_value > 0.01);
    for (auto& v : y) v *= 1.2;
    CHECK(ks_two_sample(x, y).p_value < 1e-6);
}

TEST_CASE("Q-Q pairs on exact quantiles") {
    const auto law = ResidualDistribution::unit_mean_gamma(2.0);
    std::vector<double> samples;
    const int n = 20001;
    for (int i = 0; i < n; ++i) samples.push_back(law.quantile((i + 0.5) / n));
    const auto qq = qq_pairs(samples, law);
    REQUIRE(qq.size() == 99);
    CHECK(qq.front().level == doctest::Approx(0.01));
    CHECK(qq.back().level == doctest::Approx(0.99));
    // plotting-position offset is below one sample spacing, (1/n) / pdf
    for (const auto& p : qq) CHECK(std::fabs(p.theoretical - p.empirical) < 5e-3);
}

TEST_CASE("Q-Q gap on both scales") {
    const auto law = ResidualDistribution::unit_exponential();
    const std::vector<QqPoint> qq{{0.5, law.quantile(0.5), law.quantile(0.6)}, {0.9, law.quantile(0.9), law.quantile(0.9)}};
    const auto g = max_qq_gap(qq, law);
    CHECK(g.probability == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(g.quantile == doctest::Approx(law.quantile(0.6) - law.quantile(0.5)).epsilon(1e-12));
}

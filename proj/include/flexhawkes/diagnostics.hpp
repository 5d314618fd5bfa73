#pragma once

#include "flexhawkes/residuals.hpp"

#include <functional>
#include <span>
#include <vector>

namespace flexhawkes {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf);
KsResult ks_test(std::span<const double> samples, const ResidualDistribution& dist);
/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::span<const double> samples, double q);

double fraction_below(std::span<const double> samples, double cutoff);
double fraction_above(std::span<const double> samples, double cutoff);

struct Histogram {
    std::vector<double> edges;  // bins + 1 entries
    std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> samples, std::size_t bins, double lo, double hi);

struct QqPoint {
    double level;
    double theoretical;
    double empirical;
};

/// Q-Q pairs at evenly spaced interior levels lo..hi against `reference`.
std::vector<QqPoint> qq_pairs(std::span<const double> samples, const ResidualDistribution& reference,
                              std::size_t points = 99, double lo = 0.01, double hi = 0.99);

struct QqGap {
    double quantile = 0.0;     // max |empirical - theoretical| in residual units
    double probability = 0.0;  // max |F(empirical) - level|
};
QqGap max_qq_gap(const std::vector<QqPoint>& qq, const ResidualDistribution& reference);

}  // namespace flexhawkes

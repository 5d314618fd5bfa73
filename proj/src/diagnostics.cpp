#include "flexhawkes/diagnostics.hpp"

#include "flexhawkes/special.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flexhawkes {

KsResult ks_test(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("KS test needs samples");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return {d, special::kolmogorov_pvalue(d, x.size())};
}

KsResult ks_test(std::span<const double> samples, const ResidualDistribution& dist) {
    return ks_test(samples, [&](double v) { return dist.cdf(v); });
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("KS test needs samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    const auto ne = static_cast<std::size_t>(std::round(nx * ny / (nx + ny)));
    return {d, special::kolmogorov_pvalue(d, std::max<std::size_t>(ne, 1))};
}

double empirical_quantile(std::span<const double> samples, double q) {
    if (samples.empty()) throw std::invalid_argument("quantile of an empty sample");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double fraction_below(std::span<const double> samples, double cutoff) {
    if (samples.empty()) return 0.0;
    const auto n = std::count_if(samples.begin(), samples.end(), [&](double v) { return v < cutoff; });
    return static_cast<double>(n) / static_cast<double>(samples.size());
}

double fraction_above(std::span<const double> samples, double cutoff) {
    if (samples.empty()) return 0.0;
    const auto n = std::count_if(samples.begin(), samples.end(), [&](double v) { return v > cutoff; });
    return static_cast<double>(n) / static_cast<double>(samples.size());
}

Histogram histogram(std::span<const double> samples, std::size_t bins, double lo, double hi) {
    if (bins == 0 || !(hi > lo)) throw std::invalid_argument("histogram needs bins > 0 and hi > lo");
    Histogram h;
    h.counts.assign(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
    for (double v : samples) {
        if (v < lo || v > hi) continue;
        auto b = static_cast<std::size_t>((v - lo) / width);
        if (b >= bins) b = bins - 1;
        ++h.counts[b];
    }
    return h;
}

std::vector<QqPoint> qq_pairs(std::span<const double> samples, const ResidualDistribution& reference,
                              std::size_t points, double lo, double hi) {
    if (points < 2) throw std::invalid_argument("Q-Q output needs at least two points");
    std::vector<QqPoint> out;
    out.reserve(points);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < points; ++k) {
        const double level = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
        out.push_back({level, reference.quantile(level), empirical_quantile(sorted, level)});
    }
    return out;
}

QqGap max_qq_gap(const std::vector<QqPoint>& qq, const ResidualDistribution& reference) {
    QqGap g;
    for (const auto& q : qq) {
        g.quantile = std::max(g.quantile, std::fabs(q.empirical - q.theoretical));
        g.probability = std::max(g.probability, std::fabs(reference.cdf(q.empirical) - q.level));
    }
    return g;
}

}  // namespace flexhawkes

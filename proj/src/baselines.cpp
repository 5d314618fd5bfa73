#include "flexhawkes/baselines.hpp"

#include "flexhawkes/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flexhawkes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kernel_mode(const GammaKernelParams& p) {
    return p.k > 1.0 ? (p.k - 1.0) / p.beta : 0.0;
}

}  // namespace

void GammaKernelParams::validate() const {
    if (!(mu > 0.0) || !(alpha > 0.0) || !(beta > 0.0) || !(k > 0.0)) {
        throw std::invalid_argument("gamma-kernel parameters must be positive");
    }
    if (!(branching_ratio() < 1.0)) {
        throw std::invalid_argument("gamma-kernel Hawkes is unstable: alpha / beta must be < 1");
    }
}

double GammaKernelParams::truncation_lag(double mass_tol) const {
    // remaining mass (alpha / beta) Q(k, beta L)
    auto tail = [&](double lag) { return branching_ratio() * special::gamma_q(k, beta * lag); };
    double hi = std::max(1.0, k) / beta;
    while (tail(hi) > mass_tol) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (tail(mid) > mass_tol) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

double gamma_kernel(double t, const GammaKernelParams& p) {
    if (t < 0.0) throw std::domain_error("kernel lag must be nonnegative");
    if (t == 0.0) {
        if (p.k < 1.0) throw std::domain_error("gamma kernel is infinite at lag 0 when k < 1");
        return p.k == 1.0 ? p.alpha : 0.0;
    }
    return p.alpha * std::exp((p.k - 1.0) * std::log(t * p.beta) - p.beta * t - std::lgamma(p.k));
}

double gamma_kernel_integral(double s, const GammaKernelParams& p) {
    if (s <= 0.0) return 0.0;
    return p.branching_ratio() * special::gamma_p(p.k, p.beta * s);
}

double gamma_hawkes_intensity(double t, const EventSeries& series, const GammaKernelParams& p) {
    double lambda = p.mu;
    for (double ti : series.times) {
        if (ti >= t) break;
        lambda += gamma_kernel(t - ti, p);
    }
    return lambda;
}

double gamma_hawkes_loglik(const EventSeries& series, const GammaKernelParams& p, std::optional<double> horizon) {
    p.validate();
    series.validate();
    const double end = horizon.value_or(series.empty() ? 0.0 : series.times.back());
    if (!series.empty() && end < series.times.back()) {
        throw std::invalid_argument("horizon precedes the last event");
    }
    const double window = p.truncation_lag();
    const auto& t = series.times;
    double total = -p.mu * end;
    std::size_t first = 0;
    for (std::size_t n = 0; n < t.size(); ++n) {
        while (t[n] - t[first] > window) ++first;
        double lambda = p.mu;
        for (std::size_t i = first; i < n; ++i) lambda += gamma_kernel(t[n] - t[i], p);
        total += std::log(lambda);
        total -= gamma_kernel_integral(end - t[n], p);
    }
    return total;
}

std::vector<double> gamma_hawkes_compensator_residuals(const EventSeries& series, const GammaKernelParams& p) {
    p.validate();
    series.validate();
    const auto& t = series.times;
    const double window = p.truncation_lag();
    std::vector<double> out;
    if (t.size() < 2) return out;
    out.reserve(t.size() - 1);
    std::size_t first = 0;
    for (std::size_t n = 1; n < t.size(); ++n) {
        while (t[n] - t[first] > window) ++first;
        double value = p.mu * (t[n] - t[n - 1]);
        for (std::size_t i = first; i < n; ++i) {
            value += gamma_kernel_integral(t[n] - t[i], p) - gamma_kernel_integral(t[n - 1] - t[i], p);
        }
        out.push_back(value);
    }
    return out;
}

EventSeries gamma_hawkes_simulate(const GammaKernelParams& p, const StoppingRule& stop, Rng& rng,
                                  ThinningStats* stats) {
    p.validate();
    stop.validate();
    if (p.k < 1.0) throw std::invalid_argument("thinning needs k >= 1 (bounded kernel at lag zero)");
    const double window = p.truncation_lag(1e-12);
    const double mode = kernel_mode(p);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ThinningStats local;
    EventSeries out;
    std::size_t first = 0;
    double now = 0.0;
    const double end = stop.horizon.value_or(kInf);
    while (!(stop.max_events && out.size() >= *stop.max_events)) {
        const auto& t = out.times;
        while (first < t.size() && now - t[first] > window) ++first;
        // each past event contributes at most its kernel value at max(lag, mode)
        // from now on; the bound stays valid until the next accepted event
        double bound = p.mu;
        for (std::size_t i = first; i < t.size(); ++i) bound += gamma_kernel(std::max(now - t[i], mode), p);
        const double wait = -std::log1p(-unif(rng)) / bound;
        now += wait;
        if (now > end) break;
        double lambda = p.mu;
        for (std::size_t i = first; i < t.size(); ++i) lambda += gamma_kernel(now - t[i], p);
        ++local.proposals;
        if (lambda > bound * (1.0 + 1e-12)) ++local.bound_violations;
        if (unif(rng) * bound <= lambda) {
            ++local.accepted;
            out.times.push_back(now);
            out.types.push_back(0);
        }
    }
    if (stats) *stats = local;
    return out;
}

}  // namespace flexhawkes

#include "flexhawkes/residuals.hpp"

#include "flexhawkes/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace flexhawkes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string describe_invalid(double a, double ell, TrapezoidShape s) {
    std::ostringstream os;
    os << "invalid trapezoid parameters: a=" << a << " ell=" << ell << " gives p=" << s.p
       << " c=" << s.c << " (need 0 < p <= 1 and c >= 0)";
    return os.str();
}

// Monotone bisection on the CDF; used where no closed-form inverse exists.
template <class Cdf>
double invert_cdf(Cdf&& cdf, double u, double hi) {
    double lo = 0.0;
    while (cdf(hi) < u) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

TrapezoidShape trapezoid_params(double a, double ell) {
    if (!(a > 0.0) || !(ell > 0.0)) {
        throw std::invalid_argument("trapezoid parameters a and ell must be positive");
    }
    TrapezoidShape s;
    s.p = (6.0 * ell - 2.0 * a * ell) / (a * a * ell * ell + 4.0 * a * ell + 6.0);
    s.c = (2.0 - 2.0 * s.p - s.p * a * ell) / a;
    s.valid = s.p > 0.0 && s.p <= 1.0 && s.c >= 0.0;
    return s;
}

InvalidTrapezoid::InvalidTrapezoid(double a, double ell, TrapezoidShape s)
    : std::invalid_argument(describe_invalid(a, ell, s)), shape(s) {}

ResidualDistribution ResidualDistribution::unit_exponential() {
    return ResidualDistribution(UnitExponential{});
}

ResidualDistribution ResidualDistribution::gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
        throw std::invalid_argument("gamma residual requires positive finite shape and scale");
    }
    return ResidualDistribution(Gamma{shape, scale, std::lgamma(shape) + shape * std::log(scale)});
}

ResidualDistribution ResidualDistribution::unit_mean_gamma(double shape) {
    return gamma(shape, 1.0 / shape);
}

ResidualDistribution ResidualDistribution::trapezoid_exp(double a, double ell) {
    const auto s = trapezoid_params(a, ell);
    if (!s.valid) throw InvalidTrapezoid(a, ell, s);
    return ResidualDistribution(TrapezoidExp{a, ell, s.p, s.c});
}

ResidualDistribution ResidualDistribution::empirical(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("empirical residual needs at least one sample");
    for (double x : samples) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("empirical residual samples must be positive and finite");
        }
    }
    auto sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    return ResidualDistribution(Empirical{std::move(samples), std::move(sorted)});
}

ResidualKind ResidualDistribution::kind() const {
    return static_cast<ResidualKind>(law_.index());
}

std::string ResidualDistribution::name() const {
    return std::visit(overloaded{
                          [](const UnitExponential&) { return std::string("exp"); },
                          [](const Gamma&) { return std::string("gamma"); },
                          [](const TrapezoidExp&) { return std::string("trapezoid"); },
                          [](const Empirical&) { return std::string("empirical"); },
                      },
                      law_);
}

void ResidualDistribution::require_unit_mean() const {
    if (const auto* g = std::get_if<Gamma>(&law_)) {
        if (std::fabs(g->shape * g->scale - 1.0) > 1e-12) {
            throw std::invalid_argument("gamma residual must satisfy shape * scale = 1 for model use");
        }
    }
}

double ResidualDistribution::pdf(double x) const {
    return std::visit(overloaded{
                          [&](const UnitExponential&) { return x < 0.0 ? 0.0 : std::exp(-x); },
                          [&](const Gamma&) { return x < 0.0 ? 0.0 : std::exp(log_pdf(x)); },
                          [&](const TrapezoidExp& t) {
                              if (x < 0.0) return 0.0;
                              if (x < t.a) return (t.p * t.ell - t.c) / t.a * x + t.c;
                              return t.p * t.ell * std::exp(-t.ell * (x - t.a));
                          },
                          [](const Empirical&) -> double {
                              throw std::logic_error("empirical residual has no closed-form density");
                          },
                      },
                      law_);
}

double ResidualDistribution::log_pdf(double x) const {
    return std::visit(overloaded{
                          [&](const UnitExponential&) { return x < 0.0 ? -kInf : -x; },
                          [&](const Gamma& g) {
                              if (x < 0.0) return -kInf;
                              if (x == 0.0) {
                                  if (g.shape < 1.0) return kInf;
                                  if (g.shape > 1.0) return -kInf;
                                  return -g.log_norm;
                              }
                              return (g.shape - 1.0) * std::log(x) - x / g.scale - g.log_norm;
                          },
                          [&](const TrapezoidExp& t) {
                              if (x < 0.0) return -kInf;
                              if (x < t.a) return std::log((t.p * t.ell - t.c) / t.a * x + t.c);
                              return std::log(t.p * t.ell) - t.ell * (x - t.a);
                          },
                          [](const Empirical&) -> double {
                              throw std::logic_error("empirical residual has no closed-form density");
                          },
                      },
                      law_);
}

double ResidualDistribution::cdf(double x) const {
    if (x <= 0.0 && kind() != ResidualKind::empirical) return 0.0;
    return std::visit(overloaded{
                          [&](const UnitExponential&) { return -std::expm1(-x); },
                          [&](const Gamma& g) { return special::gamma_p(g.shape, x / g.scale); },
                          [&](const TrapezoidExp& t) {
                              if (x < t.a) return t.c * x + 0.5 * (t.p * t.ell - t.c) / t.a * x * x;
                              return 1.0 - t.p * std::exp(-t.ell * (x - t.a));
                          },
                          [&](const Empirical& e) {
                              const auto it = std::upper_bound(e.sorted.begin(), e.sorted.end(), x);
                              return static_cast<double>(it - e.sorted.begin()) /
                                     static_cast<double>(e.sorted.size());
                          },
                      },
                      law_);
}

double ResidualDistribution::log_survival(double x) const {
    if (x <= 0.0 && kind() != ResidualKind::empirical) return 0.0;
    return std::visit(overloaded{
                          [&](const UnitExponential&) { return -x; },
                          [&](const Gamma& g) { return special::log_gamma_q(g.shape, x / g.scale); },
                          [&](const TrapezoidExp& t) {
                              if (x < t.a) return std::log1p(-cdf(x));
                              return std::log(t.p) - t.ell * (x - t.a);
                          },
                          [&](const Empirical&) { return std::log1p(-cdf(x)); },
                      },
                      law_);
}

double ResidualDistribution::quantile(double u) const {
    if (!(u >= 0.0) || !(u <= 1.0)) throw std::domain_error("quantile level must lie in [0, 1]");
    return std::visit(overloaded{
                          [&](const UnitExponential&) { return -std::log1p(-u); },
                          [&](const Gamma& g) {
                              if (u == 0.0) return 0.0;
                              if (u == 1.0) return kInf;
                              return invert_cdf([&](double x) { return cdf(x); }, u,
                                                g.shape * g.scale * 2.0 + 1.0);
                          },
                          [&](const TrapezoidExp& t) {
                              const double head = 1.0 - t.p;
                              if (u >= 1.0) return kInf;
                              if (u >= head) return t.a - std::log((1.0 - u) / t.p) / t.ell;
                              // c x + k x^2 / 2 = u with k = (p ell - c) / a
                              const double k = (t.p * t.ell - t.c) / t.a;
                              if (std::fabs(k) < 1e-14) return u / t.c;
                              const double disc = t.c * t.c + 2.0 * k * u;
                              return 2.0 * u / (t.c + std::sqrt(std::max(disc, 0.0)));
                          },
                          [&](const Empirical& e) {
                              const auto n = e.sorted.size();
                              auto idx = static_cast<std::size_t>(std::ceil(u * static_cast<double>(n)));
                              idx = std::clamp<std::size_t>(idx, 1, n);
                              return e.sorted[idx - 1];
                          },
                      },
                      law_);
}

double ResidualDistribution::mean() const {
    return std::visit(overloaded{
                          [](const UnitExponential&) { return 1.0; },
                          [](const Gamma& g) { return g.shape * g.scale; },
                          [](const TrapezoidExp&) { return 1.0; },
                          [](const Empirical& e) {
                              return std::accumulate(e.samples.begin(), e.samples.end(), 0.0) /
                                     static_cast<double>(e.samples.size());
                          },
                      },
                      law_);
}

double ResidualDistribution::sample(Rng& rng) const {
    return std::visit(overloaded{
                          [&](const UnitExponential&) {
                              return std::exponential_distribution<double>(1.0)(rng);
                          },
                          [&](const Gamma& g) {
                              return std::gamma_distribution<double>(g.shape, g.scale)(rng);
                          },
                          [&](const TrapezoidExp&) {
                              std::uniform_real_distribution<double> unif(0.0, 1.0);
                              return quantile(unif(rng));
                          },
                          [&](const Empirical& e) {
                              std::uniform_int_distribution<std::size_t> pick(0, e.samples.size() - 1);
                              return e.samples[pick(rng)];
                          },
                      },
                      law_);
}

}  // namespace flexhawkes

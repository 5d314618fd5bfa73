#include "flexhawkes/univariate.hpp"

#include "flexhawkes/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace flexhawkes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string underflow_message(double t, double last) {
    std::ostringstream os;
    os << "survival underflow at t=" << t << "; largest t with positive survival is " << last;
    return os.str();
}

void require_state(double state, const ExcitationParams& p) {
    if (!(state >= p.mu)) throw std::invalid_argument("lambda state must be >= mu");
}

}  // namespace

void ExcitationParams::validate() const {
    if (!(mu > 0.0) || !(alpha > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("mu, alpha and beta must be positive");
    }
    if (!(alpha < beta)) throw std::invalid_argument("alpha must be smaller than beta");
    if (!std::isfinite(mu) || !std::isfinite(beta)) throw std::invalid_argument("parameters must be finite");
}

EventSeries EventSeries::univariate(std::vector<double> times) {
    EventSeries s;
    s.types.assign(times.size(), 0);
    s.times = std::move(times);
    return s;
}

int EventSeries::dimension() const {
    if (types.empty()) return 1;
    return 1 + *std::max_element(types.begin(), types.end());
}

void EventSeries::validate() const {
    if (types.size() != times.size()) throw std::invalid_argument("types and times differ in length");
    if (!marks.empty() && marks.size() != times.size()) {
        throw std::invalid_argument("marks and times differ in length");
    }
    double prev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (!std::isfinite(t) || t < 0.0) throw std::invalid_argument("event times must be finite and >= 0");
        if (i > 0 && !(t > prev)) {
            throw std::invalid_argument("event times must be strictly increasing (index " +
                                        std::to_string(i) + ")");
        }
        prev = t;
    }
    for (int ty : types) {
        if (ty < 0) throw std::invalid_argument("event types must be nonnegative");
    }
    for (double m : marks) {
        if (!(m > 0.0)) throw std::invalid_argument("marks must be positive");
    }
}

std::vector<double> EventSeries::inter_arrivals() const {
    std::vector<double> tau(times.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        tau[i] = times[i] - prev;
        prev = times[i];
    }
    return tau;
}

void StoppingRule::validate() const {
    if (max_events.has_value() == horizon.has_value()) {
        throw std::invalid_argument("stopping rule needs exactly one of an event count or a horizon");
    }
    if (horizon && !(*horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

SurvivalUnderflow::SurvivalUnderflow(double t_, double last)
    : std::runtime_error(underflow_message(t_, last)), t(t_), last_finite_t(last) {}

double psi(double t, double state, const ExcitationParams& p) {
    return p.mu + (state - p.mu + p.alpha) * std::exp(-p.beta * t);
}

double phi(double t, double state, const ExcitationParams& p) {
    return p.mu * t + (state - p.mu + p.alpha) * (-std::expm1(-p.beta * t)) / p.beta;
}

double phi_inv(double eps, double state, const ExcitationParams& p) {
    if (eps < 0.0 || std::isnan(eps)) throw std::domain_error("phi_inv requires eps >= 0");
    if (eps == 0.0) return 0.0;
    if (std::isinf(eps)) return kInf;
    const double tol = 1e-12 * std::max(1.0, eps);
    double lo = 0.0;
    double hi = eps / p.mu;
    // phi is concave, so Newton from this left point increases monotonically
    double t = eps / psi(0.0, state, p);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = phi(t, state, p) - eps;
        if (std::fabs(f) <= tol) return t;
        if (f < 0.0) {
            lo = t;
        } else {
            hi = t;
        }
        double next = t - f / psi(t, state, p);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == t) break;
        t = next;
    }
    if (std::fabs(phi(t, state, p) - eps) <= 1e3 * tol) return t;
    throw std::runtime_error("phi_inv failed to converge");
}

double lambda_update(double tau, double state, const ExcitationParams& p) {
    return psi(tau, state, p);
}

double conditional_intensity(double t, double state, const ExcitationParams& p,
                             const ResidualDistribution& dist) {
    if (t < 0.0) throw std::domain_error("time since last event must be nonnegative");
    const double base = psi(t, state, p);
    if (dist.kind() == ResidualKind::unit_exponential) return base;
    if (!dist.has_density()) throw std::invalid_argument("conditional intensity needs a residual density");
    const double x = phi(t, state, p);
    const double log_s = dist.log_survival(x);
    if (!std::isfinite(log_s)) {
        double lo = 0.0;
        double hi = t;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (std::isfinite(dist.log_survival(phi(mid, state, p)))) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        throw SurvivalUnderflow(t, lo);
    }
    const double log_f = dist.log_pdf(x);
    if (log_f == -kInf) return 0.0;
    return std::exp(log_f - log_s) * base;
}

Simulation simulate(const ExcitationParams& p, const ResidualDistribution& dist, double lambda0,
                    const StoppingRule& stop, Rng& rng) {
    p.validate();
    stop.validate();
    require_state(lambda0, p);
    Simulation out;
    out.path.lambda0 = lambda0;
    double state = lambda0;
    double now = 0.0;
    for (;;) {
        if (stop.max_events && out.series.size() >= *stop.max_events) break;
        const double eps = dist.sample(rng);
        // a residual too small to move the clock in double precision is redrawn
        const double next = now + phi_inv(eps, state, p);
        if (!(next > now)) continue;
        if (stop.horizon && next > *stop.horizon) break;
        const double tau = next - now;
        now = next;
        state = lambda_update(tau, state, p);
        out.series.times.push_back(now);
        out.series.types.push_back(0);
        out.path.values.push_back(state);
    }
    return out;
}

ResidualInference infer_residuals(const EventSeries& series, const ExcitationParams& p, double lambda0) {
    series.validate();
    if (series.dimension() != 1) throw std::invalid_argument("infer_residuals expects a univariate series");
    require_state(lambda0, p);
    ResidualInference out;
    out.path.lambda0 = lambda0;
    out.residuals.reserve(series.size());
    out.path.values.reserve(series.size());
    double state = lambda0;
    double prev = 0.0;
    for (double t : series.times) {
        const double tau = t - prev;
        prev = t;
        out.residuals.push_back(phi(tau, state, p));
        state = lambda_update(tau, state, p);
        out.path.values.push_back(state);
    }
    return out;
}

double loglik(const std::vector<double>& inter_arrivals, const ExcitationParams& p,
              const ResidualDistribution& dist, double lambda0) {
    if (!dist.has_density()) {
        throw std::invalid_argument("likelihood needs a residual law with a density");
    }
    double state = lambda0;
    double total = 0.0;
    for (double tau : inter_arrivals) {
        const double decay = std::exp(-p.beta * tau);
        const double jump = state - p.mu + p.alpha;
        const double eps = p.mu * tau + jump * (1.0 - decay) / p.beta;
        state = p.mu + jump * decay;
        total += std::log(state) + dist.log_pdf(eps);
    }
    return total;
}

double loglik(const EventSeries& series, const ExcitationParams& p, const ResidualDistribution& dist,
              double lambda0) {
    return loglik(series.inter_arrivals(), p, dist, lambda0);
}

EventSeries simulate_from_pool(const ExcitationParams& p, const std::vector<double>& pool,
                               std::size_t n_events, double lambda0, Rng& rng) {
    if (pool.empty()) throw std::invalid_argument("residual pool is empty");
    require_state(lambda0, p);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    EventSeries out;
    out.times.reserve(n_events);
    double state = lambda0;
    double now = 0.0;
    while (out.size() < n_events) {
        const double next = now + phi_inv(pool[pick(rng)], state, p);
        if (!(next > now)) continue;
        const double tau = next - now;
        now = next;
        state = lambda_update(tau, state, p);
        out.times.push_back(now);
    }
    out.types.assign(out.times.size(), 0);
    return out;
}

std::vector<EventSeries> fhs(const EventSeries& series, const ExcitationParams& p, double lambda0,
                             const FhsOptions& opts) {
    p.validate();
    if (series.size() < 2) throw std::invalid_argument("FHS needs a non-trivial series");
    const auto inferred = infer_residuals(series, p, lambda0);
    std::vector<double> pool;
    pool.reserve(inferred.residuals.size());
    for (double e : inferred.residuals) {
        if (e > 0.0) pool.push_back(e);
    }
    const double start = opts.sim_lambda0.value_or(p.mu);
    std::vector<EventSeries> paths(opts.n_paths);
    parallel_for(opts.n_paths, opts.threads, [&](std::size_t i) {
        auto rng = make_stream(opts.seed, i);
        paths[i] = simulate_from_pool(p, pool, series.size(), start, rng);
    });
    return paths;
}

}  // namespace flexhawkes

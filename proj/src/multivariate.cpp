#include "flexhawkes/multivariate.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace flexhawkes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Parameters driving type i over the step that follows an event of type
// `prev`. No previous type means no excitation to attribute.
ExcitationParams step_params(const MvExcitationParams& p, int i, std::optional<int> prev) {
    ExcitationParams e{p.mu[i], 0.0, p.beta[i]};
    if (prev) e.alpha = p.alpha(i, *prev);
    return e;
}

std::optional<int> initial_type(const MvExcitationParams& p, const MvOptions& opts) {
    if (opts.initial_type) {
        if (*opts.initial_type < 0 || *opts.initial_type >= p.dim()) {
            throw std::invalid_argument("initial type out of range");
        }
        return opts.initial_type;
    }
    if (p.dim() == 1) return 0;
    return std::nullopt;
}

const ResidualDistribution& law_for(std::span<const ResidualDistribution> dists, int i) {
    return dists.size() == 1 ? dists[0] : dists[static_cast<std::size_t>(i)];
}

void check_inputs(const MvExcitationParams& p, std::span<const ResidualDistribution> dists,
                  const std::vector<double>& lambda0) {
    p.validate();
    const auto m = static_cast<std::size_t>(p.dim());
    if (dists.size() != 1 && dists.size() != m) {
        throw std::invalid_argument("need one shared residual law or one per type");
    }
    if (lambda0.size() != m) throw std::invalid_argument("need one initial state per type");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(lambda0[i] >= p.mu[static_cast<Eigen::Index>(i)])) {
            throw std::invalid_argument("initial state must be >= mu for every type");
        }
    }
}

void check_series(const EventSeries& s, const MvExcitationParams& p) {
    s.validate();
    for (int ty : s.types) {
        if (ty >= p.dim()) throw std::invalid_argument("event type exceeds model dimension");
    }
}

}  // namespace

double MvExcitationParams::spectral_radius() const {
    Eigen::MatrixXd branching = alpha;
    for (Eigen::Index i = 0; i < branching.rows(); ++i) branching.row(i) /= beta[i];
    return branching.eigenvalues().cwiseAbs().maxCoeff();
}

bool MvExcitationParams::is_symmetric(double tol) const {
    return (alpha - alpha.transpose()).cwiseAbs().maxCoeff() <= tol &&
           (alpha.diagonal().array() - alpha(0, 0)).abs().maxCoeff() <= tol;
}

void MvExcitationParams::validate() const {
    const auto m = mu.size();
    if (m == 0) throw std::invalid_argument("model needs at least one type");
    if (beta.size() != m || alpha.rows() != m || alpha.cols() != m) {
        throw std::invalid_argument("mu, alpha and beta dimensions disagree");
    }
    if (!(mu.array() > 0.0).all() || !(beta.array() > 0.0).all()) {
        throw std::invalid_argument("mu and beta must be positive");
    }
    if (!(alpha.array() >= 0.0).all() || !alpha.allFinite() || !mu.allFinite() || !beta.allFinite()) {
        throw std::invalid_argument("alpha entries must be finite and nonnegative");
    }
    if (!(spectral_radius() < 1.0)) {
        throw std::invalid_argument("unstable parameters: spectral radius of alpha_ij / beta_i must be < 1");
    }
}

ExcitationParams MvExcitationParams::component(int i, int j) const {
    return {mu[i], alpha(i, j), beta[i]};
}

MvExcitationParams MvExcitationParams::from_univariate(const ExcitationParams& p) {
    MvExcitationParams out;
    out.mu = Eigen::VectorXd::Constant(1, p.mu);
    out.alpha = Eigen::MatrixXd::Constant(1, 1, p.alpha);
    out.beta = Eigen::VectorXd::Constant(1, p.beta);
    return out;
}

std::vector<Rng> make_type_streams(std::uint64_t seed, int m) {
    std::vector<Rng> streams;
    streams.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) streams.push_back(make_stream(seed, static_cast<std::uint64_t>(i)));
    return streams;
}

MvSimulation simulate_mv(const MvExcitationParams& p, std::span<const ResidualDistribution> dists,
                         const std::vector<double>& lambda0, const StoppingRule& stop,
                         std::span<Rng> streams, const MvOptions& opts) {
    check_inputs(p, dists, lambda0);
    stop.validate();
    const int m = p.dim();
    if (streams.size() != static_cast<std::size_t>(m)) {
        throw std::invalid_argument("need one random stream per type");
    }
    MvSimulation out;
    out.paths.resize(static_cast<std::size_t>(m));
    std::vector<double> state = lambda0;
    for (int i = 0; i < m; ++i) out.paths[i].lambda0 = lambda0[i];
    std::optional<int> prev = initial_type(p, opts);
    std::vector<double> tau_i(static_cast<std::size_t>(m));
    double now = 0.0;
    for (;;) {
        if (stop.max_events && out.series.size() >= *stop.max_events) break;
        int winner = 0;
        for (int i = 0; i < m; ++i) {
            const double eps = law_for(dists, i).sample(streams[i]);
            tau_i[i] = phi_inv(eps, state[i], step_params(p, i, prev));
            if (tau_i[i] < tau_i[winner]) winner = i;
        }
        const double next = now + tau_i[winner];
        if (!(next > now)) continue;
        if (stop.horizon && next > *stop.horizon) break;
        const double tau = next - now;
        now = next;
        for (int i = 0; i < m; ++i) {
            state[i] = lambda_update(tau, state[i], step_params(p, i, prev));
            out.paths[i].values.push_back(state[i]);
        }
        out.series.times.push_back(now);
        out.series.types.push_back(winner);
        prev = winner;
    }
    return out;
}

MvLoglik loglik_mv(const EventSeries& series, const MvExcitationParams& p,
                   std::span<const ResidualDistribution> dists, const std::vector<double>& lambda0,
                   const MvOptions& opts) {
    check_inputs(p, dists, lambda0);
    check_series(series, p);
    for (const auto& d : dists) {
        if (!d.has_density()) throw std::invalid_argument("likelihood needs residual laws with densities");
    }
    const int m = p.dim();
    MvLoglik out;
    std::vector<double> state = lambda0;
    std::optional<int> prev = initial_type(p, opts);
    double last = 0.0;
    for (std::size_t n = 0; n < series.size(); ++n) {
        const double tau = series.times[n] - last;
        last = series.times[n];
        const int z = series.types[n];
        double contrib = 0.0;
        for (int i = 0; i < m; ++i) {
            const auto e = step_params(p, i, prev);
            const double decay = std::exp(-e.beta * tau);
            const double jump = state[i] - e.mu + e.alpha;
            const double x = e.mu * tau + jump * (1.0 - decay) / e.beta;
            state[i] = e.mu + jump * decay;
            const auto& law = law_for(dists, i);
            if (i == z) {
                contrib += std::log(state[i]) + law.log_pdf(x);
            } else {
                contrib += law.log_survival(x);
            }
        }
        if (!(contrib > -kInf)) {
            if (!out.failed_index) out.failed_index = n;
            out.value = -kInf;
        } else if (!out.failed_index) {
            out.value += contrib;
        }
        prev = z;
    }
    return out;
}

std::vector<std::vector<double>> infer_residuals_mv(const EventSeries& series, const MvExcitationParams& p,
                                                    const std::vector<double>& lambda0,
                                                    const MvOptions& opts) {
    const auto one = ResidualDistribution::unit_exponential();
    check_inputs(p, std::span(&one, 1), lambda0);
    check_series(series, p);
    const int m = p.dim();
    std::vector<std::vector<double>> residuals(static_cast<std::size_t>(m));
    std::vector<double> acc(static_cast<std::size_t>(m), 0.0);
    std::vector<bool> open(static_cast<std::size_t>(m), false);
    std::vector<double> state = lambda0;
    std::optional<int> prev = initial_type(p, opts);
    if (prev) open[static_cast<std::size_t>(*prev)] = true;
    double last = 0.0;
    for (std::size_t n = 0; n < series.size(); ++n) {
        const double tau = series.times[n] - last;
        last = series.times[n];
        for (int i = 0; i < m; ++i) {
            const auto e = step_params(p, i, prev);
            acc[i] += phi(tau, state[i], e);
            state[i] = lambda_update(tau, state[i], e);
        }
        const int z = series.types[n];
        if (open[z]) residuals[z].push_back(acc[z]);
        acc[z] = 0.0;
        open[z] = true;
        prev = z;
    }
    return residuals;
}

std::vector<LambdaPath> lambda_paths_mv(const EventSeries& series, const MvExcitationParams& p,
                                        const std::vector<double>& lambda0, const MvOptions& opts) {
    const auto one = ResidualDistribution::unit_exponential();
    check_inputs(p, std::span(&one, 1), lambda0);
    check_series(series, p);
    const int m = p.dim();
    std::vector<LambdaPath> paths(static_cast<std::size_t>(m));
    std::vector<double> state = lambda0;
    for (int i = 0; i < m; ++i) paths[i].lambda0 = lambda0[i];
    std::optional<int> prev = initial_type(p, opts);
    double last = 0.0;
    for (std::size_t n = 0; n < series.size(); ++n) {
        const double tau = series.times[n] - last;
        last = series.times[n];
        for (int i = 0; i < m; ++i) {
            state[i] = lambda_update(tau, state[i], step_params(p, i, prev));
            paths[i].values.push_back(state[i]);
        }
        prev = series.types[n];
    }
    return paths;
}

}  // namespace flexhawkes

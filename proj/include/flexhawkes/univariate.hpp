#pragma once

#include "flexhawkes/residuals.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace flexhawkes {

/// Excitation parameters (mu, alpha, beta) of the one-dimensional model.
/// alpha < beta is enforced as a stability heuristic; no sharper criterion is
/// known for non-exponential residuals.
struct ExcitationParams {
    double mu = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    void validate() const;
};

/// Event times in seconds measured from the process origin at 0. The origin
/// acts as event zero of the recursion, so the first inter-arrival is times[0].
struct EventSeries {
    std::vector<double> times;
    std::vector<int> types;
    std::vector<double> marks;  // empty when unmarked

    static EventSeries univariate(std::vector<double> times);

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    bool has_marks() const { return !marks.empty(); }
    /// Number of event types, 1 + the largest type index (1 when empty).
    int dimension() const;
    /// Throws std::invalid_argument on non-increasing times or length mismatch.
    void validate() const;
    std::vector<double> inter_arrivals() const;
};

/// The discrete state sequence: lambda0 at the origin, then the state after
/// each event. It is not the conditional intensity unless residuals are Exp(1).
struct LambdaPath {
    double lambda0 = 0.0;
    std::vector<double> values;
};

struct StoppingRule {
    std::optional<std::size_t> max_events;
    std::optional<double> horizon;

    static StoppingRule count(std::size_t n) { return {n, std::nullopt}; }
    static StoppingRule until(double t) { return {std::nullopt, t}; }
    void validate() const;
};

class SurvivalUnderflow : public std::runtime_error {
public:
    SurvivalUnderflow(double t, double last_finite_t);
    double t;
    double last_finite_t;
};

double psi(double t, double state, const ExcitationParams& p);
double phi(double t, double state, const ExcitationParams& p);
/// Inverse of phi in t. Safeguarded Newton on [0, eps / mu].
double phi_inv(double eps, double state, const ExcitationParams& p);
double lambda_update(double tau, double state, const ExcitationParams& p);

/// Hazard-adjusted intensity f(phi(t)) / (1 - F(phi(t))) * psi(t), with t
/// measured from the last event.
double conditional_intensity(double t, double state, const ExcitationParams& p,
                             const ResidualDistribution& dist);

struct Simulation {
    EventSeries series;
    LambdaPath path;
};

Simulation simulate(const ExcitationParams& p, const ResidualDistribution& dist, double lambda0,
                    const StoppingRule& stop, Rng& rng);

struct ResidualInference {
    std::vector<double> residuals;
    LambdaPath path;
};

ResidualInference infer_residuals(const EventSeries& series, const ExcitationParams& p, double lambda0);

/// Sum over events of log f(phi_n(tau_n)) + log psi_n(tau_n).
double loglik(const EventSeries& series, const ExcitationParams& p, const ResidualDistribution& dist,
              double lambda0);
double loglik(const std::vector<double>& inter_arrivals, const ExcitationParams& p,
              const ResidualDistribution& dist, double lambda0);

struct FhsOptions {
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    /// Starting state of every simulated path; defaults to mu.
    std::optional<double> sim_lambda0;
};

/// Filtered historical simulation: infer residuals of `series` under `p`,
/// then rebuild paths of the same length from residuals resampled with
/// replacement.
std::vector<EventSeries> fhs(const EventSeries& series, const ExcitationParams& p, double lambda0,
                             const FhsOptions& opts);

/// Path generation from an explicit residual pool (the last step of FHS).
EventSeries simulate_from_pool(const ExcitationParams& p, const std::vector<double>& pool,
                               std::size_t n_events, double lambda0, Rng& rng);

}  // namespace flexhawkes

#pragma once

#include "flexhawkes/residuals.hpp"
#include "flexhawkes/univariate.hpp"

#include <optional>
#include <vector>

namespace flexhawkes {

/// Hawkes process with the gamma-shaped kernel
/// h(t) = alpha (t beta)^(k-1) exp(-beta t) / Gamma(k), which integrates to
/// alpha / beta. k = 1 is the exponential kernel.
struct GammaKernelParams {
    double mu = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double k = 1.0;

    void validate() const;
    double branching_ratio() const { return alpha / beta; }
    /// Lag beyond which the remaining kernel mass is below `mass_tol`.
    double truncation_lag(double mass_tol = 1e-10) const;
};

double gamma_kernel(double t, const GammaKernelParams& p);
/// Integral of the kernel over [0, s].
double gamma_kernel_integral(double s, const GammaKernelParams& p);
/// Conditional intensity at time t given events strictly before t.
double gamma_hawkes_intensity(double t, const EventSeries& series, const GammaKernelParams& p);

/// Log-likelihood over [0, horizon]; horizon defaults to the last event time.
double gamma_hawkes_loglik(const EventSeries& series, const GammaKernelParams& p,
                           std::optional<double> horizon = std::nullopt);

/// Compensator increments between consecutive events (time rescaling);
/// Exp(1) under the true parameters.
std::vector<double> gamma_hawkes_compensator_residuals(const EventSeries& series, const GammaKernelParams& p);

struct ThinningStats {
    std::size_t proposals = 0;
    std::size_t accepted = 0;
    std::size_t bound_violations = 0;
};

/// Ogata thinning. Requires k >= 1 so the kernel is bounded at lag zero.
EventSeries gamma_hawkes_simulate(const GammaKernelParams& p, const StoppingRule& stop, Rng& rng,
                                  ThinningStats* stats = nullptr);

}  // namespace flexhawkes

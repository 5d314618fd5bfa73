#pragma once

#include "flexhawkes/residuals.hpp"
#include "flexhawkes/univariate.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace flexhawkes {

/// Parameters of the m-type model. alpha(i, j) is the excitation of type i
/// caused by an event of type j; type i decays at beta[i].
struct MvExcitationParams {
    Eigen::VectorXd mu;
    Eigen::MatrixXd alpha;
    Eigen::VectorXd beta;

    int dim() const { return static_cast<int>(mu.size()); }
    /// Spectral radius of the branching matrix alpha(i, j) / beta[i].
    double spectral_radius() const;
    bool is_symmetric(double tol = 0.0) const;
    /// Shapes, positivity (alpha may be zero), and the stability gate.
    void validate() const;
    /// The univariate parameter set theta_ij = {mu_i, alpha_ij, beta_i}.
    ExcitationParams component(int i, int j) const;
    static MvExcitationParams from_univariate(const ExcitationParams& p);
};

/// Type of the (unobserved) event at the origin. When absent, the first
/// inter-arrival carries no excitation term and the origin is not attributed
/// to any type. With a single type the origin is unambiguously type 0.
struct MvOptions {
    std::optional<int> initial_type;
};

struct MvSimulation {
    EventSeries series;
    std::vector<LambdaPath> paths;  // one per type
};

/// One random stream per type, derived from a base seed.
std::vector<Rng> make_type_streams(std::uint64_t seed, int m);

/// Competing-inversion simulation. `dists` holds either one shared law or one
/// law per type; `streams` holds one random stream per type.
MvSimulation simulate_mv(const MvExcitationParams& p, std::span<const ResidualDistribution> dists,
                         const std::vector<double>& lambda0, const StoppingRule& stop,
                         std::span<Rng> streams, const MvOptions& opts = {});

struct MvLoglik {
    double value = 0.0;
    /// Index of the first event whose contribution was -inf, if any.
    std::optional<std::size_t> failed_index;
};

MvLoglik loglik_mv(const EventSeries& series, const MvExcitationParams& p,
                   std::span<const ResidualDistribution> dists, const std::vector<double>& lambda0,
                   const MvOptions& opts = {});

/// Per-type residuals: phi_i summed over all steps between consecutive type-i
/// events (the origin counts as an event of the initial type, when known).
std::vector<std::vector<double>> infer_residuals_mv(const EventSeries& series, const MvExcitationParams& p,
                                                    const std::vector<double>& lambda0,
                                                    const MvOptions& opts = {});

/// The per-type state paths lambda_{i,n} along an observed series.
std::vector<LambdaPath> lambda_paths_mv(const EventSeries& series, const MvExcitationParams& p,
                                        const std::vector<double>& lambda0, const MvOptions& opts = {});

}  // namespace flexhawkes

#pragma once

#include "flexhawkes/multivariate.hpp"
#include "flexhawkes/optimizer.hpp"
#include "flexhawkes/residuals.hpp"
#include "flexhawkes/univariate.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flexhawkes {

enum class ResidualFamily { exponential, gamma, trapezoid_exp };

ResidualFamily parse_family(std::string_view name);
std::string to_string(ResidualFamily family);

struct ModelSpec {
    int dimension = 1;
    /// Two-type models only: alpha11 = alpha22 and alpha12 = alpha21.
    bool symmetric = false;
    ResidualFamily family = ResidualFamily::exponential;
};

/// Names of the free parameters, in the order used by every natural
/// parameter vector (estimates, init, std errors).
std::vector<std::string> parameter_names(const ModelSpec& spec);

/// A natural parameter vector split into the model's typed pieces.
struct DecodedParams {
    MvExcitationParams excitation;
    ResidualDistribution residual = ResidualDistribution::unit_exponential();
};

/// Throws std::invalid_argument if the vector violates a model constraint.
DecodedParams decode(const ModelSpec& spec, std::span<const double> natural);

struct GmmDiagnostics {
    std::vector<double> stage1_estimates;
    double stage1_objective = 0.0;
    Eigen::Matrix3d weight = Eigen::Matrix3d::Identity();
    bool ridge_applied = false;
    bool two_step = true;
};

struct FitReport {
    std::string model;      // "flex" or "hawkes"
    std::string estimator;  // "mle", "qmle" or "gmm"
    ModelSpec spec;
    std::vector<std::string> names;
    std::vector<double> estimates;
    std::vector<double> std_errors;
    double objective = 0.0;  // log-likelihood, or the GMM criterion
    std::optional<double> loglik;
    std::vector<std::vector<double>> residuals;  // one sequence per type
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t n_events = 0;
    std::vector<std::string> warnings;
    std::optional<GmmDiagnostics> gmm;

    double get(std::string_view name) const;
    ExcitationParams excitation() const;
    MvExcitationParams mv_excitation() const;
    ResidualDistribution residual_law() const;
};

struct FitOptions {
    ModelSpec spec;
    /// When false, the dimension is taken from the series.
    bool dimension_from_series = true;
    std::optional<std::vector<double>> init;
    /// Without an explicit init, the optimizer also starts from the default
    /// point with every alpha and beta multiplied by each of these factors, and
    /// keeps the best likelihood. Slow- and fast-decay basins differ.
    std::vector<double> start_scales{0.25, 4.0};
    /// Initial states; by default each type starts at its current mu.
    std::optional<std::vector<double>> lambda0;
    /// Optimize directly on the natural parameters instead of log coordinates.
    bool raw_coordinates = false;
    bool compute_std_errors = true;
    std::size_t min_events = 100;
    NelderMeadOptions optimizer;
};

/// Log-likelihood of the natural parameter vector; -inf when infeasible.
double model_loglik(const EventSeries& series, const ModelSpec& spec, std::span<const double> natural,
                    const std::optional<std::vector<double>>& lambda0 = std::nullopt);

std::vector<double> default_init(const EventSeries& series, const ModelSpec& spec);

FitReport mle_fit(const EventSeries& series, const FitOptions& opts);
/// Exponential-residual (standard Hawkes) likelihood whatever the true law.
FitReport qmle_exp_fit(const EventSeries& series, FitOptions opts);

struct GmmSpec {
    enum class Weighting { identity, two_step };
    Weighting weighting = Weighting::two_step;
    /// Common positive factor applied to all three moment components.
    double moment_scale = 1.0;
};

struct GmmOptions {
    GmmSpec spec;
    std::optional<ExcitationParams> init;
    bool compute_std_errors = true;
    NelderMeadOptions optimizer;
};

/// Moment contributions g_n = (eps_{n-1}, lambda_{n-1}, tau_{n-1}) * (eps_n - 1)
/// for n = 2..N, using residuals inferred with lambda0 = mu.
std::vector<std::array<double, 3>> gmm_moments(const EventSeries& series, const ExcitationParams& p,
                                               double moment_scale = 1.0);
double gmm_criterion(const EventSeries& series, const ExcitationParams& p, const Eigen::Matrix3d& weight,
                     double moment_scale = 1.0);
Eigen::Matrix3d moment_covariance(const std::vector<std::array<double, 3>>& g);

FitReport gmm_fit(const EventSeries& series, const GmmOptions& opts = {});

enum class SeMethod { hessian, gmm_sandwich };

struct HessianStdErrors {
    std::vector<double> std_errors;
    bool positive_definite = false;
};

/// Standard errors from the inverse of the negative Hessian of `loglik`.
HessianStdErrors hessian_std_errors(const Objective& loglik, std::span<const double> x,
                                    std::span<const double> steps);

std::vector<double> std_errors(const FitReport& report, const EventSeries& series, SeMethod method);

}  // namespace flexhawkes

#pragma once

#include "flexhawkes/multivariate.hpp"
#include "flexhawkes/univariate.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>

namespace flexhawkes {

/// First and second moments of the jump size attached to each type
/// (type 0 = up, type 1 = down), in price units.
struct MarkMoments {
    Eigen::Vector2d mean = Eigen::Vector2d::Ones();
    Eigen::Vector2d second = Eigen::Vector2d::Ones();

    static MarkMoments unit() { return {}; }
    static MarkMoments from_marks(const EventSeries& series);
    void validate() const;
};

/// How the second-moment matrix enters the B equation. `literal` feeds the
/// Lyapunov solution in directly; `centered` treats that solution as the
/// covariance of lambda and adds E[lambda] E[lambda]^T first. Only the
/// centered reading recovers the Poisson variance when alpha = 0.
enum class MomentInterpretation { literal, centered };

std::string to_string(MomentInterpretation m);
MomentInterpretation parse_interpretation(const std::string& s);

struct VolatilitySolution {
    Eigen::Vector2d expected_lambda;
    Eigen::Matrix2d lambda_second;  // solution of the Lyapunov equation
    Eigen::Matrix2d B;
    double hvol = 0.0;
    double horizon = 0.0;
    MomentInterpretation interpretation = MomentInterpretation::centered;
};

/// E[lambda] = (beta - alpha)^-1 beta mu with beta = diag(beta1, beta2).
Eigen::Vector2d expected_lambda(const MvExcitationParams& p);

/// Solves (alpha - beta) S + S (alpha - beta)^T + alpha Dg(E[lambda]) alpha^T = 0.
Eigen::Matrix2d lambda_second_moment(const MvExcitationParams& p, const Eigen::Vector2d& expected);

/// Solves B (alpha - beta)^T + Zbar^T o M + Dg(E[lambda]) (alpha o Zbar)^T
///        - Dg(Zbar) E[lambda] E[lambda]^T = 0,
/// where M is the second-moment matrix under `interp`.
Eigen::Matrix2d solve_B(const MvExcitationParams& p, const MarkMoments& marks, const Eigen::Vector2d& expected,
                        const Eigen::Matrix2d& lambda_second, MomentInterpretation interp);

/// Residual norms of the three moment equations at a solution.
struct VolatilityResiduals {
    double expected_lambda = 0.0;
    double lambda_second = 0.0;
    double B = 0.0;
};
VolatilityResiduals volatility_residuals(const MvExcitationParams& p, const MarkMoments& marks,
                                         const VolatilitySolution& s);

VolatilitySolution solve_volatility(const MvExcitationParams& p, const MarkMoments& marks, double t,
                                    MomentInterpretation interp = MomentInterpretation::centered);

double hawkes_vol(const MvExcitationParams& p, const MarkMoments& marks, double t,
                  MomentInterpretation interp = MomentInterpretation::centered);

/// Mark-weighted up-minus-down count of one path over [0, t]; unit marks
/// when the path carries none.
double weighted_difference(const EventSeries& path, double t);

/// Sample standard deviation of weighted_difference across paths.
double empirical_vol(std::span<const EventSeries> paths, double t);

}  // namespace flexhawkes

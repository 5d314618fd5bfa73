#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace flexhawkes {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    double x_tol = 1e-8;        // relative simplex diameter
    double f_tol = 1e-10;       // objective spread, relative to 1 + |f|
    std::size_t max_iterations = 100000;
    std::size_t max_restarts = 5;
    double initial_step = 0.1;
};

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    /// Best objective value after each iteration (nonincreasing).
    std::vector<double> best_trace;
};

/// Derivative-free minimization. Non-finite objective values are treated as
/// +inf, which lets callers encode hard constraints. After convergence the
/// simplex is rebuilt around the best point until a restart stops improving.
OptimResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts = {});

/// Central-difference Hessian of f at x with per-coordinate steps.
std::vector<std::vector<double>> numerical_hessian(const Objective& f, std::span<const double> x,
                                                   std::span<const double> steps);

}  // namespace flexhawkes

#include "flexhawkes/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace flexhawkes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
    std::vector<std::vector<double>> points;
    std::vector<double> values;
};

double safe_eval(const Objective& f, std::span<const double> x, std::size_t& evals) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

Simplex build_simplex(const Objective& f, const std::vector<double>& x0, double step, std::size_t& evals) {
    const std::size_t n = x0.size();
    Simplex s;
    s.points.assign(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        s.points[i + 1][i] += step * std::max(1.0, std::fabs(x0[i]));
    }
    s.values.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) s.values[i] = safe_eval(f, s.points[i], evals);
    return s;
}

void order(Simplex& s) {
    std::vector<std::size_t> idx(s.points.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s.values[a] < s.values[b]; });
    Simplex sorted;
    for (auto i : idx) {
        sorted.points.push_back(std::move(s.points[i]));
        sorted.values.push_back(s.values[i]);
    }
    s = std::move(sorted);
}

bool has_converged(const Simplex& s, const NelderMeadOptions& opts) {
    const auto& best = s.points.front();
    double diameter = 0.0;
    double scale = 0.0;
    for (const auto& p : s.points) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            diameter = std::max(diameter, std::fabs(p[i] - best[i]));
            scale = std::max(scale, std::fabs(best[i]));
        }
    }
    const double spread = s.values.back() - s.values.front();
    return std::isfinite(spread) && diameter <= opts.x_tol * std::max(1.0, scale) &&
           spread <= opts.f_tol * (1.0 + std::fabs(s.values.front()));
}

std::vector<double> affine(const std::vector<double>& c, const std::vector<double>& p, double t) {
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] + t * (p[i] - c[i]);
    return out;
}

}  // namespace

OptimResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts) {
    const std::size_t n = x0.size();
    OptimResult result;
    if (n == 0) {
        result.value = safe_eval(f, x0, result.evaluations);
        result.converged = true;
        return result;
    }
    auto simplex = build_simplex(f, x0, opts.initial_step, result.evaluations);
    double last_restart_best = kInf;
    std::size_t restarts = 0;
    while (result.iterations < opts.max_iterations) {
        order(simplex);
        result.best_trace.push_back(simplex.values.front());
        if (has_converged(simplex, opts)) {
            const double best = simplex.values.front();
            const bool stalled = last_restart_best - best <= opts.f_tol * (1.0 + std::fabs(best));
            if (stalled || restarts >= opts.max_restarts) {
                result.converged = std::isfinite(best);
                break;
            }
            last_restart_best = best;
            ++restarts;
            const auto centre = simplex.points.front();
            simplex = build_simplex(f, centre, opts.initial_step * 0.5, result.evaluations);
            simplex.points.front() = centre;
            simplex.values.front() = best;
            continue;
        }
        ++result.iterations;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex.points[k][i] / static_cast<double>(n);
        }
        const auto& worst = simplex.points.back();
        const double f_worst = simplex.values.back();
        const double f_best = simplex.values.front();
        const double f_second = simplex.values[n - 1];

        auto reflected = affine(centroid, worst, -1.0);
        const double f_reflected = safe_eval(f, reflected, result.evaluations);
        if (f_reflected < f_best) {
            auto expanded = affine(centroid, worst, -2.0);
            const double f_expanded = safe_eval(f, expanded, result.evaluations);
            if (f_expanded < f_reflected) {
                simplex.points.back() = std::move(expanded);
                simplex.values.back() = f_expanded;
            } else {
                simplex.points.back() = std::move(reflected);
                simplex.values.back() = f_reflected;
            }
            continue;
        }
        if (f_reflected < f_second) {
            simplex.points.back() = std::move(reflected);
            simplex.values.back() = f_reflected;
            continue;
        }
        const bool outside = f_reflected < f_worst;
        auto contracted = outside ? affine(centroid, worst, -0.5) : affine(centroid, worst, 0.5);
        const double f_contracted = safe_eval(f, contracted, result.evaluations);
        if (f_contracted < std::min(f_reflected, f_worst)) {
            simplex.points.back() = std::move(contracted);
            simplex.values.back() = f_contracted;
            continue;
        }
        // shrink toward the best vertex
        for (std::size_t k = 1; k <= n; ++k) {
            simplex.points[k] = affine(simplex.points.front(), simplex.points[k], 0.5);
            simplex.values[k] = safe_eval(f, simplex.points[k], result.evaluations);
        }
    }
    order(simplex);
    result.x = simplex.points.front();
    result.value = simplex.values.front();
    return result;
}

std::vector<std::vector<double>> numerical_hessian(const Objective& f, std::span<const double> x,
                                                   std::span<const double> steps) {
    const std::size_t n = x.size();
    std::vector<double> point(x.begin(), x.end());
    auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
        point[i] += di;
        point[j] += dj;
        const double v = f(point);
        point[i] -= di;
        point[j] -= dj;
        return v;
    };
    const double f0 = f(point);
    std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double hi = steps[i];
        h[i][i] = (at(i, hi, i, 0.0) - 2.0 * f0 + at(i, -hi, i, 0.0)) / (hi * hi);
        for (std::size_t j = 0; j < i; ++j) {
            const double hj = steps[j];
            const double v = (at(i, hi, j, hj) - at(i, hi, j, -hj) - at(i, -hi, j, hj) + at(i, -hi, j, -hj)) /
                             (4.0 * hi * hj);
            h[i][j] = v;
            h[j][i] = v;
        }
    }
    return h;
}

}  // namespace flexhawkes

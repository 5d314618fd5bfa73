#pragma once

#include <cstddef>

namespace flexhawkes::special {

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

/// log Q(a, x), accurate deep in the upper tail where Q underflows.
double log_gamma_q(double a, double x);

/// Asymptotic Kolmogorov survival function with the Stephens small-sample
/// correction. Returns P(D_n > d) for a one-sample statistic.
double kolmogorov_pvalue(double d, std::size_t n);

}  // namespace flexhawkes::special

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace flexhawkes {

using Rng = std::mt19937_64;

/// Builds one independent stream per index from a base seed. Stream `i` is
/// a function of (seed, i) only, so results do not depend on thread count.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

/// Mixing weight p and density intercept c of the trapezoid-exponential
/// residual law. The density is a valid unit-mean law only when
/// 0 < p <= 1 and c >= 0.
struct TrapezoidShape {
    double p = 0.0;
    double c = 0.0;
    bool valid = false;
};

TrapezoidShape trapezoid_params(double a, double ell);

class InvalidTrapezoid : public std::invalid_argument {
public:
    InvalidTrapezoid(double a, double ell, TrapezoidShape shape);
    TrapezoidShape shape;
};

enum class ResidualKind { unit_exponential, gamma, trapezoid_exp, empirical };

/// Positive-support residual law with unit mean (for model use). Values are
/// immutable once built and safe to share across threads.
class ResidualDistribution {
public:
    struct UnitExponential {};
    struct Gamma {
        double shape;
        double scale;
        double log_norm;  // lgamma(shape) + shape * log(scale)
    };
    struct TrapezoidExp {
        double a;
        double ell;
        double p;
        double c;
    };
    struct Empirical {
        std::vector<double> samples;  // as given, used for resampling
        std::vector<double> sorted;
    };

    static ResidualDistribution unit_exponential();
    static ResidualDistribution gamma(double shape, double scale);
    /// Gamma with scale = 1 / shape so that the mean is one.
    static ResidualDistribution unit_mean_gamma(double shape);
    static ResidualDistribution trapezoid_exp(double a, double ell);
    static ResidualDistribution empirical(std::vector<double> samples);

    ResidualKind kind() const;
    std::string name() const;
    bool has_density() const { return kind() != ResidualKind::empirical; }

    /// Throws unless the law is admissible as a model residual (unit mean).
    void require_unit_mean() const;

    double pdf(double x) const;
    double log_pdf(double x) const;
    double cdf(double x) const;
    /// log(1 - F(x)); -inf once the survival underflows.
    double log_survival(double x) const;
    double quantile(double u) const;
    double mean() const;
    double sample(Rng& rng) const;

    const auto& variant() const { return law_; }

private:
    using Law = std::variant<UnitExponential, Gamma, TrapezoidExp, Empirical>;
    explicit ResidualDistribution(Law law) : law_(std::move(law)) {}
    Law law_;
};

}  // namespace flexhawkes

#include "flexhawkes/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flexhawkes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t residual_param_count(ResidualFamily f) {
    switch (f) {
        case ResidualFamily::exponential: return 0;
        case ResidualFamily::gamma: return 1;
        case ResidualFamily::trapezoid_exp: return 2;
    }
    return 0;
}

std::size_t excitation_param_count(const ModelSpec& spec) {
    const auto m = static_cast<std::size_t>(spec.dimension);
    if (m == 1) return 3;
    if (spec.symmetric) return 6;
    return 2 * m + m * m;
}

void check_spec(const ModelSpec& spec) {
    if (spec.dimension < 1) throw std::invalid_argument("model dimension must be >= 1");
    if (spec.symmetric && spec.dimension != 2) {
        throw std::invalid_argument("the symmetric constraint applies to two-type models only");
    }
}

ResidualDistribution residual_from(ResidualFamily family, std::span<const double> r) {
    switch (family) {
        case ResidualFamily::exponential: return ResidualDistribution::unit_exponential();
        case ResidualFamily::gamma: return ResidualDistribution::unit_mean_gamma(r[0]);
        case ResidualFamily::trapezoid_exp: return ResidualDistribution::trapezoid_exp(r[0], r[1]);
    }
    throw std::logic_error("unknown residual family");
}

// Natural <-> optimizer coordinates. In log coordinates the univariate model
// stores log(beta - alpha), which keeps alpha < beta without a constraint.
std::vector<double> to_natural(const ModelSpec& spec, std::span<const double> y, bool raw) {
    std::vector<double> x(y.begin(), y.end());
    if (raw) return x;
    for (double& v : x) v = std::exp(v);
    if (spec.dimension == 1) x[2] = x[1] + x[2];
    return x;
}

std::vector<double> to_unconstrained(const ModelSpec& spec, std::span<const double> x, bool raw) {
    std::vector<double> y(x.begin(), x.end());
    if (raw) return y;
    if (spec.dimension == 1) {
        if (!(x[2] > x[1])) throw std::invalid_argument("initial beta must exceed alpha");
        y[2] = x[2] - x[1];
    }
    for (double& v : y) {
        if (!(v > 0.0)) throw std::invalid_argument("initial parameters must be positive");
        v = std::log(v);
    }
    return y;
}

std::size_t min_events_for(const EventSeries& s, std::size_t min_events) {
    if (s.size() < min_events) {
        throw std::invalid_argument("estimation needs at least " + std::to_string(min_events) + " events");
    }
    return s.size();
}

std::vector<double> default_lambda0(const MvExcitationParams& p) {
    return std::vector<double>(p.mu.data(), p.mu.data() + p.mu.size());
}

std::vector<std::vector<double>> inferred_residuals(const EventSeries& s, const ModelSpec& spec,
                                                    const DecodedParams& d,
                                                    const std::optional<std::vector<double>>& lambda0) {
    const auto l0 = lambda0.value_or(default_lambda0(d.excitation));
    if (spec.dimension == 1) {
        return {infer_residuals(s, d.excitation.component(0, 0), l0[0]).residuals};
    }
    return infer_residuals_mv(s, d.excitation, l0);
}

}  // namespace

ResidualFamily parse_family(std::string_view name) {
    if (name == "exp" || name == "exponential") return ResidualFamily::exponential;
    if (name == "gamma") return ResidualFamily::gamma;
    if (name == "trapezoid" || name == "trapezoid_exp") return ResidualFamily::trapezoid_exp;
    throw std::invalid_argument("unknown residual family '" + std::string(name) +
                                "' (expected exp, gamma or trapezoid)");
}

std::string to_string(ResidualFamily family) {
    switch (family) {
        case ResidualFamily::exponential: return "exp";
        case ResidualFamily::gamma: return "gamma";
        case ResidualFamily::trapezoid_exp: return "trapezoid";
    }
    return "unknown";
}

std::vector<std::string> parameter_names(const ModelSpec& spec) {
    check_spec(spec);
    std::vector<std::string> names;
    const int m = spec.dimension;
    if (m == 1) {
        names = {"mu", "alpha", "beta"};
    } else if (spec.symmetric) {
        names = {"mu1", "mu2", "alpha11", "alpha12", "beta1", "beta2"};
    } else {
        for (int i = 0; i < m; ++i) names.push_back("mu" + std::to_string(i + 1));
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) names.push_back("alpha" + std::to_string(i + 1) + std::to_string(j + 1));
        }
        for (int i = 0; i < m; ++i) names.push_back("beta" + std::to_string(i + 1));
    }
    switch (spec.family) {
        case ResidualFamily::exponential: break;
        case ResidualFamily::gamma: names.push_back("shape"); break;
        case ResidualFamily::trapezoid_exp:
            names.push_back("a");
            names.push_back("ell");
            break;
    }
    return names;
}

DecodedParams decode(const ModelSpec& spec, std::span<const double> x) {
    check_spec(spec);
    const auto ne = excitation_param_count(spec);
    if (x.size() != ne + residual_param_count(spec.family)) {
        throw std::invalid_argument("parameter vector has the wrong length");
    }
    for (double v : x) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("parameters must be positive");
    }
    DecodedParams out;
    const int m = spec.dimension;
    auto& e = out.excitation;
    e.mu.resize(m);
    e.beta.resize(m);
    e.alpha.resize(m, m);
    if (m == 1) {
        const ExcitationParams p{x[0], x[1], x[2]};
        p.validate();
        e = MvExcitationParams::from_univariate(p);
    } else if (spec.symmetric) {
        e.mu << x[0], x[1];
        e.alpha << x[2], x[3], x[3], x[2];
        e.beta << x[4], x[5];
    } else {
        std::size_t k = 0;
        for (int i = 0; i < m; ++i) e.mu[i] = x[k++];
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) e.alpha(i, j) = x[k++];
        }
        for (int i = 0; i < m; ++i) e.beta[i] = x[k++];
    }
    e.validate();
    out.residual = residual_from(spec.family, x.subspan(ne));
    return out;
}

double FitReport::get(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return estimates[i];
    }
    throw std::out_of_range("no parameter named " + std::string(name));
}

ExcitationParams FitReport::excitation() const {
    if (spec.dimension != 1) throw std::logic_error("report is not univariate");
    return {get("mu"), get("alpha"), get("beta")};
}

MvExcitationParams FitReport::mv_excitation() const {
    return decode(spec, estimates).excitation;
}

ResidualDistribution FitReport::residual_law() const {
    return decode(spec, estimates).residual;
}

double model_loglik(const EventSeries& series, const ModelSpec& spec, std::span<const double> natural,
                    const std::optional<std::vector<double>>& lambda0) {
    DecodedParams d;
    try {
        d = decode(spec, natural);
    } catch (const std::invalid_argument&) {
        return -kInf;
    }
    const auto l0 = lambda0.value_or(default_lambda0(d.excitation));
    if (spec.dimension == 1) {
        return loglik(series, d.excitation.component(0, 0), d.residual, l0[0]);
    }
    return loglik_mv(series, d.excitation, std::span(&d.residual, 1), l0).value;
}

std::vector<double> default_init(const EventSeries& series, const ModelSpec& spec) {
    check_spec(spec);
    if (series.empty()) throw std::invalid_argument("cannot initialise from an empty series");
    const double horizon = series.times.back();
    const double rate = static_cast<double>(series.size()) / horizon;
    std::vector<double> x;
    const int m = spec.dimension;
    if (m == 1) {
        x = {rate, rate, 2.0 * rate};
    } else {
        std::vector<double> counts(static_cast<std::size_t>(m), 0.0);
        for (int ty : series.types) counts[static_cast<std::size_t>(ty)] += 1.0;
        for (int i = 0; i < m; ++i) x.push_back(std::max(counts[i], 1.0) / horizon);
        const double a = 0.5 * 2.0 * rate / m;
        if (spec.symmetric) {
            x.push_back(a);
            x.push_back(a);
        } else {
            for (int k = 0; k < m * m; ++k) x.push_back(a);
        }
        for (int i = 0; i < m; ++i) x.push_back(2.0 * rate);
    }
    switch (spec.family) {
        case ResidualFamily::exponential: break;
        case ResidualFamily::gamma: x.push_back(1.0); break;
        case ResidualFamily::trapezoid_exp:
            x.push_back(0.1);
            x.push_back(1.0);
            break;
    }
    return x;
}

HessianStdErrors hessian_std_errors(const Objective& loglik_fn, std::span<const double> x,
                                    std::span<const double> steps) {
    const auto h = numerical_hessian(loglik_fn, x, steps);
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd info(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) info(i, j) = -h[i][j];
    }
    HessianStdErrors out;
    out.std_errors.assign(x.size(), kNaN);
    if (!info.allFinite()) return out;
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) return out;
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(n, n));
    for (Eigen::Index i = 0; i < n; ++i) out.std_errors[i] = std::sqrt(cov(i, i));
    out.positive_definite = true;
    return out;
}

namespace {

std::vector<double> relative_steps(std::span<const double> x, double rel) {
    std::vector<double> steps(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) steps[i] = rel * std::max(std::fabs(x[i]), 1e-8);
    return steps;
}

std::vector<double> hessian_se_for(const FitReport& r, const EventSeries& s,
                                   const std::optional<std::vector<double>>& lambda0, bool& pd) {
    const Objective ll = [&](std::span<const double> x) { return model_loglik(s, r.spec, x, lambda0); };
    const auto res = hessian_std_errors(ll, r.estimates, relative_steps(r.estimates, 1e-4));
    pd = res.positive_definite;
    return res.std_errors;
}

}  // namespace

FitReport mle_fit(const EventSeries& series, const FitOptions& opts) {
    series.validate();
    ModelSpec spec = opts.spec;
    if (opts.dimension_from_series) spec.dimension = std::max(spec.dimension, series.dimension());
    check_spec(spec);
    min_events_for(series, opts.min_events);
    if (series.dimension() > spec.dimension) throw std::invalid_argument("series has more types than the model");

    const auto init = opts.init.value_or(default_init(series, spec));
    if (init.size() != parameter_names(spec).size()) throw std::invalid_argument("init has the wrong length");
    if (!std::isfinite(model_loglik(series, spec, init, opts.lambda0))) {
        throw std::invalid_argument("initial parameters are infeasible");
    }
    const Objective objective = [&](std::span<const double> y) {
        const auto x = to_natural(spec, y, opts.raw_coordinates);
        const double ll = model_loglik(series, spec, x, opts.lambda0);
        return std::isfinite(ll) ? -ll : kInf;
    };
    auto result = nelder_mead(objective, to_unconstrained(spec, init, opts.raw_coordinates), opts.optimizer);
    if (!opts.init) {
        // alpha and beta sit after the m baseline rates
        const auto first = static_cast<std::size_t>(spec.dimension);
        const auto last = excitation_param_count(spec);
        for (double scale : opts.start_scales) {
            auto start = init;
            for (std::size_t k = first; k < last; ++k) start[k] *= scale;
            if (!std::isfinite(model_loglik(series, spec, start, opts.lambda0))) continue;
            auto alt = nelder_mead(objective, to_unconstrained(spec, start, opts.raw_coordinates), opts.optimizer);
            if (alt.value < result.value) result = std::move(alt);
        }
    }

    FitReport r;
    r.model = spec.family == ResidualFamily::exponential ? "hawkes" : "flex";
    r.estimator = "mle";
    r.spec = spec;
    r.names = parameter_names(spec);
    r.estimates = to_natural(spec, result.x, opts.raw_coordinates);
    r.objective = -result.value;
    r.loglik = r.objective;
    r.converged = result.converged;
    r.iterations = result.iterations;
    r.n_events = series.size();
    if (!r.converged) r.warnings.push_back("optimizer did not converge; estimates are best-so-far");
    r.residuals = inferred_residuals(series, spec, decode(spec, r.estimates), opts.lambda0);
    if (opts.compute_std_errors) {
        bool pd = false;
        r.std_errors = hessian_se_for(r, series, opts.lambda0, pd);
        if (!pd) r.warnings.push_back("negative Hessian is not positive definite; std errors are NaN");
    } else {
        r.std_errors.assign(r.estimates.size(), kNaN);
    }
    return r;
}

FitReport qmle_exp_fit(const EventSeries& series, FitOptions opts) {
    opts.spec.family = ResidualFamily::exponential;
    if (opts.init && opts.init->size() > parameter_names(opts.spec).size()) {
        opts.init->resize(excitation_param_count(opts.spec));
    }
    auto r = mle_fit(series, opts);
    r.estimator = "qmle";
    return r;
}

std::vector<std::array<double, 3>> gmm_moments(const EventSeries& series, const ExcitationParams& p,
                                               double moment_scale) {
    const auto inf = infer_residuals(series, p, p.mu);
    const auto tau = series.inter_arrivals();
    const auto& eps = inf.residuals;
    const auto& lam = inf.path.values;
    std::vector<std::array<double, 3>> g;
    if (eps.size() < 2) return g;
    g.reserve(eps.size() - 1);
    for (std::size_t k = 1; k < eps.size(); ++k) {
        const double u = (eps[k] - 1.0) * moment_scale;
        g.push_back({eps[k - 1] * u, lam[k - 1] * u, tau[k - 1] * u});
    }
    return g;
}

namespace {

Eigen::Vector3d moment_mean(const std::vector<std::array<double, 3>>& g) {
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    for (const auto& row : g) m += Eigen::Vector3d(row[0], row[1], row[2]);
    return m / static_cast<double>(std::max<std::size_t>(g.size(), 1));
}

// Central-difference Jacobian of the mean moment vector in (mu, alpha, beta).
Eigen::Matrix3d moment_jacobian(const EventSeries& s, const ExcitationParams& p, double scale) {
    Eigen::Matrix3d jac;
    const std::array<double, 3> x{p.mu, p.alpha, p.beta};
    for (int j = 0; j < 3; ++j) {
        const double h = 1e-5 * std::max(1.0, std::fabs(x[j]));
        auto up = x;
        auto down = x;
        up[j] += h;
        down[j] -= h;
        const Eigen::Vector3d gu = moment_mean(gmm_moments(s, {up[0], up[1], up[2]}, scale));
        const Eigen::Vector3d gd = moment_mean(gmm_moments(s, {down[0], down[1], down[2]}, scale));
        jac.col(j) = (gu - gd) / (2.0 * h);
    }
    return jac;
}

}  // namespace

Eigen::Matrix3d moment_covariance(const std::vector<std::array<double, 3>>& g) {
    const Eigen::Vector3d mean = moment_mean(g);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& row : g) {
        const Eigen::Vector3d d = Eigen::Vector3d(row[0], row[1], row[2]) - mean;
        cov += d * d.transpose();
    }
    return cov / static_cast<double>(std::max<std::size_t>(g.size(), 2) - 1);
}

double gmm_criterion(const EventSeries& series, const ExcitationParams& p, const Eigen::Matrix3d& weight,
                     double moment_scale) {
    const Eigen::Vector3d gbar = moment_mean(gmm_moments(series, p, moment_scale));
    return gbar.dot(weight * gbar);
}

FitReport gmm_fit(const EventSeries& series, const GmmOptions& opts) {
    series.validate();
    if (series.dimension() != 1) throw std::invalid_argument("GMM estimation expects a univariate series");
    if (series.size() < 10) throw std::invalid_argument("GMM estimation needs more events");
    if (!(opts.spec.moment_scale > 0.0)) throw std::invalid_argument("moment scale must be positive");
    const ModelSpec spec{1, false, ResidualFamily::exponential};
    const double scale = opts.spec.moment_scale;

    ExcitationParams init;
    if (opts.init) {
        init = *opts.init;
    } else {
        const auto x = default_init(series, spec);
        init = {x[0], x[1], x[2]};
    }
    init.validate();

    auto minimize = [&](const ExcitationParams& start, const Eigen::Matrix3d& w) {
        const Objective objective = [&](std::span<const double> y) {
            const auto x = to_natural(spec, y, false);
            const ExcitationParams p{x[0], x[1], x[2]};
            const double v = gmm_criterion(series, p, w, scale);
            return std::isfinite(v) ? v : kInf;
        };
        const std::array<double, 3> x0{start.mu, start.alpha, start.beta};
        return nelder_mead(objective, to_unconstrained(spec, x0, false), opts.optimizer);
    };
    auto params_of = [&](const OptimResult& r) {
        const auto x = to_natural(spec, r.x, false);
        return ExcitationParams{x[0], x[1], x[2]};
    };

    FitReport report;
    report.model = "flex";
    report.estimator = "gmm";
    report.spec = spec;
    report.names = parameter_names(spec);
    report.n_events = series.size();

    const auto stage1 = minimize(init, Eigen::Matrix3d::Identity());
    ExcitationParams est = params_of(stage1);
    GmmDiagnostics diag;
    diag.stage1_estimates = {est.mu, est.alpha, est.beta};
    diag.stage1_objective = stage1.value;
    OptimResult final_result = stage1;

    diag.two_step = opts.spec.weighting == GmmSpec::Weighting::two_step;
    if (diag.two_step) {
        Eigen::Matrix3d omega = moment_covariance(gmm_moments(series, est, scale));
        Eigen::LDLT<Eigen::Matrix3d> ldlt(omega);
        const double rcond = ldlt.rcond();
        if (ldlt.info() != Eigen::Success || !(rcond > 1e-12) || !ldlt.isPositive()) {
            omega += Eigen::Matrix3d::Identity() * (1e-8 * omega.trace() / 3.0);
            diag.ridge_applied = true;
            report.warnings.push_back("moment covariance is near singular; ridge-regularised inverse used");
        }
        diag.weight = omega.inverse();
        final_result = minimize(est, diag.weight);
        est = params_of(final_result);
    }
    report.estimates = {est.mu, est.alpha, est.beta};
    report.objective = final_result.value;
    report.converged = stage1.converged && final_result.converged;
    report.iterations = stage1.iterations + (diag.two_step ? final_result.iterations : 0);
    if (!report.converged) report.warnings.push_back("optimizer did not converge; estimates are best-so-far");
    report.gmm = diag;
    report.residuals = {infer_residuals(series, est, est.mu).residuals};
    if (opts.compute_std_errors) {
        report.std_errors = std_errors(report, series, SeMethod::gmm_sandwich);
    } else {
        report.std_errors.assign(3, kNaN);
    }
    return report;
}

std::vector<double> std_errors(const FitReport& report, const EventSeries& series, SeMethod method) {
    if (method == SeMethod::hessian) {
        if (report.estimator == "gmm") throw std::invalid_argument("Hessian std errors need a likelihood fit");
        bool pd = false;
        return hessian_se_for(report, series, std::nullopt, pd);
    }
    if (report.estimator != "gmm" || !report.gmm) {
        throw std::invalid_argument("sandwich std errors need a GMM fit");
    }
    const ExcitationParams p = report.excitation();
    const double scale = 1.0;
    const auto g = gmm_moments(series, p, scale);
    const Eigen::Matrix3d omega = moment_covariance(g);
    // The stored weight was built at the fit's scale; the sandwich is
    // invariant to that scale, so recompute with unit moments.
    Eigen::Matrix3d w = Eigen::Matrix3d::Identity();
    if (report.gmm->two_step) w = omega.inverse();
    const Eigen::Matrix3d jac = moment_jacobian(series, p, scale);
    const Eigen::Matrix3d bread = (jac.transpose() * w * jac).inverse();
    const Eigen::Matrix3d meat = jac.transpose() * w * omega * w * jac;
    const Eigen::Matrix3d cov = bread * meat * bread / static_cast<double>(g.size());
    std::vector<double> se(3);
    for (int i = 0; i < 3; ++i) se[i] = cov(i, i) > 0.0 ? std::sqrt(cov(i, i)) : kNaN;
    return se;
}

}  // namespace flexhawkes

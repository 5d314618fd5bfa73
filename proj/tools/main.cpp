#include "flexhawkes/baselines.hpp"
#include "flexhawkes/diagnostics.hpp"
#include "flexhawkes/estimate.hpp"
#include "flexhawkes/io.hpp"
#include "flexhawkes/marketdata.hpp"
#include "flexhawkes/multivariate.hpp"
#include "flexhawkes/parallel.hpp"
#include "flexhawkes/univariate.hpp"
#include "flexhawkes/volatility.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

using namespace flexhawkes;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.3.0";

struct Common {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out_dir = ".";
    unsigned threads = 1;
};

struct ResidualArgs {
    std::string family = "exp";
    double shape = 1.0;
    double a = 0.1;
    double ell = 1.0;

    ResidualDistribution law() const {
        switch (parse_family(family)) {
            case ResidualFamily::exponential: return ResidualDistribution::unit_exponential();
            case ResidualFamily::gamma: return ResidualDistribution::unit_mean_gamma(shape);
            case ResidualFamily::trapezoid_exp: return ResidualDistribution::trapezoid_exp(a, ell);
        }
        throw std::logic_error("unknown family");
    }
};

void add_residual_options(CLI::App* cmd, ResidualArgs& r) {
    cmd->add_option("--residual", r.family, "Residual family: exp, gamma or trapezoid");
    cmd->add_option("--shape", r.shape, "Gamma shape (scale is 1/shape)");
    cmd->add_option("--a", r.a, "Trapezoid ramp length");
    cmd->add_option("--ell", r.ell, "Trapezoid exponential rate");
}

std::uint64_t require_seed(const Common& c, const std::string& cmd) {
    if (!c.seed) throw std::invalid_argument(cmd + " is stochastic: pass --seed (or seed=... in the config)");
    return *c.seed;
}

// Flat key=value config. Keys are long option names; a value is only applied
// when the option was not given on the command line.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int n = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++n;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(n) + ": expected key=value");
        }
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_config(CLI::App& app, CLI::App* cmd, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (!opt) opt = app.get_option_no_throw("--" + key);
        if (!opt) {
            // keys meant for other commands may share one config file
            bool known = false;
            for (const CLI::App* other : app.get_subcommands({})) known = known || other->get_option_no_throw("--" + key);
            if (!known) throw std::invalid_argument("unknown config key '" + key + "'");
            continue;
        }
        if (opt->count() > 0) continue;
        if (opt->get_type_size() == 0) {
            opt->add_result(value == "true" || value == "1" ? "true" : "false");
        } else {
            std::string cell;
            std::istringstream ss(value);
            while (std::getline(ss, cell, ',')) opt->add_result(cell);
        }
        opt->run_callback();
    }
}

json resolved_options(const CLI::App& app, const CLI::App* cmd) {
    json out = json::object();
    auto grab = [&](const CLI::App* a) {
        for (const CLI::Option* opt : a->get_options()) {
            const std::string name = opt->get_name(false, true);
            if (name.rfind("--", 0) != 0 || name == "--help" || name == "--version") continue;
            const std::string key = name.substr(2);
            if (opt->count() > 0) {
                const auto& r = opt->results();
                out[key] = r.size() == 1 ? json(r[0]) : json(r);
            } else {
                out[key] = opt->get_default_str();
            }
        }
    };
    grab(&app);
    grab(cmd);
    return out;
}

struct Outputs {
    fs::path dir;
    std::vector<std::string> files;

    fs::path add(const std::string& name) {
        files.push_back(name);
        return dir / name;
    }
};

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// -------- simulate --------

struct SimulateArgs {
    std::string model = "flex";
    ResidualArgs residual;
    double mu = 0.2, alpha = 0.5, beta = 0.8, k = 1.0;
    std::string params;
    std::size_t n = 0;
    double horizon = 0.0;
    std::optional<std::vector<double>> lambda0;
    std::optional<int> initial_type;
};

StoppingRule stopping(std::size_t n, double horizon) {
    if ((n > 0) == (horizon > 0.0)) throw std::invalid_argument("pass exactly one of --n or --horizon");
    return n > 0 ? StoppingRule::count(n) : StoppingRule::until(horizon);
}

json cmd_simulate(const SimulateArgs& a, const Common& c, Outputs& out) {
    const auto seed = require_seed(c, "simulate");
    const auto stop = stopping(a.n, a.horizon);
    json info;
    if (a.model == "gamma-hawkes") {
        GammaKernelParams p{a.mu, a.alpha, a.beta, a.k};
        if (!a.params.empty()) p = io::gamma_kernel_from_json(io::read_json(a.params));
        p.validate();
        auto rng = make_stream(seed, 0);
        ThinningStats stats;
        const auto s = gamma_hawkes_simulate(p, stop, rng, &stats);
        io::write_event_series(out.add("events.csv"), s);
        info = {{"events", s.size()}, {"proposals", stats.proposals}, {"bound_violations", stats.bound_violations}};
        return info;
    }
    if (a.model != "flex" && a.model != "hawkes") {
        throw std::invalid_argument("unknown model '" + a.model + "' (expected hawkes, flex or gamma-hawkes)");
    }
    if (a.model == "hawkes" && parse_family(a.residual.family) != ResidualFamily::exponential) {
        throw std::invalid_argument("--model hawkes implies --residual exp");
    }
    const auto law = a.residual.law();
    law.require_unit_mean();
    MvExcitationParams p = a.params.empty()
                               ? MvExcitationParams::from_univariate({a.mu, a.alpha, a.beta})
                               : io::mv_params_from_json(io::read_json(a.params));
    if (p.dim() == 1) {
        const auto e = p.component(0, 0);
        e.validate();
        const double l0 = a.lambda0 ? a.lambda0->at(0) : e.mu;
        auto rng = make_stream(seed, 0);
        const auto sim = simulate(e, law, l0, stop, rng);
        io::write_event_series(out.add("events.csv"), sim.series);
        io::write_lambda_path(out.add("lambda.csv"), sim.path);
        return {{"events", sim.series.size()}};
    }
    const auto l0 = a.lambda0.value_or(vec(p.mu));
    auto streams = make_type_streams(seed, p.dim());
    MvOptions opts;
    opts.initial_type = a.initial_type;
    const auto sim = simulate_mv(p, std::span(&law, 1), l0, stop, streams, opts);
    io::write_event_series(out.add("events.csv"), sim.series);
    for (int i = 0; i < p.dim(); ++i) {
        io::write_lambda_path(out.add("lambda_" + std::to_string(i) + ".csv"), sim.paths[i]);
    }
    return {{"events", sim.series.size()}};
}

// -------- estimate --------

struct EstimateArgs {
    std::string input;
    std::string estimator = "mle";
    ResidualArgs residual;
    bool symmetric = false;
    int dimension = 0;
    std::optional<std::vector<double>> init;
    std::optional<std::vector<double>> lambda0;
    bool no_se = false;
    std::string reference = "fitted";
    std::size_t bins = 50;
    std::size_t max_iter = 100000;
};

std::vector<double> pooled(const std::vector<std::vector<double>>& r) {
    std::vector<double> all;
    for (const auto& v : r) all.insert(all.end(), v.begin(), v.end());
    return all;
}

json write_diagnostics(const std::vector<std::vector<double>>& residuals, const ResidualDistribution& ref,
                       std::size_t bins, Outputs& out) {
    const auto all = pooled(residuals);
    io::write_column(out.add("residuals.csv"), "epsilon", all);
    if (residuals.size() > 1) {
        for (std::size_t i = 0; i < residuals.size(); ++i) {
            io::write_column(out.add("residuals_" + std::to_string(i) + ".csv"), "epsilon", residuals[i]);
        }
    }
    if (all.empty()) return {{"n", 0}};
    const double hi = *std::max_element(all.begin(), all.end());
    io::write_histogram(out.add("histogram.csv"), histogram(all, bins, 0.0, hi > 0.0 ? hi : 1.0));
    const auto qq = qq_pairs(all, ref);
    io::write_qq(out.add("qq.csv"), qq);
    const auto gap = max_qq_gap(qq, ref);
    const auto ks = ks_test(all, ref);
    return {{"n", all.size()},
            {"reference", ref.name()},
            {"ks_statistic", ks.statistic},
            {"ks_p_value", ks.p_value},
            {"max_qq_gap", gap.quantile},
            {"max_qq_probability_gap", gap.probability}};
}

FitReport run_fit(const EventSeries& s, const EstimateArgs& a) {
    if (a.estimator == "gmm") {
        GmmOptions g;
        g.compute_std_errors = !a.no_se;
        g.optimizer.max_iterations = a.max_iter;
        if (a.init) {
            if (a.init->size() != 3) throw std::invalid_argument("gmm --init takes mu,alpha,beta");
            g.init = ExcitationParams{(*a.init)[0], (*a.init)[1], (*a.init)[2]};
        }
        return gmm_fit(s, g);
    }
    FitOptions o;
    o.spec.family = parse_family(a.residual.family);
    o.spec.symmetric = a.symmetric;
    o.spec.dimension = a.dimension > 0 ? a.dimension : std::max(1, s.dimension());
    o.init = a.init;
    o.lambda0 = a.lambda0;
    o.compute_std_errors = !a.no_se;
    o.optimizer.max_iterations = a.max_iter;
    if (a.estimator == "mle") return mle_fit(s, o);
    if (a.estimator == "qmle") return qmle_exp_fit(s, o);
    throw std::invalid_argument("unknown estimator '" + a.estimator + "' (expected mle, qmle or gmm)");
}

json cmd_estimate(const EstimateArgs& a, Outputs& out) {
    const auto s = io::read_event_series(a.input);
    const auto r = run_fit(s, a);
    auto j = io::to_json(r);
    io::write_json(out.add("fit.json"), j);
    ResidualDistribution ref = ResidualDistribution::unit_exponential();
    if (a.reference == "fitted") {
        ref = r.residual_law();
    } else if (a.reference != "exp") {
        throw std::invalid_argument("--reference must be fitted or exp");
    }
    return {{"fit", j}, {"diagnostics", write_diagnostics(r.residuals, ref, a.bins, out)}};
}

// -------- residuals --------

struct ResidualsArgs {
    std::string input;
    std::string params;
    double mu = 0.0, alpha = 0.0, beta = 0.0;
    ResidualArgs residual;
    std::optional<std::vector<double>> lambda0;
    std::size_t bins = 50;
};

json cmd_residuals(const ResidualsArgs& a, Outputs& out) {
    const auto s = io::read_event_series(a.input);
    MvExcitationParams p = a.params.empty() ? MvExcitationParams::from_univariate({a.mu, a.alpha, a.beta})
                                            : io::mv_params_from_json(io::read_json(a.params));
    p.validate();
    const auto l0 = a.lambda0.value_or(vec(p.mu));
    std::vector<std::vector<double>> res;
    if (p.dim() == 1) {
        p.component(0, 0).validate();
        const auto inf = infer_residuals(s, p.component(0, 0), l0.at(0));
        res.push_back(inf.residuals);
        io::write_lambda_path(out.add("lambda.csv"), inf.path);
    } else {
        res = infer_residuals_mv(s, p, l0);
        const auto paths = lambda_paths_mv(s, p, l0);
        for (int i = 0; i < p.dim(); ++i) {
            io::write_lambda_path(out.add("lambda_" + std::to_string(i) + ".csv"), paths[i]);
        }
    }
    auto diag = write_diagnostics(res, a.residual.law(), a.bins, out);
    io::write_json(out.add("diagnostics.json"), diag);
    return diag;
}

// -------- fhs --------

struct FhsArgs {
    std::string input;
    ResidualArgs residual{"gamma"};
    std::size_t paths = 100;
    double below_quantile = 0.2;
    double above_quantile = 0.98;
    bool write_paths = false;
    bool compare_hawkes = true;
};

std::pair<double, double> mean_tail_fractions(const std::vector<EventSeries>& paths, double lo, double hi) {
    double below = 0.0;
    double above = 0.0;
    for (const auto& p : paths) {
        const auto tau = p.inter_arrivals();
        below += fraction_below(tau, lo);
        above += fraction_above(tau, hi);
    }
    const auto n = static_cast<double>(paths.size());
    return {below / n, above / n};
}

json cmd_fhs(const FhsArgs& a, const Common& c, Outputs& out) {
    const auto seed = require_seed(c, "fhs");
    if (a.paths < 1) throw std::invalid_argument("--paths must be >= 1");
    const auto s = io::read_event_series(a.input);
    if (s.dimension() != 1) throw std::invalid_argument("fhs works on univariate series");
    FitOptions o;
    o.spec.family = parse_family(a.residual.family);
    o.compute_std_errors = false;
    const auto fit = mle_fit(s, o);
    const auto p = fit.excitation();
    FhsOptions f;
    f.n_paths = a.paths;
    f.seed = seed;
    f.threads = c.threads;
    const auto sims = fhs(s, p, p.mu, f);
    if (a.write_paths) {
        for (std::size_t i = 0; i < sims.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "paths/path_%04zu.csv", i);
            io::write_event_series(out.add(name), sims[i]);
        }
    }
    const auto tau = s.inter_arrivals();
    const double lo = empirical_quantile(tau, a.below_quantile);
    const double hi = empirical_quantile(tau, a.above_quantile);
    const auto [fb, fa] = mean_tail_fractions(sims, lo, hi);
    json summary = {{"fit", io::to_json(fit)},
                    {"cutoffs", {{"below", lo}, {"above", hi}}},
                    {"observed", {{"below", fraction_below(tau, lo)}, {"above", fraction_above(tau, hi)}}},
                    {"fhs", {{"below", fb}, {"above", fa}, {"paths", sims.size()}}}};
    if (a.compare_hawkes) {
        const auto q = qmle_exp_fit(s, o);
        const auto qp = q.excitation();
        std::vector<EventSeries> hp(a.paths);
        const auto law = ResidualDistribution::unit_exponential();
        parallel_for(a.paths, c.threads, [&](std::size_t i) {
            auto rng = make_stream(seed, a.paths + i);
            hp[i] = simulate(qp, law, qp.mu, StoppingRule::count(s.size()), rng).series;
        });
        const auto [hb, ha] = mean_tail_fractions(hp, lo, hi);
        summary["hawkes"] = {{"below", hb}, {"above", ha}, {"fit", io::to_json(q)}};
    }
    io::write_json(out.add("summary.json"), summary);
    return {{"fhs", summary["fhs"]}};
}

// -------- sparsify --------

struct PriceInput {
    std::string input;
    std::string quotes;
    double t0 = 0.0;
    double t1 = 0.0;
};

void add_price_input(CLI::App* cmd, PriceInput& p) {
    cmd->add_option("--input", p.input, "Price event CSV (time,price,direction,jump)");
    cmd->add_option("--quotes", p.quotes, "Quote CSV (time_ns,bid,ask)");
    cmd->add_option("--t0", p.t0, "Window start in seconds (quotes only)");
    cmd->add_option("--t1", p.t1, "Window end in seconds (quotes only)");
}

PriceEventSeries load_prices(const PriceInput& p, json& info, Outputs& out) {
    if (p.input.empty() == p.quotes.empty()) throw std::invalid_argument("pass exactly one of --input or --quotes");
    if (!p.input.empty()) return io::read_price_events(p.input);
    const auto r = midprice_events(io::read_quotes(p.quotes), p.t0, p.t1);
    info["quality"] = {{"records", r.quality.records},
                       {"crossed_skipped", r.quality.crossed_skipped},
                       {"duplicates_collapsed", r.quality.duplicates_collapsed},
                       {"outside_window", r.quality.outside_window}};
    io::write_price_events(out.add("midprice.csv"), r.events);
    return r.events;
}

struct SparsifyArgs {
    PriceInput price;
    double dt = 0.0;
};

json cmd_sparsify(const SparsifyArgs& a, Outputs& out) {
    json info;
    const auto e = load_prices(a.price, info, out);
    const auto sparse = sparsify(e, a.dt);
    io::write_price_events(out.add("sparse.csv"), sparse);
    info["events_in"] = e.size();
    info["events_out"] = sparse.size();
    return info;
}

// -------- volatility --------

struct VolatilityArgs {
    PriceInput price;
    std::string params;
    double horizon = 0.0;
    std::optional<std::vector<double>> mark_mean;
    std::optional<std::vector<double>> mark_second;
    std::string interpretation = "centered";
    std::vector<double> dt_grid;
    double origin = 0.0;
    ResidualArgs residual{"gamma"};
    std::size_t paths = 1000;
    bool no_flex = false;
};

std::vector<std::vector<double>> marks_by_type(const EventSeries& s) {
    std::vector<std::vector<double>> m(2);
    for (std::size_t i = 0; i < s.size(); ++i) m[s.types[i]].push_back(s.has_marks() ? s.marks[i] : 1.0);
    return m;
}

double flex_mc_vol(const FitReport& fit, const EventSeries& data, double horizon, std::size_t paths,
                   std::uint64_t seed, std::uint64_t block, unsigned threads) {
    const auto p = fit.mv_excitation();
    const auto law = fit.residual_law();
    const auto start = expected_lambda(p);
    const std::vector<double> l0{std::max(start[0], p.mu[0]), std::max(start[1], p.mu[1])};
    const auto pool = marks_by_type(data);
    std::vector<EventSeries> sims(paths);
    parallel_for(paths, threads, [&](std::size_t i) {
        const std::uint64_t base = (block * paths + i) * 3;
        std::vector<Rng> streams{make_stream(seed, base), make_stream(seed, base + 1)};
        auto mark_rng = make_stream(seed, base + 2);
        auto sim = simulate_mv(p, std::span(&law, 1), l0, StoppingRule::until(horizon), streams).series;
        for (int ty : sim.types) {
            const auto& src = pool[ty];
            std::uniform_int_distribution<std::size_t> pick(0, src.size() - 1);
            sim.marks.push_back(src[pick(mark_rng)]);
        }
        sims[i] = std::move(sim);
    });
    return empirical_vol(sims, horizon);
}

json cmd_volatility(const VolatilityArgs& a, const Common& c, Outputs& out) {
    if (!(a.horizon > 0.0)) throw std::invalid_argument("--horizon must be positive");
    const auto interp = parse_interpretation(a.interpretation);
    if (!a.params.empty()) {
        const auto p = io::mv_params_from_json(io::read_json(a.params));
        if (p.dim() != 2) throw std::invalid_argument("volatility needs a two-type model");
        MarkMoments mm;
        if (a.mark_mean) mm.mean = Eigen::Vector2d(a.mark_mean->at(0), a.mark_mean->at(1));
        if (a.mark_second) mm.second = Eigen::Vector2d(a.mark_second->at(0), a.mark_second->at(1));
        const auto sol = solve_volatility(p, mm, a.horizon, interp);
        const auto j = io::to_json(sol);
        io::write_json(out.add("volatility.json"), j);
        return j;
    }
    if (a.dt_grid.empty()) throw std::invalid_argument("pass --params, or a price input with --dt-grid");
    const auto seed = require_seed(c, "volatility");
    if (!a.no_flex && a.paths < 2) {
        throw std::invalid_argument("--paths must be >= 2: a standard deviation needs at least two paths");
    }
    json info;
    const auto prices = load_prices(a.price, info, out);
    const auto fam = parse_family(a.residual.family);
    std::ofstream sweep;
    {
        const auto path = out.add("sweep.csv");
        sweep.open(path);
        if (!sweep) throw std::runtime_error("cannot write " + path.string());
    }
    sweep << "dt,n_events,mu1,mu2,alpha11,alpha12,beta1,beta2,hvol";
    if (!a.no_flex) sweep << ",flex_mu1,flex_mu2,flex_alpha11,flex_alpha12,flex_beta1,flex_beta2,flex_mc_vol";
    sweep << '\n';
    json rows = json::array();
    for (std::size_t k = 0; k < a.dt_grid.size(); ++k) {
        const double dt = a.dt_grid[k];
        const auto s = sparsify(prices, dt).to_event_series(a.origin);
        FitOptions o;
        o.spec = {2, true, ResidualFamily::exponential};
        o.compute_std_errors = false;
        const auto hawkes = qmle_exp_fit(s, o);
        const auto hp = hawkes.mv_excitation();
        const auto sol = solve_volatility(hp, MarkMoments::from_marks(s), a.horizon, interp);
        char buf[512];
        std::snprintf(buf, sizeof buf, "%.9g,%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", dt, s.size(), hp.mu[0],
                      hp.mu[1], hp.alpha(0, 0), hp.alpha(0, 1), hp.beta[0], hp.beta[1], sol.hvol);
        sweep << buf;
        json row = {{"dt", dt}, {"n_events", s.size()}, {"hvol", sol.hvol}};
        if (!a.no_flex) {
            o.spec.family = fam;
            auto flex = mle_fit(s, o);
            // the QMLE is biased under non-exponential residuals, so it only competes as a start
            o.init = hawkes.estimates;
            if (fam == ResidualFamily::gamma) o.init->push_back(1.0);
            if (fam == ResidualFamily::trapezoid_exp) o.init->insert(o.init->end(), {0.1, 1.0});
            if (auto alt = mle_fit(s, o); *alt.loglik > *flex.loglik) flex = std::move(alt);
            const auto fp = flex.mv_excitation();
            const double mc = flex_mc_vol(flex, s, a.horizon, a.paths, seed, k, c.threads);
            std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", fp.mu[0], fp.mu[1],
                          fp.alpha(0, 0), fp.alpha(0, 1), fp.beta[0], fp.beta[1], mc);
            sweep << buf;
            row["flex_mc_vol"] = mc;
        }
        sweep << '\n';
        rows.push_back(row);
    }
    info["sweep"] = rows;
    io::write_json(out.add("volatility.json"), info);
    return info;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flexible self-exciting point processes: simulation, estimation and diagnostics"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kVersion);

    Common common;
    app.add_option("--seed", common.seed, "Base random seed");
    app.add_option("--config", common.config, "Flat key=value file; command-line flags win");
    app.add_option("--out-dir", common.out_dir, "Directory for all outputs");
    app.add_option("--threads", common.threads, "Worker thread cap")->check(CLI::PositiveNumber);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Simulate an event series");
    c_sim->add_option("--model", sim.model, "hawkes, flex or gamma-hawkes");
    add_residual_options(c_sim, sim.residual);
    c_sim->add_option("--mu", sim.mu);
    c_sim->add_option("--alpha", sim.alpha);
    c_sim->add_option("--beta", sim.beta);
    c_sim->add_option("--k", sim.k, "Gamma-kernel shape (gamma-hawkes)");
    c_sim->add_option("--params", sim.params, "Parameter JSON; overrides --mu/--alpha/--beta");
    c_sim->add_option("--n", sim.n, "Number of events");
    c_sim->add_option("--horizon", sim.horizon, "Time horizon");
    c_sim->add_option("--lambda0", sim.lambda0, "Initial state per type")->delimiter(',');
    c_sim->add_option("--initial-type", sim.initial_type, "Type of the event at the origin");

    EstimateArgs est;
    auto* c_est = app.add_subcommand("estimate", "Fit a model to an event series");
    c_est->add_option("--input", est.input);
    c_est->add_option("--estimator", est.estimator, "mle, qmle or gmm");
    add_residual_options(c_est, est.residual);
    c_est->add_flag("--symmetric", est.symmetric, "Two-type model with alpha11=alpha22, alpha12=alpha21");
    c_est->add_option("--dimension", est.dimension, "Number of types (default: from the data)");
    c_est->add_option("--init", est.init, "Initial parameter vector")->delimiter(',');
    c_est->add_option("--lambda0", est.lambda0)->delimiter(',');
    c_est->add_flag("--no-se", est.no_se, "Skip standard errors");
    c_est->add_option("--reference", est.reference, "Q-Q reference: fitted or exp");
    c_est->add_option("--bins", est.bins);
    c_est->add_option("--max-iter", est.max_iter);

    ResidualsArgs res;
    auto* c_res = app.add_subcommand("residuals", "Infer residuals under given parameters");
    c_res->add_option("--input", res.input);
    c_res->add_option("--params", res.params);
    c_res->add_option("--mu", res.mu);
    c_res->add_option("--alpha", res.alpha);
    c_res->add_option("--beta", res.beta);
    add_residual_options(c_res, res.residual);
    c_res->add_option("--lambda0", res.lambda0)->delimiter(',');
    c_res->add_option("--bins", res.bins);

    FhsArgs fa;
    auto* c_fhs = app.add_subcommand("fhs", "Filtered historical simulation");
    c_fhs->add_option("--input", fa.input);
    add_residual_options(c_fhs, fa.residual);
    c_fhs->add_option("--paths", fa.paths);
    c_fhs->add_option("--below-quantile", fa.below_quantile, "Lower inter-arrival cutoff as a quantile");
    c_fhs->add_option("--above-quantile", fa.above_quantile, "Upper inter-arrival cutoff as a quantile");
    c_fhs->add_flag("--write-paths", fa.write_paths, "Write every simulated path");
    c_fhs->add_flag("!--no-compare", fa.compare_hawkes, "Skip the exponential Hawkes comparison");

    SparsifyArgs sp;
    auto* c_sp = app.add_subcommand("sparsify", "Sparse observation of a price event series");
    add_price_input(c_sp, sp.price);
    c_sp->add_option("--dt", sp.dt);

    VolatilityArgs va;
    auto* c_vol = app.add_subcommand("volatility", "Closed-form Hawkes volatility and dt sweeps");
    add_price_input(c_vol, va.price);
    c_vol->add_option("--params", va.params, "Two-type parameter JSON for a single closed-form solve");
    c_vol->add_option("--horizon", va.horizon, "Volatility horizon in seconds");
    c_vol->add_option("--mark-mean", va.mark_mean)->delimiter(',');
    c_vol->add_option("--mark-second", va.mark_second)->delimiter(',');
    c_vol->add_option("--interpretation", va.interpretation, "centered or literal");
    c_vol->add_option("--dt-grid", va.dt_grid, "Comma-separated observation intervals")->delimiter(',');
    c_vol->add_option("--origin", va.origin, "Time origin subtracted from event times");
    add_residual_options(c_vol, va.residual);
    c_vol->add_option("--paths", va.paths, "Monte Carlo paths per dt");
    c_vol->add_flag("--no-flex", va.no_flex, "Skip the flexible-model fit and Monte Carlo");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    CLI::App* cmd = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    if (!cmd) return app.exit(CLI::CallForHelp());
    try {
        if (!common.config.empty()) apply_config(app, cmd, read_config(common.config));
        // checked here rather than by the parser so that the config file can supply them
        const std::map<std::string, std::vector<std::string>> required = {
            {"estimate", {"--input"}}, {"residuals", {"--input"}}, {"fhs", {"--input"}},
            {"sparsify", {"--dt"}},    {"volatility", {"--horizon"}}};
        if (auto it = required.find(cmd->get_name()); it != required.end()) {
            for (const auto& r : it->second) {
                if (cmd->get_option(r)->count() == 0) throw std::invalid_argument(r + " is required");
            }
        }
        Outputs out{common.out_dir, {}};
        fs::create_directories(out.dir);
        json result;
        const std::string name = cmd->get_name();
        if (name == "simulate") result = cmd_simulate(sim, common, out);
        if (name == "estimate") result = cmd_estimate(est, out);
        if (name == "residuals") result = cmd_residuals(res, out);
        if (name == "fhs") result = cmd_fhs(fa, common, out);
        if (name == "sparsify") result = cmd_sparsify(sp, out);
        if (name == "volatility") result = cmd_volatility(va, common, out);

        json manifest = {{"command", name},
                         {"version", kVersion},
                         {"seed", common.seed ? json(*common.seed) : json(nullptr)},
                         {"config_file", common.config},
                         {"resolved", resolved_options(app, cmd)},
                         {"outputs", out.files},
                         {"result", result}};
        io::write_json(out.dir / "run_manifest.json", manifest);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

#include "flexhawkes/io.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

using namespace flexhawkes;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "flexhawkes_io_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("event series round trip") {
    EventSeries s;
    s.times = {0.125, 1.5, 2.000000000001};
    s.types = {0, 1, 0};
    s.marks = {0.5, 0.25, 2.0};
    const auto p = scratch("events.csv");
    io::write_event_series(p, s);
    const auto r = io::read_event_series(p);
    CHECK(r.times == s.times);
    CHECK(r.types == s.types);
    CHECK(r.marks == s.marks);

    const auto u = EventSeries::univariate({0.3, 0.9});
    io::write_event_series(p, u);
    const auto ru = io::read_event_series(p);
    CHECK(ru.times == u.times);
    CHECK(!ru.has_marks());
}

TEST_CASE("event series with only a time column") {
    const auto p = scratch("times.csv");
    write_text(p, "time\n0.5\n1.25\n");
    const auto s = io::read_event_series(p);
    CHECK(s.times == std::vector<double>{0.5, 1.25});
    CHECK(s.types == std::vector<int>{0, 0});
    write_text(p, "time\n1.0\n0.5\n");
    CHECK_THROWS(io::read_event_series(p));
    write_text(p, "time\n1.0\nabc\n");
    CHECK_THROWS(io::read_event_series(p));
    CHECK_THROWS(io::read_event_series(scratch("missing.csv")));
}

TEST_CASE("columns are exact") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    std::vector<double> v(500);
    for (auto& x : v) x = u(rng);
    v.push_back(std::numeric_limits<double>::min());
    const auto p = scratch("col.csv");
    io::write_column(p, "x", v);
    CHECK(io::read_column(p) == v);
}

TEST_CASE("quotes round trip bit for bit") {
    QuoteSeries q{{1, 1'000'000'001, 1'700'000'000'000'000'000}, {100.01, 100.02, 99.995}, {100.03, 100.04, 100.005}};
    const auto p = scratch("quotes.csv");
    io::write_quotes(p, q);
    const auto r = io::read_quotes(p);
    CHECK(r.time_ns == q.time_ns);
    CHECK(r.bid == q.bid);
    CHECK(r.ask == q.ask);
}

TEST_CASE("price events round trip") {
    const auto e = PriceEventSeries::from_prices(100.0, {0.5, 1.5, 2.0}, {100.5, 100.25, 101.0});
    const auto p = scratch("prices.csv");
    io::write_price_events(p, e);
    const auto r = io::read_price_events(p);
    CHECK(r.times == e.times);
    CHECK(r.prices == e.prices);
    CHECK(r.directions == e.directions);
    CHECK(r.initial_price == doctest::Approx(100.0).epsilon(1e-14));
}

TEST_CASE("parameter JSON") {
    MvExcitationParams p;
    p.mu = Eigen::Vector2d(0.3, 0.4);
    p.alpha.resize(2, 2);
    p.alpha << 0.5, 0.3, 0.2, 0.6;
    p.beta = Eigen::Vector2d(1.5, 1.7);
    const auto q = io::mv_params_from_json(io::to_json(p));
    CHECK(q.mu == p.mu);
    CHECK(q.alpha == p.alpha);
    CHECK(q.beta == p.beta);

    const auto one = io::mv_params_from_json(nlohmann::json{{"mu", 0.2}, {"alpha", 0.5}, {"beta", 0.8}});
    CHECK(one.dim() == 1);
    CHECK(one.alpha(0, 0) == 0.5);
    CHECK_THROWS(io::mv_params_from_json(nlohmann::json{{"mu", 0.2}, {"alpha", 0.9}, {"beta", 0.8}}));

    const GammaKernelParams g{0.1, 0.2, 0.3, 1.5};
    const auto h = io::gamma_kernel_from_json(io::to_json(g));
    CHECK(h.k == 1.5);
    CHECK(h.beta == 0.3);
}

TEST_CASE("fit report JSON") {
    FitReport r;
    r.model = "flex";
    r.estimator = "mle";
    r.names = {"mu", "alpha", "beta"};
    r.estimates = {0.2, 0.5, 0.8};
    r.std_errors = {0.01, std::nan(""), 0.03};
    r.objective = -12.5;
    r.loglik = -12.5;
    r.converged = true;
    r.n_events = 10;
    const auto j = io::to_json(r);
    CHECK(j["estimates"]["alpha"] == 0.5);
    CHECK(j["std_errors"]["alpha"].is_null());
    CHECK(j["std_errors"]["beta"] == 0.03);
    CHECK(j["converged"] == true);
    const auto p = scratch("fit.json");
    io::write_json(p, j);
    CHECK(io::read_json(p) == j);
}

TEST_CASE("plot files") {
    Histogram h{{0.0, 0.5, 1.0}, {3, 4}};
    const auto p = scratch("hist.csv");
    io::write_histogram(p, h);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    CHECK(header == "bin_lo,bin_hi,count");
    std::string row;
    std::getline(in, row);
    CHECK(row.substr(row.rfind(',') + 1) == "3");
}

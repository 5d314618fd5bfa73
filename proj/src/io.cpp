#include "flexhawkes/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace flexhawkes::io {

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return in;
}

std::string general(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

template <class T>
T parse(const std::string& s, const fs::path& path, std::size_t line) {
    T v{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": cannot parse '" + s + "'");
    }
    return v;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    std::size_t column(const std::string& name, const fs::path& path, bool required = true) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        if (required) throw std::runtime_error(path.string() + ": missing column '" + name + "'");
        return header.size();
    }
};

Table read_table(const fs::path& path) {
    auto in = open_in(path);
    Table t;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(n) + ": expected " +
                                     std::to_string(t.header.size()) + " fields");
        }
        t.rows.push_back(std::move(cells));
        t.line_numbers.push_back(n);
    }
    if (t.header.empty()) throw std::runtime_error(path.string() + ": empty file");
    return t;
}

std::vector<double> to_vector(const nlohmann::json& j) {
    if (j.is_number()) return {j.get<double>()};
    return j.get<std::vector<double>>();
}

}  // namespace

void write_event_series(const fs::path& path, const EventSeries& series) {
    auto out = open_out(path);
    const bool marked = series.has_marks();
    out << "time,type,mark\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << general(series.times[i]) << ',' << series.types[i] << ',';
        if (marked) out << general(series.marks[i]);
        out << '\n';
    }
}

EventSeries read_event_series(const fs::path& path) {
    const auto t = read_table(path);
    const auto ct = t.column("time", path);
    const auto cy = t.column("type", path, false);
    const auto cm = t.column("mark", path, false);
    EventSeries s;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const auto ln = t.line_numbers[r];
        s.times.push_back(parse<double>(row[ct], path, ln));
        s.types.push_back(cy < row.size() ? parse<int>(row[cy], path, ln) : 0);
        if (cm < row.size() && !row[cm].empty()) s.marks.push_back(parse<double>(row[cm], path, ln));
    }
    s.validate();
    return s;
}

void write_column(const fs::path& path, const std::string& header, const std::vector<double>& values) {
    auto out = open_out(path);
    out << header << '\n';
    for (double v : values) out << general(v) << '\n';
}

std::vector<double> read_column(const fs::path& path) {
    const auto t = read_table(path);
    if (t.header.size() != 1) throw std::runtime_error(path.string() + ": expected one column");
    std::vector<double> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(parse<double>(t.rows[r][0], path, t.line_numbers[r]));
    return out;
}

void write_lambda_path(const fs::path& path, const LambdaPath& lp) {
    std::vector<double> all{lp.lambda0};
    all.insert(all.end(), lp.values.begin(), lp.values.end());
    write_column(path, "lambda", all);
}

QuoteSeries read_quotes(const fs::path& path) {
    const auto t = read_table(path);
    const auto ct = t.column("time_ns", path);
    const auto cb = t.column("bid", path);
    const auto ca = t.column("ask", path);
    QuoteSeries q;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const auto ln = t.line_numbers[r];
        q.time_ns.push_back(parse<std::int64_t>(row[ct], path, ln));
        q.bid.push_back(parse<double>(row[cb], path, ln));
        q.ask.push_back(parse<double>(row[ca], path, ln));
    }
    return q;
}

void write_quotes(const fs::path& path, const QuoteSeries& q) {
    auto out = open_out(path);
    out << "time_ns,bid,ask\n";
    for (std::size_t i = 0; i < q.size(); ++i) {
        out << q.time_ns[i] << ',' << general(q.bid[i]) << ',' << general(q.ask[i]) << '\n';
    }
}

void write_price_events(const fs::path& path, const PriceEventSeries& e) {
    auto out = open_out(path);
    out << "time,price,direction,jump\n";
    for (std::size_t i = 0; i < e.size(); ++i) {
        out << general(e.times[i]) << ',' << general(e.prices[i]) << ',' << e.directions[i] << ','
            << general(e.jumps[i]) << '\n';
    }
}

PriceEventSeries read_price_events(const fs::path& path) {
    const auto t = read_table(path);
    const auto ct = t.column("time", path);
    const auto cp = t.column("price", path);
    std::vector<double> times;
    std::vector<double> prices;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        times.push_back(parse<double>(t.rows[r][ct], path, t.line_numbers[r]));
        prices.push_back(parse<double>(t.rows[r][cp], path, t.line_numbers[r]));
    }
    if (prices.empty()) return {};
    // the first row's jump recovers the price in force before it
    const auto cd = t.column("direction", path);
    const auto cj = t.column("jump", path);
    const double d0 = parse<double>(t.rows[0][cd], path, t.line_numbers[0]);
    const double j0 = parse<double>(t.rows[0][cj], path, t.line_numbers[0]);
    const double initial = prices[0] - d0 * j0;
    auto e = PriceEventSeries::from_prices(initial, std::move(times), std::move(prices));
    e.validate();
    return e;
}

void write_histogram(const fs::path& path, const Histogram& h) {
    auto out = open_out(path);
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        out << general(h.edges[b]) << ',' << general(h.edges[b + 1]) << ',' << h.counts[b] << '\n';
    }
}

void write_qq(const fs::path& path, const std::vector<QqPoint>& qq) {
    auto out = open_out(path);
    out << "level,theoretical,empirical\n";
    for (const auto& p : qq) {
        out << general(p.level) << ',' << general(p.theoretical) << ',' << general(p.empirical) << '\n';
    }
}

MvExcitationParams mv_params_from_json(const nlohmann::json& j) {
    for (const char* key : {"mu", "alpha", "beta"}) {
        if (!j.contains(key)) throw std::invalid_argument(std::string("parameter file lacks '") + key + "'");
    }
    const auto mu = to_vector(j.at("mu"));
    const auto beta = to_vector(j.at("beta"));
    const auto m = static_cast<Eigen::Index>(mu.size());
    MvExcitationParams p;
    p.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), m);
    p.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    const auto& a = j.at("alpha");
    if (a.is_number()) {
        p.alpha = Eigen::MatrixXd::Constant(1, 1, a.get<double>());
    } else {
        const auto rows = a.get<std::vector<std::vector<double>>>();
        p.alpha.resize(static_cast<Eigen::Index>(rows.size()), m);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (static_cast<Eigen::Index>(rows[i].size()) != m) {
                throw std::invalid_argument("alpha must be a square matrix matching mu");
            }
            for (Eigen::Index k = 0; k < m; ++k) p.alpha(static_cast<Eigen::Index>(i), k) = rows[i][k];
        }
    }
    p.validate();
    return p;
}

nlohmann::json to_json(const MvExcitationParams& p) {
    nlohmann::json j;
    j["mu"] = std::vector<double>(p.mu.data(), p.mu.data() + p.mu.size());
    j["beta"] = std::vector<double>(p.beta.data(), p.beta.data() + p.beta.size());
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.alpha.rows(); ++i) {
        std::vector<double> row;
        for (Eigen::Index k = 0; k < p.alpha.cols(); ++k) row.push_back(p.alpha(i, k));
        rows.push_back(row);
    }
    j["alpha"] = rows;
    return j;
}

GammaKernelParams gamma_kernel_from_json(const nlohmann::json& j) {
    GammaKernelParams p{j.at("mu").get<double>(), j.at("alpha").get<double>(), j.at("beta").get<double>(),
                        j.at("k").get<double>()};
    p.validate();
    return p;
}

nlohmann::json to_json(const GammaKernelParams& p) {
    return {{"mu", p.mu}, {"alpha", p.alpha}, {"beta", p.beta}, {"k", p.k}};
}

nlohmann::json to_json(const FitReport& r) {
    nlohmann::json j;
    j["model"] = r.model;
    j["family"] = to_string(r.spec.family);
    j["estimator"] = r.estimator;
    j["dimension"] = r.spec.dimension;
    j["symmetric"] = r.spec.symmetric;
    auto est = nlohmann::json::object();
    auto se = nlohmann::json::object();
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        est[r.names[i]] = r.estimates[i];
        if (i < r.std_errors.size() && std::isfinite(r.std_errors[i])) {
            se[r.names[i]] = r.std_errors[i];
        } else {
            se[r.names[i]] = nullptr;
        }
    }
    j["estimates"] = est;
    j["std_errors"] = se;
    j["loglik"] = r.loglik ? nlohmann::json(*r.loglik) : nlohmann::json(nullptr);
    j["objective"] = r.objective;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["n_events"] = r.n_events;
    j["warnings"] = r.warnings;
    if (r.gmm) {
        j["gmm"] = {{"two_step", r.gmm->two_step},
                    {"stage1_estimates", r.gmm->stage1_estimates},
                    {"stage1_objective", r.gmm->stage1_objective},
                    {"ridge_applied", r.gmm->ridge_applied}};
    }
    return j;
}

nlohmann::json to_json(const VolatilitySolution& s) {
    auto mat = [](const Eigen::Matrix2d& m) {
        return nlohmann::json::array({{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}});
    };
    return {{"expected_lambda", {s.expected_lambda[0], s.expected_lambda[1]}},
            {"lambda_second", mat(s.lambda_second)},
            {"B", mat(s.B)},
            {"hvol", s.hvol},
            {"horizon", s.horizon},
            {"interpretation", to_string(s.interpretation)}};
}

nlohmann::json read_json(const fs::path& path) {
    auto in = open_in(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace flexhawkes::io

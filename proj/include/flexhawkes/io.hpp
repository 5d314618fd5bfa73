#pragma once

#include "flexhawkes/baselines.hpp"
#include "flexhawkes/diagnostics.hpp"
#include "flexhawkes/estimate.hpp"
#include "flexhawkes/marketdata.hpp"
#include "flexhawkes/multivariate.hpp"
#include "flexhawkes/univariate.hpp"
#include "flexhawkes/volatility.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace flexhawkes::io {

namespace fs = std::filesystem;

/// Header `time,type,mark`; times written in round-trip precision, mark
/// cells left empty for unmarked series.
void write_event_series(const fs::path& path, const EventSeries& series);
EventSeries read_event_series(const fs::path& path);

void write_column(const fs::path& path, const std::string& header, const std::vector<double>& values);
std::vector<double> read_column(const fs::path& path);

void write_lambda_path(const fs::path& path, const LambdaPath& lp);

QuoteSeries read_quotes(const fs::path& path);
void write_quotes(const fs::path& path, const QuoteSeries& q);

void write_price_events(const fs::path& path, const PriceEventSeries& e);
PriceEventSeries read_price_events(const fs::path& path);

void write_histogram(const fs::path& path, const Histogram& h);
void write_qq(const fs::path& path, const std::vector<QqPoint>& qq);

/// {mu:[...], alpha:[[...]], beta:[...]}; scalar entries are read as a
/// one-type model.
MvExcitationParams mv_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MvExcitationParams& p);
GammaKernelParams gamma_kernel_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GammaKernelParams& p);

nlohmann::json to_json(const FitReport& r);
nlohmann::json to_json(const VolatilitySolution& s);

nlohmann::json read_json(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& j);

}  // namespace flexhawkes::io

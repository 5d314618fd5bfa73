#pragma once

#include "flexhawkes/univariate.hpp"

#include <cstdint>
#include <vector>

namespace flexhawkes {

struct QuoteSeries {
    std::vector<std::int64_t> time_ns;
    std::vector<double> bid;
    std::vector<double> ask;

    std::size_t size() const { return time_ns.size(); }
};

/// Mid-price change events. direction is +1/-1 and jump = |price change|.
struct PriceEventSeries {
    std::vector<double> times;
    std::vector<double> prices;
    std::vector<int> directions;
    std::vector<double> jumps;
    /// Price in force before the first event.
    double initial_price = 0.0;

    std::size_t size() const { return times.size(); }
    void validate() const;
    /// Model input: type 0 = up, type 1 = down, mark = jump size.
    EventSeries to_event_series(double origin = 0.0) const;
    /// Rebuilds directions and jumps from consecutive prices.
    static PriceEventSeries from_prices(double initial_price, std::vector<double> times,
                                        std::vector<double> prices);
};

struct QualityReport {
    std::size_t records = 0;
    std::size_t crossed_skipped = 0;
    std::size_t duplicates_collapsed = 0;
    std::size_t outside_window = 0;
};

struct MidpriceResult {
    PriceEventSeries events;
    QualityReport quality;
};

/// Events at each time in (t0, t1) where the mid-price changes. Quotes that
/// share a timestamp collapse to the last one; crossed quotes are skipped.
MidpriceResult midprice_events(const QuoteSeries& quotes, double t0, double t1);

/// Sparse observation on the grid dt, 2dt, ...: at each grid point whose
/// prevailing price differs from the last recorded price, record that price
/// at the time of the last change at or before the grid point.
PriceEventSeries sparsify(const PriceEventSeries& events, double dt);

}  // namespace flexhawkes

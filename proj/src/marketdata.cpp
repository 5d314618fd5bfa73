#include "flexhawkes/marketdata.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

namespace flexhawkes {

void PriceEventSeries::validate() const {
    const auto n = times.size();
    if (prices.size() != n || directions.size() != n || jumps.size() != n) {
        throw std::invalid_argument("price event columns differ in length");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && !(times[i] > times[i - 1])) throw std::invalid_argument("price event times must increase");
        if (!(prices[i] > 0.0)) throw std::invalid_argument("prices must be positive");
    }
}

EventSeries PriceEventSeries::to_event_series(double origin) const {
    EventSeries s;
    s.times.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
        s.times.push_back(times[i] - origin);
        s.types.push_back(directions[i] > 0 ? 0 : 1);
        s.marks.push_back(jumps[i]);
    }
    return s;
}

PriceEventSeries PriceEventSeries::from_prices(double initial_price, std::vector<double> times,
                                               std::vector<double> prices) {
    PriceEventSeries out;
    out.initial_price = initial_price;
    out.times = std::move(times);
    out.prices = std::move(prices);
    double prev = initial_price;
    for (double p : out.prices) {
        const double d = p - prev;
        out.directions.push_back(d > 0.0 ? 1 : -1);
        out.jumps.push_back(std::fabs(d));
        prev = p;
    }
    return out;
}

MidpriceResult midprice_events(const QuoteSeries& q, double t0, double t1) {
    if (q.size() == 0) throw std::invalid_argument("quote series is empty");
    if (q.bid.size() != q.size() || q.ask.size() != q.size()) {
        throw std::invalid_argument("quote columns differ in length");
    }
    if (!(t0 < t1)) throw std::invalid_argument("window start must precede window end");
    MidpriceResult out;
    auto& quality = out.quality;
    quality.records = q.size();

    // collapse same-timestamp records to the last valid one
    std::vector<double> times;
    std::vector<double> mids;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (i > 0 && q.time_ns[i] < q.time_ns[i - 1]) throw std::invalid_argument("quote times must not decrease");
        if (q.ask[i] < q.bid[i] || !(q.bid[i] > 0.0)) {
            ++quality.crossed_skipped;
            continue;
        }
        const double t = static_cast<double>(q.time_ns[i]) * 1e-9;
        const double mid = 0.5 * (q.bid[i] + q.ask[i]);
        if (!times.empty() && times.back() == t) {
            mids.back() = mid;
            ++quality.duplicates_collapsed;
        } else {
            times.push_back(t);
            mids.push_back(mid);
        }
    }

    std::vector<double> ev_times;
    std::vector<double> ev_prices;
    std::optional<double> current;
    std::optional<double> initial;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] <= t0 || times[i] >= t1) {
            ++quality.outside_window;
            // the last quote at or before the window start sets the reference price
            if (times[i] <= t0) current = mids[i];
            continue;
        }
        if (current && mids[i] != *current) {
            if (!initial) initial = *current;
            ev_times.push_back(times[i]);
            ev_prices.push_back(mids[i]);
        }
        current = mids[i];
    }
    if (!initial) initial = current.value_or(0.0);
    out.events = PriceEventSeries::from_prices(*initial, std::move(ev_times), std::move(ev_prices));
    return out;
}

PriceEventSeries sparsify(const PriceEventSeries& events, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("sparsify needs dt > 0");
    events.validate();
    std::vector<double> times;
    std::vector<double> prices;
    if (events.size() == 0) return PriceEventSeries::from_prices(events.initial_price, {}, {});
    double recorded = events.initial_price;
    std::size_t next = 0;               // first event after the current grid point
    const double last = events.times.back();
    for (std::int64_t n = 1;; ++n) {
        const double grid = static_cast<double>(n) * dt;
        while (next < events.size() && events.times[next] <= grid) ++next;
        if (next > 0) {
            const double prevailing = events.prices[next - 1];
            if (prevailing != recorded) {
                // time of the last change at or before the grid point
                times.push_back(events.times[next - 1]);
                prices.push_back(prevailing);
                recorded = prevailing;
            }
        }
        if (grid >= last) break;
    }
    return PriceEventSeries::from_prices(events.initial_price, std::move(times), std::move(prices));
}

}  // namespace flexhawkes

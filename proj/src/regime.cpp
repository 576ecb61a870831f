#include "lppl/regime.hpp"

#include <stdexcept>

namespace lppl {

std::vector<RegimePoint> close_open_fraction(const PriceSeries& series, std::size_t T) {
    if (T == 0) {
        throw std::invalid_argument("close_open_fraction: T must be >= 1");
    }
    std::vector<RegimePoint> out;
    if (series.size() < T) {
        return out;
    }
    std::size_t negatives = 0;
    auto is_down = [&](std::size_t s) { return series[s].close - series[s].open < 0.0 ? 1u : 0u; };
    for (std::size_t t = 0; t < series.size(); ++t) {
        negatives += is_down(t);
        if (t >= T) {
            negatives -= is_down(t - T);
        }
        if (t + 1 >= T) {
            out.push_back({t, series.date(t), static_cast<double>(negatives) / static_cast<double>(T)});
        }
    }
    return out;
}

}  // namespace lppl

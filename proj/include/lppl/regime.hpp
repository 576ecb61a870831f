#pragma once

#include <cstddef>
#include <vector>

#include "lppl/core_model.hpp"

namespace lppl {

struct RegimeConfig {
    std::vector<std::size_t> window_lengths{10, 20, 30};
};

struct RegimePoint {
    std::size_t t = 0;
    Date date;
    double fraction = 0.0;
};

/**
 * @brief Rolling fraction of days that closed below their open.
 *
 * For every ordinal t >= T-1, the share of days s in the trailing window
 * [t-T+1, t] with close(s) - open(s) < 0. Days with close == open count as
 * non-negative. Returns an empty list when the series is shorter than T.
 */
std::vector<RegimePoint> close_open_fraction(const PriceSeries& series, std::size_t T);

}  // namespace lppl

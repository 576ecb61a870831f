#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lppl/calibration.hpp"
#include "lppl/core_model.hpp"

namespace lppl {

/// Windows [t1, t2_fixed] for t1 = t1_first, t1_first + step, ... <= t1_last.
/// Empty when t1_first > t1_last; throws on step == 0 or t1_last >= t2_fixed.
std::vector<WindowSpec> gen_shrinking_windows(std::size_t t1_first, std::size_t t1_last, std::size_t t2_fixed,
                                              std::size_t step);

/// Windows [t1_fixed, t2] for t2 = t2_first, t2_first + step, ... <= t2_last.
std::vector<WindowSpec> gen_expanding_windows(std::size_t t1_fixed, std::size_t t2_first, std::size_t t2_last,
                                              std::size_t step);

struct ScanConfig {
    SearchBounds bounds;
    TabooConfig taboo;
    RefineConfig refine;
    std::size_t n_repeats = 3;
    std::uint64_t seed = 0;
    std::vector<double> quantile_levels{0.05, 0.20, 0.80, 0.95};
    /// 0 = hardware concurrency.
    std::size_t workers = 0;
};

struct TcQuantile {
    double level = 0.0;
    double ordinal = 0.0;
    Date date;
};

/// Empirical tc quantiles; `available` is false when there were no survivors.
struct TcForecast {
    bool available = false;
    std::vector<TcQuantile> quantiles;
};

struct ScanResult {
    std::vector<WindowSpec> windows;
    std::vector<LpplFit> fits;         ///< one per window, same order
    std::vector<std::size_t> survivors;  ///< indices into fits passing the LPPL filter
    std::size_t n_converged = 0;
    double p_lppl = 0.0;               ///< |survivors| / n_converged
    TcForecast forecast;

    std::vector<double> survivor_tcs() const;
};

/// Seed handed to fit_window for a window; depends on the window, not its list position.
std::uint64_t window_seed(std::uint64_t global_seed, const WindowSpec& window);

/**
 * @brief Fits every window and summarises the surviving ensemble.
 *
 * Windows run in parallel; results are identical for any worker count. Only
 * converged fits enter the p_lppl denominator, and only converged fits that pass
 * the filter count as survivors.
 */
ScanResult scan(const PriceSeries& series, std::span<const WindowSpec> windows, const ScanConfig& cfg);

/// Linear interpolation between order statistics (h = (n-1) p).
double empirical_quantile(std::span<const double> values, double level);

/// Quantiles of survivor tc values, mapped to calendar dates through `series`.
TcForecast tc_quantiles(std::span<const double> survivor_tcs, std::span<const double> levels,
                        const PriceSeries& series);

}  // namespace lppl

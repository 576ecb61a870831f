#include "lppl/window_scan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lppl/parallel.hpp"
#include "lppl/seed.hpp"

namespace lppl {

std::vector<WindowSpec> gen_shrinking_windows(std::size_t t1_first, std::size_t t1_last, std::size_t t2_fixed,
                                              std::size_t step) {
    if (step == 0) {
        throw std::invalid_argument("gen_shrinking_windows: step must be >= 1");
    }
    std::vector<WindowSpec> out;
    if (t1_first > t1_last) {
        return out;
    }
    if (t1_last >= t2_fixed) {
        throw std::invalid_argument("gen_shrinking_windows: t1_last must precede t2");
    }
    for (std::size_t t1 = t1_first; t1 <= t1_last; t1 += step) {
        out.push_back({t1, t2_fixed});
    }
    return out;
}

std::vector<WindowSpec> gen_expanding_windows(std::size_t t1_fixed, std::size_t t2_first, std::size_t t2_last,
                                              std::size_t step) {
    if (step == 0) {
        throw std::invalid_argument("gen_expanding_windows: step must be >= 1");
    }
    std::vector<WindowSpec> out;
    if (t2_first > t2_last) {
        return out;
    }
    if (t2_first <= t1_fixed) {
        throw std::invalid_argument("gen_expanding_windows: t2_first must follow t1");
    }
    for (std::size_t t2 = t2_first; t2 <= t2_last; t2 += step) {
        out.push_back({t1_fixed, t2});
    }
    return out;
}

std::vector<double> ScanResult::survivor_tcs() const {
    std::vector<double> out;
    out.reserve(survivors.size());
    for (std::size_t i : survivors) {
        out.push_back(fits[i].params.tc);
    }
    return out;
}

std::uint64_t window_seed(std::uint64_t global_seed, const WindowSpec& window) {
    return derive_seed(global_seed, "fit-window", window.t1, window.t2);
}

ScanResult scan(const PriceSeries& series, std::span<const WindowSpec> windows, const ScanConfig& cfg) {
    if (windows.empty()) {
        throw std::invalid_argument("scan: no windows");
    }
    for (const WindowSpec& w : windows) {
        validate_window(series, w);
    }
    ScanResult result;
    result.windows.assign(windows.begin(), windows.end());
    result.fits.resize(windows.size());
    parallel_for(
        windows.size(),
        [&](std::size_t i) {
            const WindowSpec& w = windows[i];
            TabooConfig taboo = cfg.taboo;
            taboo.seed = window_seed(cfg.seed, w);
            result.fits[i] =
                fit_window(series, w, SearchSpace::for_window(w, cfg.bounds), taboo, cfg.n_repeats, cfg.refine);
        },
        cfg.workers);

    for (std::size_t i = 0; i < result.fits.size(); ++i) {
        const LpplFit& fit = result.fits[i];
        if (!fit.converged()) {
            continue;
        }
        ++result.n_converged;
        if (fit.passes_filter) {
            result.survivors.push_back(i);
        }
    }
    result.p_lppl = result.n_converged == 0
                        ? 0.0
                        : static_cast<double>(result.survivors.size()) / static_cast<double>(result.n_converged);
    const auto tcs = result.survivor_tcs();
    result.forecast = tc_quantiles(tcs, cfg.quantile_levels, series);
    return result;
}

double empirical_quantile(std::span<const double> values, double level) {
    if (values.empty()) {
        throw std::invalid_argument("empirical_quantile: no values");
    }
    if (!(level >= 0.0 && level <= 1.0)) {
        throw std::invalid_argument("empirical_quantile: level must lie in [0, 1]");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

TcForecast tc_quantiles(std::span<const double> survivor_tcs, std::span<const double> levels,
                        const PriceSeries& series) {
    TcForecast out;
    if (survivor_tcs.empty()) {
        return out;
    }
    std::vector<double> sorted_levels(levels.begin(), levels.end());
    std::sort(sorted_levels.begin(), sorted_levels.end());
    out.available = true;
    for (double level : sorted_levels) {
        const double q = empirical_quantile(survivor_tcs, level);
        out.quantiles.push_back({level, q, series.date_of_ordinal(q)});
    }
    return out;
}

}  // namespace lppl

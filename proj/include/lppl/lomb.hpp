#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lppl/core_model.hpp"

namespace lppl {

struct LogTimeSample {
    double u = 0.0;  ///< ln(tc - t)
    double value = 0.0;
};

/// Signal sampled in log-distance to tc; samples keep the original time order,
/// so u is strictly decreasing.
struct LogTimeSignal {
    std::vector<LogTimeSample> samples;
    double tc = 0.0;

    std::size_t size() const { return samples.size(); }
    /// max(u) - min(u).
    double log_span() const;
};

struct FrequencyGridConfig {
    double omega_min = 0.2;
    double omega_max = 40.0;
    /// Grid spacing is 2 pi / (oversampling * span(u)).
    double oversampling = 4.0;
};

struct FrequencyGrid {
    std::vector<double> omegas;
    /// Natural-resolution frequencies covered by the grid (M of the false-alarm formula).
    std::size_t n_independent = 1;
};

FrequencyGrid make_frequency_grid(double log_span, const FrequencyGridConfig& cfg = {});

struct PeriodogramPoint {
    double omega = 0.0;
    double power = 0.0;
};

/**
 * @brief Normalised Lomb periodogram.
 *
 * Mean-subtracted and divided by twice the sample variance, with the per-frequency
 * offset tau that makes the estimate invariant to shifts in u. Throws
 * std::invalid_argument for fewer than 8 samples or zero variance.
 */
std::vector<PeriodogramPoint> lomb_periodogram(const LogTimeSignal& signal, std::span<const double> omegas);

struct LombPeak {
    double omega_lomb = 0.0;
    double power = 0.0;
    double false_alarm = 1.0;
};

/// Highest point of the periodogram over `grid` and its white-noise false-alarm probability.
LombPeak lomb_peak(const LogTimeSignal& signal, const FrequencyGrid& grid);
LombPeak lomb_peak(const LogTimeSignal& signal, const FrequencyGridConfig& cfg = {});

/// 1 - (1 - e^-P)^M, clamped to [0, 1].
double false_alarm_probability(double peak_power, double n_independent);

/// Power whose false-alarm probability equals `fap` (inverse of the above).
double power_threshold(double fap, double n_independent);

/**
 * @brief Block-shuffle Monte Carlo false-alarm probability.
 *
 * Values are cut into consecutive blocks of `block_length`, the blocks are permuted
 * (sample positions stay fixed) and the maximum power is recomputed. Returns the
 * fraction of shuffles whose maximum reaches `observed_power`. Short-range
 * correlation inside a block survives the shuffle.
 */
double monte_carlo_false_alarm(const LogTimeSignal& signal, const FrequencyGrid& grid, double observed_power,
                               std::size_t block_length, std::size_t n_trials, std::uint64_t seed);

/// r(t) = x^-m (ln p(t) - A - B x^m) over the fit's window, x = tc - t.
LogTimeSignal detrended_residuals(const PriceSeries& series, const LpplFit& fit);

struct HqSettings {
    double H = 0.0;
    double q = 0.5;
    double tc = 0.0;
};

/**
 * @brief (H, q)-derivative of f over x = tc - t.
 *
 * D(x) = (f(x) - f(qx)) / ((1 - q) x)^H with f(qx) linearly interpolated in x between
 * bracketing samples. Samples whose qx falls below the observed x range are dropped.
 * Throws std::domain_error if any t >= tc, std::invalid_argument if q is outside
 * (0, 1) or fewer than 8 samples remain.
 */
LogTimeSignal hq_derivative(std::span<const double> t, std::span<const double> f, const HqSettings& settings);

/// Same, with f = ln close over `window`.
LogTimeSignal hq_derivative(const PriceSeries& series, const WindowSpec& window, const HqSettings& settings);

struct HqCell {
    double H = 0.0;
    double q = 0.0;
    std::optional<LombPeak> peak;  ///< empty when the cell's signal was degenerate
    std::string failure;
};

/// {-1, -0.9, ..., 1}.
std::vector<double> default_h_grid();
/// {0.1, 0.2, ..., 0.9}.
std::vector<double> default_q_grid();

/// One Lomb peak per (H, q) cell, ordered H-major. Cells run in parallel.
std::vector<HqCell> hq_grid_scan(const PriceSeries& series, const WindowSpec& window, double tc,
                                 std::span<const double> h_grid, std::span<const double> q_grid,
                                 const FrequencyGridConfig& grid_cfg = {}, std::size_t workers = 0);

enum class HarmonicLabel { fundamental, second_harmonic, spurious_low, other };

std::string_view to_string(HarmonicLabel label);

struct HarmonicPair {
    double omega_fit = 0.0;
    double omega_lomb = 0.0;
    double log_span = 0.0;  ///< span of ln(tc - t) the Lomb frequency came from
};

/**
 * Labels each pair by the relative distance of omega_fit from k * omega_lomb:
 * fundamental for k = 1, second harmonic for k = 2, both within rel_tol. Otherwise
 * spurious-low when omega_lomb covers less than one full period over log_span, else
 * other. rel_tol must lie in (0, 1/3).
 */
std::vector<HarmonicLabel> classify_harmonics(std::span<const HarmonicPair> pairs, double rel_tol);

}  // namespace lppl

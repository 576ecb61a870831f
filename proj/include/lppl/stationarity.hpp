#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lppl/core_model.hpp"
#include "lppl/window_scan.hpp"

namespace lppl {

/// r_{t+1} = a r_t + eps, least squares without intercept.
struct Ar1Fit {
    double a = 0.0;
    double sigma = 0.0;
};

/// Throws std::invalid_argument for fewer than 20 points or constant input.
Ar1Fit fit_ar1(std::span<const double> residuals);

enum class UnitRootTest { dickey_fuller, phillips_perron };

std::string_view to_string(UnitRootTest test);

/// Unit-root decision for one series. The null is a unit root; rejection means stationary.
struct UnitRootResult {
    UnitRootTest test = UnitRootTest::dickey_fuller;
    double statistic = 0.0;
    std::map<double, bool> reject_at;
    std::size_t n = 0;
    /// Deterministic terms in the test regression; always a constant, no trend.
    std::string spec = "constant";
    /// 0 for Dickey-Fuller (no lagged differences); Newey-West bandwidth for Phillips-Perron.
    std::size_t lag_or_bandwidth = 0;
};

/// Significance levels that have critical values.
inline constexpr double kSupportedAlphas[] = {0.10, 0.05, 0.01, 0.001};

/**
 * @brief Lower-tail critical value of the constant-only Dickey-Fuller tau.
 *
 * alpha in {0.10, 0.05, 0.01} comes from MacKinnon's response surface; alpha = 0.001
 * is interpolated (linearly in 1/T) from the simulated table shipped with the
 * library. `n_obs` is the number of observations in the test regression.
 */
double df_critical_value(double alpha, std::size_t n_obs);

/// MacKinnon (2010) response surface, constant / no trend, one variable.
double mackinnon_critical_value(double alpha, std::size_t n_obs);

/// One row of the simulated tau quantile table.
struct SimulatedQuantiles {
    std::size_t n_obs;
    double q001;
    double q01;
    double q05;
    double q10;
};

std::span<const SimulatedQuantiles> simulated_tau_quantiles();
/// Replications per row of the simulated table and the seed that produced it.
std::size_t simulated_table_replications();
std::uint64_t simulated_table_seed();

/// t-ratio of gamma in dr_t = c + gamma r_{t-1} + e_t; n_obs = residuals.size() - 1.
double dickey_fuller_statistic(std::span<const double> residuals);

/// floor(4 (n/100)^(2/9)).
std::size_t newey_west_bandwidth(std::size_t n);

UnitRootResult dickey_fuller(std::span<const double> residuals,
                             std::span<const double> alphas = std::span<const double>());
UnitRootResult phillips_perron(std::span<const double> residuals,
                               std::span<const double> alphas = std::span<const double>());

/// Unit-root decisions for one window's residuals.
struct WindowStationarity {
    std::size_t fit_index = 0;
    bool survivor = false;
    UnitRootResult dickey_fuller;
    UnitRootResult phillips_perron;

    /// Both tests reject at alpha.
    bool stationary_at(double alpha) const;
};

/// Rejection percentages for one significance level.
struct RejectionRates {
    double dickey_fuller_pct = 0.0;
    double phillips_perron_pct = 0.0;
};

/**
 * @brief One row of the stationarity table.
 *
 * Marginal rates are over every analysed (converged) window. The conditional
 * rate p_stationary_given_lppl counts filter survivors whose residuals are
 * rejected by both tests.
 */
struct StationarityRow {
    std::string index;
    std::string range;
    std::size_t n_windows = 0;
    std::size_t n_analyzed = 0;
    std::size_t n_survivors = 0;
    double p_lppl = 0.0;
    std::map<double, RejectionRates> marginal;
    std::map<double, RejectionRates> given_lppl;
    std::map<double, double> p_stationary_given_lppl_pct;
    std::vector<WindowStationarity> windows;
};

struct StationarityTable {
    std::vector<double> alphas;
    std::vector<StationarityRow> rows;
};

/// Default table levels: 0.01 and 0.001.
std::vector<double> default_alphas();

/// Row from explicit residual sets; `survivor[i]` marks windows passing the filter.
StationarityRow summarize_unit_roots(std::span<const std::vector<double>> residual_sets,
                                     const std::vector<bool>& survivor, std::span<const double> alphas);

struct StationarityInput {
    std::string index;
    std::string range;
    const PriceSeries* series = nullptr;
    const ScanResult* scan = nullptr;
};

/// Tests the residuals (ln p - model) of every converged fit of every scan.
StationarityTable stationarity_table(std::span<const StationarityInput> inputs,
                                     std::span<const double> alphas = std::span<const double>());

}  // namespace lppl

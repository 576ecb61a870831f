#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lppl {

using Date = std::chrono::year_month_day;

/// Parses `YYYY-MM-DD`. A day past the end of its month ("2009-04-31") is
/// clamped to the last day of that month; any other malformed input throws
/// std::invalid_argument.
Date parse_date(std::string_view text);

std::string format_date(const Date& date);

/// One daily OHLC observation.
struct Bar {
    Date date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;

    friend bool operator==(const Bar&, const Bar&) = default;
};

/**
 * @brief Dated OHLC observations on a trading calendar.
 *
 * The analysis time axis is the trading-day ordinal of each bar (0, 1, 2, ...),
 * not calendar days. Dates are strictly increasing and all prices are positive.
 */
class PriceSeries {
public:
    PriceSeries() = default;
    explicit PriceSeries(std::vector<Bar> bars);

    std::size_t size() const { return bars_.size(); }
    bool empty() const { return bars_.empty(); }
    const Bar& operator[](std::size_t i) const { return bars_[i]; }
    std::span<const Bar> bars() const { return bars_; }

    /// ln(close) at ordinal i.
    double log_close(std::size_t i) const { return log_close_[i]; }
    std::span<const double> log_closes() const { return log_close_; }

    const Date& date(std::size_t i) const { return bars_[i].date; }

    /// Ordinal of the last trading day on or before `date`, if any.
    std::optional<std::size_t> index_on_or_before(const Date& date) const;

    /// Calendar date of a real-valued ordinal. Fractional days round up; ordinals
    /// beyond the last bar are extrapolated on a Monday-Friday calendar.
    Date date_of_ordinal(double ordinal) const;

    friend bool operator==(const PriceSeries& a, const PriceSeries& b) { return a.bars_ == b.bars_; }

private:
    std::vector<Bar> bars_;
    std::vector<double> log_close_;
};

/// Inclusive interval [t1, t2] of trading-day ordinals.
struct WindowSpec {
    std::size_t t1 = 0;
    std::size_t t2 = 0;

    std::size_t n_points() const { return t2 - t1 + 1; }
    friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// Checks t1 < t2 < series.size(); throws std::invalid_argument otherwise.
void validate_window(const PriceSeries& series, const WindowSpec& window);

/// Nonlinear part of an LPPL parameter set.
struct NonlinearParams {
    double tc = 0.0;
    double m = 0.0;
    double omega = 0.0;
    double phi = 0.0;

    friend bool operator==(const NonlinearParams&, const NonlinearParams&) = default;
};

struct LinearParams {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
};

/**
 * @brief Full LPPL parameter set.
 *
 * ln p(t) = A + B x^m + C x^m cos(omega ln x + phi), with x = tc - t.
 */
struct LpplParams {
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double m = 0.0;
    double omega = 0.0;
    double phi = 0.0;
    double tc = 0.0;

    NonlinearParams nonlinear() const { return {tc, m, omega, phi}; }
    static LpplParams combine(const LinearParams& lin, const NonlinearParams& nl);

    /// Maps omega < 0 onto omega > 0 (flipping phi) and wraps phi into [0, 2pi).
    LpplParams normalized() const;

    friend bool operator==(const LpplParams&, const LpplParams&) = default;
};

double wrap_phase(double phi);

enum class FitStatus {
    converged,     ///< refinement met its tolerance
    not_converged, ///< iteration cap hit; best-so-far parameters kept
    unfittable,    ///< every attempt failed (singular systems, tc drift)
};

std::string_view to_string(FitStatus status);

/// One calibrated parameter set for one window.
struct LpplFit {
    LpplParams params;
    WindowSpec window;
    double sse = 0.0;
    std::size_t n_points = 0;
    std::uint64_t rng_seed = 0;
    bool passes_filter = false;
    FitStatus status = FitStatus::unfittable;
    std::size_t iterations = 0;
    std::string failure_reason;

    bool converged() const { return status == FitStatus::converged; }
};

/// Model log-price at ordinal t. Throws std::domain_error if t >= tc.
double lppl_log_price(const LpplParams& params, double t);

struct Residual {
    std::size_t t = 0;
    double value = 0.0;
};

/// ln p(t) - model(t) for every ordinal of the window, in time order.
std::vector<Residual> residuals(const PriceSeries& series, const LpplParams& params,
                                const WindowSpec& window);

/// Sum of squared residuals over the window.
double sse(const PriceSeries& series, const LpplParams& params, const WindowSpec& window);

}  // namespace lppl

#include "lppl/core_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lppl {

namespace chr = std::chrono;

Date parse_date(std::string_view text) {
    auto fail = [&] { return std::invalid_argument("invalid date '" + std::string(text) + "', expected YYYY-MM-DD"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw fail();
    }
    auto number = [&](std::size_t pos, std::size_t len) {
        int value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
        if (ec != std::errc{} || ptr != text.data() + pos + len) {
            throw fail();
        }
        return value;
    };
    const int y = number(0, 4);
    const int m = number(5, 2);
    const int d = number(8, 2);
    if (m < 1 || m > 12 || d < 1 || d > 31) {
        throw fail();
    }
    const chr::year_month ym{chr::year{y}, chr::month{static_cast<unsigned>(m)}};
    const chr::year_month_day_last last{ym.year(), chr::month_day_last{ym.month()}};
    const auto day = std::min(static_cast<unsigned>(d), static_cast<unsigned>(last.day()));
    return Date{ym.year(), ym.month(), chr::day{day}};
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

PriceSeries::PriceSeries(std::vector<Bar> bars) : bars_(std::move(bars)) {
    log_close_.reserve(bars_.size());
    for (std::size_t i = 0; i < bars_.size(); ++i) {
        const Bar& b = bars_[i];
        if (!b.date.ok()) {
            throw std::invalid_argument("bar " + std::to_string(i) + ": invalid date");
        }
        if (i > 0 && !(bars_[i - 1].date < b.date)) {
            throw std::invalid_argument("bar " + std::to_string(i) + ": dates must be strictly increasing (" +
                                        format_date(b.date) + ")");
        }
        for (double p : {b.open, b.high, b.low, b.close}) {
            if (!(p > 0.0) || !std::isfinite(p)) {
                throw std::invalid_argument("bar " + std::to_string(i) + " (" + format_date(b.date) +
                                            "): prices must be finite and > 0");
            }
        }
        log_close_.push_back(std::log(b.close));
    }
}

std::optional<std::size_t> PriceSeries::index_on_or_before(const Date& date) const {
    auto it = std::upper_bound(bars_.begin(), bars_.end(), date,
                               [](const Date& d, const Bar& b) { return d < b.date; });
    if (it == bars_.begin()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(std::distance(bars_.begin(), it) - 1);
}

Date PriceSeries::date_of_ordinal(double ordinal) const {
    if (bars_.empty()) {
        throw std::logic_error("date_of_ordinal on empty series");
    }
    if (!std::isfinite(ordinal)) {
        throw std::domain_error("date_of_ordinal: non-finite ordinal");
    }
    const double up = std::ceil(ordinal);
    if (up <= 0.0) {
        return bars_.front().date;
    }
    const double last = static_cast<double>(bars_.size() - 1);
    if (up <= last) {
        return bars_[static_cast<std::size_t>(up)].date;
    }
    auto remaining = static_cast<long long>(up - last);
    chr::sys_days day{bars_.back().date};
    while (remaining > 0) {
        day += chr::days{1};
        const chr::weekday wd{day};
        if (wd != chr::Saturday && wd != chr::Sunday) {
            --remaining;
        }
    }
    return Date{day};
}

void validate_window(const PriceSeries& series, const WindowSpec& window) {
    if (!(window.t1 < window.t2) || window.t2 >= series.size()) {
        throw std::invalid_argument("invalid window [" + std::to_string(window.t1) + ", " +
                                    std::to_string(window.t2) + "] for series of length " +
                                    std::to_string(series.size()));
    }
}

double wrap_phase(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(phi, two_pi);
    if (w < 0.0) {
        w += two_pi;
    }
    // fmod of a value just below a multiple of 2pi can round up to 2pi after the shift
    return w >= two_pi ? 0.0 : w;
}

LpplParams LpplParams::combine(const LinearParams& lin, const NonlinearParams& nl) {
    return {lin.A, lin.B, lin.C, nl.m, nl.omega, nl.phi, nl.tc};
}

LpplParams LpplParams::normalized() const {
    LpplParams p = *this;
    if (p.omega < 0.0) {
        p.omega = -p.omega;
        p.phi = -p.phi;
    }
    p.phi = wrap_phase(p.phi);
    return p;
}

std::string_view to_string(FitStatus status) {
    switch (status) {
        case FitStatus::converged: return "converged";
        case FitStatus::not_converged: return "not_converged";
        case FitStatus::unfittable: return "unfittable";
    }
    return "unknown";
}

double lppl_log_price(const LpplParams& p, double t) {
    const double x = p.tc - t;
    if (!(x > 0.0)) {
        throw std::domain_error("lppl_log_price: t must be strictly before tc");
    }
    const double lx = std::log(x);
    const double xm = std::exp(p.m * lx);
    return p.A + p.B * xm + p.C * xm * std::cos(p.omega * lx + p.phi);
}

std::vector<Residual> residuals(const PriceSeries& series, const LpplParams& params,
                                const WindowSpec& window) {
    validate_window(series, window);
    if (!(params.tc > static_cast<double>(window.t2))) {
        throw std::domain_error("residuals: tc must lie after the window end");
    }
    std::vector<Residual> out;
    out.reserve(window.n_points());
    for (std::size_t t = window.t1; t <= window.t2; ++t) {
        out.push_back({t, series.log_close(t) - lppl_log_price(params, static_cast<double>(t))});
    }
    return out;
}

double sse(const PriceSeries& series, const LpplParams& params, const WindowSpec& window) {
    double total = 0.0;
    for (const Residual& r : residuals(series, params, window)) {
        total += r.value * r.value;
    }
    return total;
}

}  // namespace lppl

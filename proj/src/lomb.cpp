#include "lppl/lomb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "lppl/parallel.hpp"

namespace lppl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kMinSamples = 8;

struct Centered {
    std::vector<double> u;
    std::vector<double> h;  // mean removed
    double variance = 0.0;
};

Centered center(const LogTimeSignal& signal) {
    const std::size_t n = signal.size();
    if (n < kMinSamples) {
        throw std::invalid_argument("lomb: need at least 8 samples");
    }
    Centered c;
    c.u.reserve(n);
    c.h.reserve(n);
    double mean = 0.0;
    for (const auto& s : signal.samples) {
        if (!std::isfinite(s.u) || !std::isfinite(s.value)) {
            throw std::invalid_argument("lomb: non-finite sample");
        }
        mean += s.value;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& s : signal.samples) {
        c.u.push_back(s.u);
        c.h.push_back(s.value - mean);
        ss += (s.value - mean) * (s.value - mean);
    }
    c.variance = ss / static_cast<double>(n - 1);
    // Rounding noise of an exactly cancelled signal counts as zero variance.
    if (!(c.variance > 0.0) || std::sqrt(c.variance) <= 1e-12 * std::max(1.0, std::abs(mean))) {
        throw std::invalid_argument("lomb: signal has zero variance");
    }
    return c;
}

double power_at(const std::vector<double>& u, const std::vector<double>& h, double variance, double omega) {
    double s2 = 0.0;
    double c2 = 0.0;
    for (double ui : u) {
        s2 += std::sin(2.0 * omega * ui);
        c2 += std::cos(2.0 * omega * ui);
    }
    const double tau = std::atan2(s2, c2) / (2.0 * omega);
    double yc = 0.0, ys = 0.0, cc = 0.0, ss = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double arg = omega * (u[j] - tau);
        const double c = std::cos(arg);
        const double s = std::sin(arg);
        yc += h[j] * c;
        ys += h[j] * s;
        cc += c * c;
        ss += s * s;
    }
    const double n = static_cast<double>(u.size());
    double p = 0.0;
    if (cc > 1e-12 * n) {
        p += yc * yc / cc;
    }
    if (ss > 1e-12 * n) {
        p += ys * ys / ss;
    }
    return p / (2.0 * variance);
}

double max_power(const std::vector<double>& u, const std::vector<double>& h, double variance,
                 std::span<const double> omegas) {
    double best = 0.0;
    for (double w : omegas) {
        best = std::max(best, power_at(u, h, variance, w));
    }
    return best;
}

}  // namespace

double LogTimeSignal::log_span() const {
    if (samples.empty()) {
        return 0.0;
    }
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                              [](const auto& a, const auto& b) { return a.u < b.u; });
    return hi->u - lo->u;
}

FrequencyGrid make_frequency_grid(double log_span, const FrequencyGridConfig& cfg) {
    if (!(log_span > 0.0) || !(cfg.omega_min > 0.0) || !(cfg.omega_max > cfg.omega_min) ||
        !(cfg.oversampling >= 1.0)) {
        throw std::invalid_argument("make_frequency_grid: invalid span or grid settings");
    }
    const double natural = kTwoPi / log_span;
    const double step = natural / cfg.oversampling;
    FrequencyGrid grid;
    const auto count = static_cast<std::size_t>(std::floor((cfg.omega_max - cfg.omega_min) / step + 1e-9)) + 1;
    grid.omegas.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        grid.omegas.push_back(cfg.omega_min + static_cast<double>(k) * step);
    }
    grid.n_independent =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor((cfg.omega_max - cfg.omega_min) / natural)));
    return grid;
}

std::vector<PeriodogramPoint> lomb_periodogram(const LogTimeSignal& signal, std::span<const double> omegas) {
    const Centered c = center(signal);
    std::vector<PeriodogramPoint> out;
    out.reserve(omegas.size());
    for (double w : omegas) {
        if (!(w > 0.0)) {
            throw std::invalid_argument("lomb_periodogram: frequencies must be positive");
        }
        out.push_back({w, power_at(c.u, c.h, c.variance, w)});
    }
    return out;
}

LombPeak lomb_peak(const LogTimeSignal& signal, const FrequencyGrid& grid) {
    const auto pgram = lomb_periodogram(signal, grid.omegas);
    if (pgram.empty()) {
        throw std::invalid_argument("lomb_peak: empty frequency grid");
    }
    const auto best = std::max_element(pgram.begin(), pgram.end(),
                                       [](const auto& a, const auto& b) { return a.power < b.power; });
    return {best->omega, best->power,
            false_alarm_probability(best->power, static_cast<double>(grid.n_independent))};
}

LombPeak lomb_peak(const LogTimeSignal& signal, const FrequencyGridConfig& cfg) {
    return lomb_peak(signal, make_frequency_grid(signal.log_span(), cfg));
}

double false_alarm_probability(double peak_power, double n_independent) {
    if (!(peak_power >= 0.0) || !(n_independent >= 1.0)) {
        throw std::invalid_argument("false_alarm_probability: need P >= 0 and M >= 1");
    }
    const double fap = -std::expm1(n_independent * std::log1p(-std::exp(-peak_power)));
    return std::clamp(fap, 0.0, 1.0);
}

double power_threshold(double fap, double n_independent) {
    if (!(fap > 0.0 && fap < 1.0) || !(n_independent >= 1.0)) {
        throw std::invalid_argument("power_threshold: need 0 < fap < 1 and M >= 1");
    }
    return -std::log(-std::expm1(std::log1p(-fap) / n_independent));
}

double monte_carlo_false_alarm(const LogTimeSignal& signal, const FrequencyGrid& grid, double observed_power,
                               std::size_t block_length, std::size_t n_trials, std::uint64_t seed) {
    if (block_length == 0 || n_trials == 0) {
        throw std::invalid_argument("monte_carlo_false_alarm: block_length and n_trials must be >= 1");
    }
    const Centered c = center(signal);
    const std::size_t n = c.h.size();
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s < n; s += block_length) {
        starts.push_back(s);
    }
    std::mt19937_64 rng(seed);
    std::vector<double> shuffled(n);
    std::size_t hits = 0;
    for (std::size_t trial = 0; trial < n_trials; ++trial) {
        std::shuffle(starts.begin(), starts.end(), rng);
        std::size_t pos = 0;
        for (std::size_t s : starts) {
            for (std::size_t k = s; k < std::min(n, s + block_length); ++k) {
                shuffled[pos++] = c.h[k];
            }
        }
        if (max_power(c.u, shuffled, c.variance, grid.omegas) >= observed_power) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(n_trials);
}

LogTimeSignal detrended_residuals(const PriceSeries& series, const LpplFit& fit) {
    validate_window(series, fit.window);
    const LpplParams& p = fit.params;
    LogTimeSignal out;
    out.tc = p.tc;
    out.samples.reserve(fit.window.n_points());
    for (std::size_t t = fit.window.t1; t <= fit.window.t2; ++t) {
        const double x = p.tc - static_cast<double>(t);
        if (!(x > 0.0)) {
            throw std::domain_error("detrended_residuals: sample at or after tc");
        }
        const double xm = std::pow(x, p.m);
        out.samples.push_back({std::log(x), (series.log_close(t) - p.A - p.B * xm) / xm});
    }
    return out;
}

LogTimeSignal hq_derivative(std::span<const double> t, std::span<const double> f, const HqSettings& settings) {
    if (t.size() != f.size()) {
        throw std::invalid_argument("hq_derivative: t and f differ in length");
    }
    if (!(settings.q > 0.0 && settings.q < 1.0)) {
        throw std::invalid_argument("hq_derivative: q must lie in (0, 1)");
    }
    const std::size_t n = t.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = settings.tc - t[i];
        if (!(x[i] > 0.0)) {
            throw std::domain_error("hq_derivative: sample at or after tc");
        }
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> xs(n), fs(n);
    for (std::size_t k = 0; k < n; ++k) {
        xs[k] = x[order[k]];
        fs[k] = f[order[k]];
    }

    LogTimeSignal out;
    out.tc = settings.tc;
    for (std::size_t i = 0; i < n; ++i) {
        const double qx = settings.q * x[i];
        if (qx < xs.front()) {
            continue;
        }
        auto hi = std::lower_bound(xs.begin(), xs.end(), qx);
        double fq;
        if (*hi == qx) {
            fq = fs[static_cast<std::size_t>(hi - xs.begin())];
        } else {
            const auto j = static_cast<std::size_t>(hi - xs.begin());
            const double w = (qx - xs[j - 1]) / (xs[j] - xs[j - 1]);
            fq = fs[j - 1] + w * (fs[j] - fs[j - 1]);
        }
        const double denom = std::pow((1.0 - settings.q) * x[i], settings.H);
        out.samples.push_back({std::log(x[i]), (f[i] - fq) / denom});
    }
    if (out.samples.size() < kMinSamples) {
        throw std::invalid_argument("hq_derivative: fewer than 8 samples have qx inside the data range");
    }
    return out;
}

LogTimeSignal hq_derivative(const PriceSeries& series, const WindowSpec& window, const HqSettings& settings) {
    validate_window(series, window);
    std::vector<double> t, f;
    for (std::size_t i = window.t1; i <= window.t2; ++i) {
        t.push_back(static_cast<double>(i));
        f.push_back(series.log_close(i));
    }
    return hq_derivative(t, f, settings);
}

std::vector<double> default_h_grid() {
    std::vector<double> out;
    for (int k = -10; k <= 10; ++k) {
        out.push_back(k / 10.0);
    }
    return out;
}

std::vector<double> default_q_grid() {
    std::vector<double> out;
    for (int k = 1; k <= 9; ++k) {
        out.push_back(k / 10.0);
    }
    return out;
}

std::vector<HqCell> hq_grid_scan(const PriceSeries& series, const WindowSpec& window, double tc,
                                 std::span<const double> h_grid, std::span<const double> q_grid,
                                 const FrequencyGridConfig& grid_cfg, std::size_t workers) {
    validate_window(series, window);
    std::vector<HqCell> cells;
    for (double h : h_grid) {
        for (double q : q_grid) {
            cells.push_back({h, q, std::nullopt, {}});
        }
    }
    parallel_for(
        cells.size(),
        [&](std::size_t i) {
            HqCell& cell = cells[i];
            try {
                const auto signal = hq_derivative(series, window, {cell.H, cell.q, tc});
                cell.peak = lomb_peak(signal, grid_cfg);
            } catch (const std::invalid_argument& e) {
                cell.failure = e.what();
            }
        },
        workers);
    return cells;
}

std::string_view to_string(HarmonicLabel label) {
    switch (label) {
        case HarmonicLabel::fundamental: return "fundamental";
        case HarmonicLabel::second_harmonic: return "second-harmonic";
        case HarmonicLabel::spurious_low: return "spurious-low";
        case HarmonicLabel::other: return "other";
    }
    return "other";
}

std::vector<HarmonicLabel> classify_harmonics(std::span<const HarmonicPair> pairs, double rel_tol) {
    // Bands around y = x and y = 2x stay disjoint while 1 + tol < 2 (1 - tol).
    if (!(rel_tol > 0.0 && rel_tol < 1.0 / 3.0)) {
        throw std::invalid_argument("classify_harmonics: rel_tol must lie in (0, 1/3)");
    }
    std::vector<HarmonicLabel> out;
    out.reserve(pairs.size());
    for (const HarmonicPair& p : pairs) {
        const double ratio = p.omega_lomb > 0.0 ? p.omega_fit / p.omega_lomb : std::numeric_limits<double>::infinity();
        if (std::abs(ratio - 1.0) <= rel_tol) {
            out.push_back(HarmonicLabel::fundamental);
        } else if (std::abs(ratio / 2.0 - 1.0) <= rel_tol) {
            out.push_back(HarmonicLabel::second_harmonic);
        } else if (p.omega_lomb * p.log_span / kTwoPi < 1.0) {
            out.push_back(HarmonicLabel::spurious_low);
        } else {
            out.push_back(HarmonicLabel::other);
        }
    }
    return out;
}

}  // namespace lppl

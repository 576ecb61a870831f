#include "lppl/stationarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lppl {

namespace {

#include "df_critical_values.inc"

constexpr std::size_t kMinPoints = 20;

// MacKinnon (2010), tau_c for one variable: beta_inf + b1/T + b2/T^2 + b3/T^3.
struct ResponseSurface {
    double alpha;
    double b_inf, b1, b2, b3;
};
constexpr ResponseSurface kMacKinnon[] = {
    {0.01, -3.43035, -6.5393, -16.786, -79.433},
    {0.05, -2.86154, -2.8903, -4.234, -40.040},
    {0.10, -2.56677, -1.5384, -2.809, 0.0},
};

bool same_alpha(double a, double b) { return std::abs(a - b) <= 1e-12; }

std::vector<double> resolve_alphas(std::span<const double> alphas) {
    std::vector<double> out = alphas.empty() ? default_alphas() : std::vector<double>(alphas.begin(), alphas.end());
    for (double a : out) {
        if (std::none_of(std::begin(kSupportedAlphas), std::end(kSupportedAlphas),
                         [&](double s) { return same_alpha(a, s); })) {
            throw std::invalid_argument("unit-root test: no critical value for alpha = " + std::to_string(a));
        }
    }
    return out;
}

void require_usable(std::span<const double> r, const char* who) {
    if (r.size() < kMinPoints) {
        throw std::invalid_argument(std::string(who) + ": need at least 20 points");
    }
    for (double v : r) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(who) + ": non-finite input");
        }
    }
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    if (*hi - *lo <= 1e-14 * std::max(1.0, std::max(std::abs(*lo), std::abs(*hi)))) {
        throw std::invalid_argument(std::string(who) + ": constant series");
    }
}

/// OLS of dr_t on (1, r_{t-1}).
struct DfRegression {
    std::size_t n_obs = 0;
    double gamma = 0.0;
    double se = 0.0;
    double s2 = 0.0;            // SSR / (T - 2)
    std::vector<double> resid;  // e_t
};

DfRegression df_regression(std::span<const double> r) {
    DfRegression reg;
    const std::size_t T = r.size() - 1;
    reg.n_obs = T;
    double mx = 0.0, md = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        mx += r[t - 1];
        md += r[t] - r[t - 1];
    }
    mx /= static_cast<double>(T);
    md /= static_cast<double>(T);
    double sxx = 0.0, sxd = 0.0, sdd = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        const double x = r[t - 1] - mx;
        const double d = (r[t] - r[t - 1]) - md;
        sxx += x * x;
        sxd += x * d;
        sdd += d * d;
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("unit-root test: lagged level has zero variance");
    }
    reg.gamma = sxd / sxx;
    const double intercept = md - reg.gamma * mx;
    reg.resid.resize(T);
    double ssr = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        const double e = (r[t] - r[t - 1]) - intercept - reg.gamma * r[t - 1];
        reg.resid[t - 1] = e;
        ssr += e * e;
    }
    // An exact fit (e.g. perfect alternation) would give se = 0; keep the ratio finite.
    ssr = std::max(ssr, 1e-30 * std::max(sdd, 1e-300));
    reg.s2 = ssr / static_cast<double>(T - 2);
    reg.se = std::sqrt(reg.s2 / sxx);
    return reg;
}

UnitRootResult decide(UnitRootTest test, double statistic, std::size_t n_obs, std::size_t lag,
                      std::span<const double> alphas) {
    UnitRootResult out;
    out.test = test;
    out.statistic = statistic;
    out.n = n_obs + 1;
    out.lag_or_bandwidth = lag;
    for (double a : resolve_alphas(alphas)) {
        out.reject_at[a] = statistic < df_critical_value(a, n_obs);
    }
    return out;
}

double pct(std::size_t k, std::size_t n) {
    return n == 0 ? 0.0 : 100.0 * static_cast<double>(k) / static_cast<double>(n);
}

}  // namespace

std::string_view to_string(UnitRootTest test) {
    return test == UnitRootTest::dickey_fuller ? "dickey_fuller" : "phillips_perron";
}

Ar1Fit fit_ar1(std::span<const double> r) {
    require_usable(r, "fit_ar1");
    double num = 0.0, den = 0.0;
    for (std::size_t t = 1; t < r.size(); ++t) {
        num += r[t - 1] * r[t];
        den += r[t - 1] * r[t - 1];
    }
    if (!(den > 0.0)) {
        throw std::invalid_argument("fit_ar1: degenerate residuals");
    }
    const double a = num / den;
    double ssr = 0.0;
    for (std::size_t t = 1; t < r.size(); ++t) {
        const double e = r[t] - a * r[t - 1];
        ssr += e * e;
    }
    return {a, std::sqrt(ssr / static_cast<double>(r.size() - 2))};
}

double mackinnon_critical_value(double alpha, std::size_t n_obs) {
    for (const auto& rs : kMacKinnon) {
        if (same_alpha(rs.alpha, alpha)) {
            const double inv = 1.0 / static_cast<double>(n_obs);
            return rs.b_inf + inv * (rs.b1 + inv * (rs.b2 + inv * rs.b3));
        }
    }
    throw std::invalid_argument("mackinnon_critical_value: unsupported alpha");
}

std::span<const SimulatedQuantiles> simulated_tau_quantiles() {
    if (kTableReplications == 0) {
        return {};
    }
    return kTable;
}

std::size_t simulated_table_replications() { return kTableReplications; }
std::uint64_t simulated_table_seed() { return kTableSeed; }

double df_critical_value(double alpha, std::size_t n_obs) {
    if (n_obs < kMinPoints - 1) {
        throw std::invalid_argument("df_critical_value: need at least 19 regression observations");
    }
    if (!same_alpha(alpha, 0.001)) {
        return mackinnon_critical_value(alpha, n_obs);
    }
    const auto table = simulated_tau_quantiles();
    if (table.size() < 2) {
        throw std::logic_error("df_critical_value: simulated table missing");
    }
    // Linear in 1/T between the bracketing rows; the last two rows extrapolate.
    std::size_t hi = 1;
    while (hi + 1 < table.size() && table[hi].n_obs < n_obs) {
        ++hi;
    }
    const auto& a = table[hi - 1];
    const auto& b = table[hi];
    const double xa = 1.0 / static_cast<double>(a.n_obs);
    const double xb = 1.0 / static_cast<double>(b.n_obs);
    const double x = 1.0 / static_cast<double>(n_obs);
    return a.q001 + (x - xa) / (xb - xa) * (b.q001 - a.q001);
}

double dickey_fuller_statistic(std::span<const double> residuals) {
    require_usable(residuals, "dickey_fuller");
    const DfRegression reg = df_regression(residuals);
    return reg.gamma / reg.se;
}

std::size_t newey_west_bandwidth(std::size_t n) {
    return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

UnitRootResult dickey_fuller(std::span<const double> residuals, std::span<const double> alphas) {
    require_usable(residuals, "dickey_fuller");
    const DfRegression reg = df_regression(residuals);
    return decide(UnitRootTest::dickey_fuller, reg.gamma / reg.se, reg.n_obs, 0, alphas);
}

UnitRootResult phillips_perron(std::span<const double> residuals, std::span<const double> alphas) {
    require_usable(residuals, "phillips_perron");
    const DfRegression reg = df_regression(residuals);
    const std::size_t T = reg.n_obs;
    const double dT = static_cast<double>(T);
    const std::size_t bandwidth = newey_west_bandwidth(T);

    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t t = lag; t < T; ++t) {
            s += reg.resid[t] * reg.resid[t - lag];
        }
        return s / dT;
    };
    const double gamma0 = autocov(0);
    double lambda2 = gamma0;
    for (std::size_t j = 1; j <= bandwidth; ++j) {
        lambda2 += 2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(bandwidth + 1)) * autocov(j);
    }
    const double tau = reg.gamma / reg.se;
    double z_tau = tau;
    if (lambda2 > 0.0 && gamma0 > 0.0) {
        const double lambda = std::sqrt(lambda2);
        z_tau = std::sqrt(gamma0 / lambda2) * tau -
                0.5 * (lambda2 - gamma0) / lambda * (dT * reg.se / std::sqrt(reg.s2));
    }
    return decide(UnitRootTest::phillips_perron, z_tau, T, bandwidth, alphas);
}

bool WindowStationarity::stationary_at(double alpha) const {
    auto rejects = [&](const UnitRootResult& r) {
        for (const auto& [a, rej] : r.reject_at) {
            if (same_alpha(a, alpha)) {
                return rej;
            }
        }
        return false;
    };
    return rejects(dickey_fuller) && rejects(phillips_perron);
}

std::vector<double> default_alphas() { return {0.01, 0.001}; }

StationarityRow summarize_unit_roots(std::span<const std::vector<double>> residual_sets,
                                     const std::vector<bool>& survivor, std::span<const double> alphas) {
    if (survivor.size() != residual_sets.size()) {
        throw std::invalid_argument("summarize_unit_roots: survivor flags and residual sets differ in length");
    }
    const auto levels = resolve_alphas(alphas);
    StationarityRow row;
    row.n_windows = residual_sets.size();
    for (std::size_t i = 0; i < residual_sets.size(); ++i) {
        WindowStationarity w;
        w.fit_index = i;
        w.survivor = survivor[i];
        w.dickey_fuller = dickey_fuller(residual_sets[i], levels);
        w.phillips_perron = phillips_perron(residual_sets[i], levels);
        row.windows.push_back(std::move(w));
    }
    row.n_analyzed = row.windows.size();
    row.n_survivors = static_cast<std::size_t>(std::count(survivor.begin(), survivor.end(), true));
    row.p_lppl = row.n_analyzed == 0 ? 0.0 : static_cast<double>(row.n_survivors) / static_cast<double>(row.n_analyzed);
    for (double a : levels) {
        std::size_t df = 0, pp = 0, df_s = 0, pp_s = 0, both_s = 0;
        for (const auto& w : row.windows) {
            const bool d = w.dickey_fuller.reject_at.at(a);
            const bool p = w.phillips_perron.reject_at.at(a);
            df += d;
            pp += p;
            if (w.survivor) {
                df_s += d;
                pp_s += p;
                both_s += d && p;
            }
        }
        row.marginal[a] = {pct(df, row.n_analyzed), pct(pp, row.n_analyzed)};
        row.given_lppl[a] = {pct(df_s, row.n_survivors), pct(pp_s, row.n_survivors)};
        row.p_stationary_given_lppl_pct[a] = pct(both_s, row.n_survivors);
    }
    return row;
}

StationarityTable stationarity_table(std::span<const StationarityInput> inputs, std::span<const double> alphas) {
    StationarityTable table;
    table.alphas = resolve_alphas(alphas);
    for (const StationarityInput& in : inputs) {
        if (in.series == nullptr || in.scan == nullptr) {
            throw std::invalid_argument("stationarity_table: missing series or scan");
        }
        const ScanResult& scan = *in.scan;
        std::vector<std::vector<double>> sets;
        std::vector<bool> survivor;
        std::vector<std::size_t> fit_index;
        for (std::size_t i = 0; i < scan.fits.size(); ++i) {
            const LpplFit& fit = scan.fits[i];
            if (!fit.converged()) {
                continue;
            }
            std::vector<double> r;
            for (const Residual& res : residuals(*in.series, fit.params, fit.window)) {
                r.push_back(res.value);
            }
            sets.push_back(std::move(r));
            survivor.push_back(fit.passes_filter);
            fit_index.push_back(i);
        }
        StationarityRow row = summarize_unit_roots(sets, survivor, table.alphas);
        for (std::size_t k = 0; k < row.windows.size(); ++k) {
            row.windows[k].fit_index = fit_index[k];
        }
        row.index = in.index;
        row.range = in.range;
        row.n_windows = scan.windows.size();
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace lppl

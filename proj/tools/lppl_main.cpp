// Command-line front end for the lppl library.

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lppl/analysis.hpp"
#include "lppl/io.hpp"
#include "lppl/regime.hpp"
#include "lppl/seed.hpp"
#include "lppl/stationarity.hpp"
#include "lppl/synth.hpp"

namespace {

using lppl::AnalysisConfig;
using nlohmann::json;

/// Flag values plus the config edits they imply when given on the command line.
class Overrides {
public:
    template <class T, class Apply>
    CLI::Option* add(CLI::App* app, const std::string& name, T& storage, const std::string& help, Apply apply) {
        CLI::Option* opt = app->add_option(name, storage, help);
        appliers_[app].push_back({opt, [&storage, apply](AnalysisConfig& cfg) { apply(cfg, storage); }});
        return opt;
    }

    void apply(CLI::App* app, AnalysisConfig& cfg) const {
        auto it = appliers_.find(app);
        if (it == appliers_.end()) {
            return;
        }
        for (const auto& [opt, fn] : it->second) {
            if (opt->count() > 0) {
                fn(cfg);
            }
        }
    }

private:
    std::map<CLI::App*, std::vector<std::pair<CLI::Option*, std::function<void(AnalysisConfig&)>>>> appliers_;
};

/// Storage for every flag; defaults mirror AnalysisConfig.
struct Flags {
    AnalysisConfig d;
    std::string config_path;
    std::string input;
    std::uint64_t seed = 0;
    std::string output_dir = d.output_dir;
    std::size_t workers = 0;
    std::string index = d.index_name;
    double m_min = d.bounds.m.lo, m_max = d.bounds.m.hi;
    double omega_min = d.bounds.omega.lo, omega_max = d.bounds.omega.hi;
    double tc_horizon = d.bounds.tc_horizon_fraction;
    double tc_min_offset = d.bounds.tc_min_offset;
    std::size_t n_candidates = d.taboo.n_candidates;
    std::size_t n_iterations = d.taboo.n_iterations;
    std::size_t n_neighbors = d.taboo.n_neighbors;
    double step_fraction = d.taboo.step_fraction;
    std::size_t taboo_length = d.taboo.taboo_length;
    std::size_t cells_per_dim = d.taboo.cells_per_dim;
    std::size_t stagnation_limit = d.taboo.stagnation_limit;
    std::size_t n_repeats = d.n_repeats;
    double rel_sse_tol = d.refine.rel_sse_tol;
    double grad_tol = d.refine.grad_tol;
    std::size_t max_iterations = d.refine.max_iterations;
    std::vector<double> quantiles = d.quantile_levels;
    double diagnosis_threshold = d.diagnosis_threshold;
    double lomb_omega_min = d.lomb.grid.omega_min;
    double lomb_omega_max = d.lomb.grid.omega_max;
    double oversampling = d.lomb.grid.oversampling;
    double harmonic_tol = d.lomb.harmonic_tol;
    std::string tc;
    std::vector<double> h_grid = d.lomb.h_grid;
    std::vector<double> q_grid = d.lomb.q_grid;
    std::vector<double> alphas = d.unit_root_alphas;
    std::vector<std::size_t> regime_T = d.regime_T;
    // scan family
    std::string mode = "shrinking";
    std::string t1, t2, t1_first, t1_last, t2_first, t2_last;
    std::size_t step = 5;
};

void add_common(CLI::App* app, Flags& f, Overrides& ov) {
    app->add_option("--config", f.config_path, "JSON config file; flags override its values")
        ->check(CLI::ExistingFile);
    ov.add(app, "--input", f.input, "price CSV (date,open,high,low,close)",
           [](AnalysisConfig& c, const std::string& v) { c.input = v; });
    ov.add(app, "--seed", f.seed, "global seed (mandatory here or in the config)",
           [](AnalysisConfig& c, std::uint64_t v) { c.seed = v; });
    ov.add(app, "--output-dir", f.output_dir,
           std::string("output directory; ") + lppl::kOutputDirEnv + " overrides the config file value",
           [](AnalysisConfig& c, const std::string& v) { c.output_dir = v; });
    ov.add(app, "--workers", f.workers, "worker threads, 0 = hardware concurrency",
           [](AnalysisConfig& c, std::size_t v) { c.workers = v; });
    ov.add(app, "--index", f.index, "series label used in tables",
           [](AnalysisConfig& c, const std::string& v) { c.index_name = v; });
}

void add_fit_options(CLI::App* app, Flags& f, Overrides& ov) {
    ov.add(app, "--m-min", f.m_min, "search lower bound on m", [](AnalysisConfig& c, double v) { c.bounds.m.lo = v; });
    ov.add(app, "--m-max", f.m_max, "search upper bound on m", [](AnalysisConfig& c, double v) { c.bounds.m.hi = v; });
    ov.add(app, "--omega-min", f.omega_min, "search lower bound on omega",
           [](AnalysisConfig& c, double v) { c.bounds.omega.lo = v; });
    ov.add(app, "--omega-max", f.omega_max, "search upper bound on omega",
           [](AnalysisConfig& c, double v) { c.bounds.omega.hi = v; });
    ov.add(app, "--tc-horizon", f.tc_horizon, "tc upper bound is t2 + fraction * (t2 - t1)",
           [](AnalysisConfig& c, double v) { c.bounds.tc_horizon_fraction = v; });
    ov.add(app, "--tc-min-offset", f.tc_min_offset, "tc lower bound is t2 + offset (trading days)",
           [](AnalysisConfig& c, double v) { c.bounds.tc_min_offset = v; });
    ov.add(app, "--n-candidates", f.n_candidates, "taboo candidates refined per repeat",
           [](AnalysisConfig& c, std::size_t v) { c.taboo.n_candidates = v; });
    ov.add(app, "--n-iterations", f.n_iterations, "taboo iterations",
           [](AnalysisConfig& c, std::size_t v) { c.taboo.n_iterations = v; });
    ov.add(app, "--n-neighbors", f.n_neighbors, "Gaussian neighbours per taboo iteration",
           [](AnalysisConfig& c, std::size_t v) { c.taboo.n_neighbors = v; });
    ov.add(app, "--step-fraction", f.step_fraction, "taboo step, fraction of each parameter range",
           [](AnalysisConfig& c, double v) { c.taboo.step_fraction = v; });
    ov.add(app, "--taboo-length", f.taboo_length, "taboo list length (cells)",
           [](AnalysisConfig& c, std::size_t v) { c.taboo.taboo_length = v; });
    ov.add(app, "--cells-per-dim", f.cells_per_dim, "taboo discretization per parameter",
           [](AnalysisConfig& c, std::size_t v) { c.taboo.cells_per_dim = v; });
    ov.add(app, "--stagnation-limit", f.stagnation_limit, "taboo iterations without improvement before restart",
           [](AnalysisConfig& c, std::size_t v) { c.taboo.stagnation_limit = v; });
    ov.add(app, "--n-repeats", f.n_repeats, "independent taboo runs per window, lowest sse kept",
           [](AnalysisConfig& c, std::size_t v) { c.n_repeats = v; });
    ov.add(app, "--rel-sse-tol", f.rel_sse_tol, "refinement relative sse tolerance",
           [](AnalysisConfig& c, double v) { c.refine.rel_sse_tol = v; });
    ov.add(app, "--grad-tol", f.grad_tol, "refinement gradient tolerance",
           [](AnalysisConfig& c, double v) { c.refine.grad_tol = v; });
    ov.add(app, "--max-iterations", f.max_iterations, "refinement iteration cap",
           [](AnalysisConfig& c, std::size_t v) { c.refine.max_iterations = v; });
}

void add_scan_options(CLI::App* app, Flags& f, Overrides& ov) {
    app->add_option("--mode", f.mode, "window family")->check(CLI::IsMember({"shrinking", "expanding"}));
    app->add_option("--t2", f.t2, "fixed end date (shrinking)");
    app->add_option("--t1-first", f.t1_first, "first start date (shrinking)");
    app->add_option("--t1-last", f.t1_last, "last start date (shrinking)");
    app->add_option("--t1", f.t1, "fixed start date (expanding)");
    app->add_option("--t2-first", f.t2_first, "first end date (expanding)");
    app->add_option("--t2-last", f.t2_last, "last end date (expanding)");
    app->add_option("--step", f.step, "step between windows, trading days")->check(CLI::PositiveNumber);
    ov.add(app, "--quantiles", f.quantiles, "tc quantile levels",
           [](AnalysisConfig& c, const std::vector<double>& v) { c.quantile_levels = v; })
        ->delimiter(',');
    ov.add(app, "--diagnosis-threshold", f.diagnosis_threshold, "p_lppl below this reports no LPPL diagnosis",
           [](AnalysisConfig& c, double v) { c.diagnosis_threshold = v; });
}

void add_lomb_options(CLI::App* app, Flags& f, Overrides& ov) {
    ov.add(app, "--lomb-omega-min", f.lomb_omega_min, "periodogram lowest angular log-frequency",
           [](AnalysisConfig& c, double v) { c.lomb.grid.omega_min = v; });
    ov.add(app, "--lomb-omega-max", f.lomb_omega_max, "periodogram highest angular log-frequency",
           [](AnalysisConfig& c, double v) { c.lomb.grid.omega_max = v; });
    ov.add(app, "--oversampling", f.oversampling, "grid points per natural resolution 2pi/span",
           [](AnalysisConfig& c, double v) { c.lomb.grid.oversampling = v; });
    ov.add(app, "--harmonic-tol", f.harmonic_tol, "relative tolerance for y=x and y=2x labels",
           [](AnalysisConfig& c, double v) { c.lomb.harmonic_tol = v; });
}

void add_hq_options(CLI::App* app, Flags& f, Overrides& ov) {
    ov.add(app, "--tc", f.tc, "anchor date for the (H,q) analysis (default: median survivor tc)",
           [](AnalysisConfig& c, const std::string& v) { c.lomb.tc = lppl::parse_date(v); });
    ov.add(app, "--H", f.h_grid, "H grid, f(qx) interpolated linearly in x",
           [](AnalysisConfig& c, const std::vector<double>& v) { c.lomb.h_grid = v; })
        ->delimiter(',');
    ov.add(app, "--q", f.q_grid, "q grid, each in (0,1)",
           [](AnalysisConfig& c, const std::vector<double>& v) { c.lomb.q_grid = v; })
        ->delimiter(',');
}

void add_alpha_option(CLI::App* app, Flags& f, Overrides& ov) {
    ov.add(app, "--alpha", f.alphas, "unit-root significance levels (0.1, 0.05, 0.01, 0.001)",
           [](AnalysisConfig& c, const std::vector<double>& v) { c.unit_root_alphas = v; })
        ->delimiter(',');
}

void add_regime_option(CLI::App* app, Flags& f, Overrides& ov) {
    ov.add(app, "--T", f.regime_T, "close-open window lengths, trading days",
           [](AnalysisConfig& c, const std::vector<std::size_t>& v) { c.regime_T = v; })
        ->delimiter(',');
}

/// Config file, then environment, then flags.
AnalysisConfig build_config(CLI::App* app, const Flags& f, const Overrides& ov) {
    AnalysisConfig cfg = f.config_path.empty() ? AnalysisConfig{} : lppl::load_config(f.config_path);
    lppl::apply_output_dir_env(cfg);
    ov.apply(app, cfg);
    auto given = [&](const char* name) { return app->get_option_no_throw(name) != nullptr && app->count(name) > 0; };
    const bool shrinking = given("--t2") || given("--t1-first") || given("--t1-last");
    const bool expanding = given("--t1") || given("--t2-first") || given("--t2-last");
    if (app->get_option_no_throw("--t1-first") != nullptr && (shrinking || expanding)) {
        lppl::ScanPlan plan;
        plan.step = f.step;
        if (f.mode == "shrinking") {
            if (f.t2.empty() || f.t1_first.empty() || f.t1_last.empty()) {
                throw CLI::ValidationError("shrinking scan needs --t2, --t1-first and --t1-last");
            }
            plan.mode = lppl::ScanMode::shrinking;
            plan.fixed = lppl::parse_date(f.t2);
            plan.first = lppl::parse_date(f.t1_first);
            plan.last = lppl::parse_date(f.t1_last);
        } else {
            if (f.t1.empty() || f.t2_first.empty() || f.t2_last.empty()) {
                throw CLI::ValidationError("expanding scan needs --t1, --t2-first and --t2-last");
            }
            plan.mode = lppl::ScanMode::expanding;
            plan.fixed = lppl::parse_date(f.t1);
            plan.first = lppl::parse_date(f.t2_first);
            plan.last = lppl::parse_date(f.t2_last);
        }
        cfg.scans = {plan};
    } else if (app->get_option_no_throw("--step") != nullptr && given("--step")) {
        for (auto& p : cfg.scans) {
            p.step = f.step;
        }
    }
    if (!cfg.seed) {
        throw CLI::ValidationError("--seed", "a seed is required (flag or config file)");
    }
    return cfg;
}

lppl::PriceSeries load_input(const AnalysisConfig& cfg) {
    if (cfg.input.empty()) {
        throw CLI::ValidationError("--input", "an input CSV is required (flag or config file)");
    }
    return lppl::load_csv(cfg.input);
}

lppl::WindowSpec window_from_dates(const lppl::PriceSeries& series, const std::string& t1, const std::string& t2) {
    const lppl::Date d1 = lppl::parse_date(t1);
    const lppl::Date d2 = lppl::parse_date(t2);
    auto i2 = series.index_on_or_before(d2);
    auto i1 = series.index_on_or_before(d1);
    if (!i1 || !i2) {
        throw std::invalid_argument("window dates precede the series start");
    }
    std::size_t t1_idx = *i1;
    if (series.date(t1_idx) < d1) {
        ++t1_idx;
    }
    const lppl::WindowSpec w{t1_idx, *i2};
    lppl::validate_window(series, w);
    return w;
}

lppl::LpplFit fit_one(const AnalysisConfig& cfg, const lppl::PriceSeries& series, const lppl::WindowSpec& w) {
    lppl::TabooConfig taboo = cfg.taboo;
    taboo.seed = lppl::window_seed(*cfg.seed, w);
    const auto space = lppl::SearchSpace::for_window(w, cfg.bounds);
    return lppl::fit_window(series, w, space, taboo, cfg.n_repeats, cfg.refine);
}

std::filesystem::path out_dir(const AnalysisConfig& cfg) { return cfg.output_dir; }

std::vector<double> read_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open " + path);
    }
    std::vector<double> v;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        try {
            std::size_t used = 0;
            const double x = std::stod(line, &used);
            v.push_back(x);
        } catch (const std::exception&) {
            if (v.empty() && line_no == 1) {
                continue;  // header
            }
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": not a number");
        }
    }
    return v;
}

json unit_root_json(const lppl::UnitRootResult& r) {
    json rej = json::object();
    for (const auto& [a, b] : r.reject_at) {
        rej[lppl::format_number(a)] = b;
    }
    return {{"test", std::string(lppl::to_string(r.test))},
            {"statistic", lppl::finite_or_null(r.statistic)},
            {"n", r.n},
            {"spec", r.spec},
            {"lag_or_bandwidth", r.lag_or_bandwidth},
            {"reject_at", rej}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Log-periodic power law bubble diagnostics"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", lppl::kSoftwareVersion);
    app.footer(
        "Fixed modelling choices:\n"
        "  time axis: trading-day ordinals of daily closes; tc dates round up, weekday calendar past the data\n"
        "  tc quantiles: linear interpolation between order statistics of survivor tc values\n"
        "  LPPL filter: tc > t2, B < 0, 0 < m < 1; p_lppl = survivors / converged fits\n"
        "  Lomb: normalized periodogram, false alarm 1-(1-exp(-P))^M with M natural-resolution frequencies\n"
        "  (H,q): f(qx) interpolated linearly in x, out-of-range samples dropped\n"
        "  unit roots: constant, no trend, no lagged differences; Newey-West bandwidth floor(4(n/100)^(2/9));\n"
        "    1%/5%/10% from MacKinnon's response surface, 0.1% from a 1e6-draw simulated table\n"
        "  regime: days with close < open, strictly\n"
        "  seeds: every stochastic stage hashes (seed, stage, window) into its own stream");

    Flags f;
    Overrides ov;

    CLI::App* fit = app.add_subcommand("fit", "calibrate one window and print the fit as JSON");
    add_common(fit, f, ov);
    add_fit_options(fit, f, ov);
    fit->add_option("--t1", f.t1, "window start date")->required();
    fit->add_option("--t2", f.t2, "window end date")->required();

    CLI::App* scan = app.add_subcommand("scan", "fit a family of windows; writes fits.csv and scan.json");
    add_common(scan, f, ov);
    add_fit_options(scan, f, ov);
    add_scan_options(scan, f, ov);

    CLI::App* lomb = app.add_subcommand("lomb", "fit one window and take the Lomb periodogram of its residuals");
    add_common(lomb, f, ov);
    add_fit_options(lomb, f, ov);
    add_lomb_options(lomb, f, ov);
    lomb->add_option("--t1", f.t1, "window start date")->required();
    lomb->add_option("--t2", f.t2, "window end date")->required();

    CLI::App* hq = app.add_subcommand("hq", "(H,q)-derivative Lomb scan over a grid; writes hq.csv");
    add_common(hq, f, ov);
    add_lomb_options(hq, f, ov);
    add_hq_options(hq, f, ov);
    hq->add_option("--t1", f.t1, "data range start date")->required();
    hq->add_option("--t2", f.t2, "data range end date")->required();

    CLI::App* unitroot = app.add_subcommand(
        "unitroot", "Dickey-Fuller and Phillips-Perron tests (constant, no trend) on a value file or on scan residuals");
    std::string values_path;
    unitroot->add_option("--values", values_path, "one number per line; tests this series directly")
        ->check(CLI::ExistingFile);
    add_common(unitroot, f, ov);
    add_fit_options(unitroot, f, ov);
    add_scan_options(unitroot, f, ov);
    add_alpha_option(unitroot, f, ov);

    CLI::App* regime = app.add_subcommand("regime", "trailing fraction of days closing below the open");
    add_common(regime, f, ov);
    add_regime_option(regime, f, ov);

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic LPPL price series as CSV");
    lppl::SynthSpec spec;
    spec.params = {7.0, -0.07, 0.01, 0.5, 8.0, 1.0, 430.0};
    spec.n_days = 400;
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    std::string noise = "ar1";
    double ar_a = 0.9, sigma = 0.01;
    double synth_tc = -1.0;
    std::string start = lppl::format_date(spec.start_date);
    synth->add_option("--seed", synth_seed, "seed")->required();
    synth->add_option("--output", synth_out, "output CSV path, '-' for stdout")->required();
    synth->add_option("--n-days", spec.n_days, "trading days")->check(CLI::Range(10, 1000000));
    synth->add_option("--A", spec.params.A, "A");
    synth->add_option("--B", spec.params.B, "B");
    synth->add_option("--C", spec.params.C, "C");
    synth->add_option("--m", spec.params.m, "m");
    synth->add_option("--omega", spec.params.omega, "omega");
    synth->add_option("--phi", spec.params.phi, "phi");
    synth->add_option("--tc", synth_tc, "critical time as an ordinal; default n-days + 30");
    synth->add_option("--noise", noise, "residual model")->check(CLI::IsMember({"ar1", "white", "none"}));
    synth->add_option("--ar1-a", ar_a, "AR(1) coefficient");
    synth->add_option("--sigma", sigma, "innovation scale");
    synth->add_option("--start-date", start, "first bar date (weekday calendar)");
    synth->add_option("--open-noise", spec.open_noise, "log-scale of open relative to previous close");

    CLI::App* report = app.add_subcommand("report", "full analysis: scan, quantiles, Lomb, (H,q), unit roots, regime");
    add_common(report, f, ov);
    add_fit_options(report, f, ov);
    add_scan_options(report, f, ov);
    add_lomb_options(report, f, ov);
    add_hq_options(report, f, ov);
    add_alpha_option(report, f, ov);
    add_regime_option(report, f, ov);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            spec.params.tc = synth_tc > 0.0 ? synth_tc : static_cast<double>(spec.n_days) + 30.0;
            spec.seed = synth_seed;
            spec.start_date = lppl::parse_date(start);
            if (noise == "ar1") {
                spec.residual = lppl::Ar1Residual{ar_a, sigma};
            } else if (noise == "white") {
                spec.residual = lppl::WhiteResidual{sigma};
            } else {
                spec.residual = lppl::NoResidual{};
            }
            const lppl::PriceSeries series = lppl::generate(spec);
            if (synth_out == "-") {
                lppl::write_csv(series, std::cout);
            } else {
                lppl::write_csv(series, std::filesystem::path(synth_out));
            }
            return 0;
        }

        CLI::App* sub = app.get_subcommands().front();
        AnalysisConfig cfg = build_config(sub, f, ov);
        lppl::validate_config(cfg);

        if (sub == fit) {
            const auto series = load_input(cfg);
            const auto w = window_from_dates(series, f.t1, f.t2);
            std::cout << lppl::render_json(lppl::fit_to_json(fit_one(cfg, series, w), series));
            return 0;
        }
        if (sub == lomb) {
            const auto series = load_input(cfg);
            const auto w = window_from_dates(series, f.t1, f.t2);
            const lppl::LpplFit result = fit_one(cfg, series, w);
            const auto signal = lppl::detrended_residuals(series, result);
            const auto grid = lppl::make_frequency_grid(signal.log_span(), cfg.lomb.grid);
            const auto peak = lppl::lomb_peak(signal, grid);
            const lppl::HarmonicPair pair{result.params.omega, peak.omega_lomb, signal.log_span()};
            std::ostringstream pg;
            lppl::write_periodogram_csv(lppl::lomb_periodogram(signal, grid.omegas), pg);
            lppl::write_text_file(out_dir(cfg) / "periodogram_residual.csv", pg.str());
            json out = {{"fit", lppl::fit_to_json(result, series)},
                        {"omega_lomb", peak.omega_lomb},
                        {"power", peak.power},
                        {"false_alarm", peak.false_alarm},
                        {"n_independent", grid.n_independent},
                        {"label", std::string(lppl::to_string(
                                      lppl::classify_harmonics({&pair, 1}, cfg.lomb.harmonic_tol)[0]))}};
            std::cout << lppl::render_json(out);
            return 0;
        }
        if (sub == hq) {
            const auto series = load_input(cfg);
            if (!cfg.lomb.tc) {
                throw CLI::ValidationError("--tc", "hq needs an explicit tc date");
            }
            const double tc = lppl::ordinal_of_date(series, *cfg.lomb.tc);
            const auto w = window_from_dates(series, f.t1, f.t2);
            const auto cells =
                lppl::hq_grid_scan(series, w, tc, cfg.lomb.h_grid, cfg.lomb.q_grid, cfg.lomb.grid, cfg.workers);
            std::ostringstream csv;
            csv << "H,q,omega_lomb,power,false_alarm,failure\n";
            std::size_t ok = 0;
            for (const auto& c : cells) {
                csv << lppl::format_number(c.H) << ',' << lppl::format_number(c.q) << ',';
                if (c.peak) {
                    ++ok;
                    csv << lppl::format_number(c.peak->omega_lomb) << ',' << lppl::format_number(c.peak->power)
                        << ',' << lppl::format_number(c.peak->false_alarm) << ",\n";
                } else {
                    csv << ",,," << '"' << c.failure << "\"\n";
                }
            }
            lppl::write_text_file(out_dir(cfg) / "hq.csv", csv.str());
            std::cout << "cells: " << cells.size() << ", with peaks: " << ok << ", written to "
                      << (out_dir(cfg) / "hq.csv").string() << "\n";
            return 0;
        }
        if (sub == regime) {
            const auto series = load_input(cfg);
            for (std::size_t T : cfg.regime_T) {
                std::ostringstream csv;
                const auto points = lppl::close_open_fraction(series, T);
                if (points.empty()) {
                    std::cerr << "warning: series shorter than T=" << T << "\n";
                }
                lppl::write_regime_csv(points, csv);
                const auto path = out_dir(cfg) / ("regime_T" + std::to_string(T) + ".csv");
                lppl::write_text_file(path, csv.str());
                std::cout << path.string() << "\n";
            }
            return 0;
        }
        if (sub == unitroot && !values_path.empty()) {
            const auto values = read_values(values_path);
            json out = {{"dickey_fuller", unit_root_json(lppl::dickey_fuller(values, cfg.unit_root_alphas))},
                        {"phillips_perron", unit_root_json(lppl::phillips_perron(values, cfg.unit_root_alphas))}};
            std::cout << lppl::render_json(out);
            return 0;
        }

        if (cfg.scans.empty()) {
            throw CLI::ValidationError("a scan family is required (--t2/--t1-first/--t1-last or config scans)");
        }
        const auto series = load_input(cfg);
        if (sub == scan || sub == unitroot) {
            const auto windows = lppl::resolve_windows(series, cfg.scans);
            const auto result = lppl::scan(series, windows, lppl::make_scan_config(cfg));
            if (sub == scan) {
                json q = json::array();
                for (const auto& tq : result.forecast.quantiles) {
                    q.push_back({{"level", tq.level}, {"ordinal", tq.ordinal}, {"date", lppl::format_date(tq.date)}});
                }
                json summary = {{"n_windows", result.windows.size()},
                                {"n_converged", result.n_converged},
                                {"n_survivors", result.survivors.size()},
                                {"p_lppl", lppl::finite_or_null(result.p_lppl)},
                                {"tc_quantiles", q}};
                lppl::write_text_file(out_dir(cfg) / "fits.csv", lppl::fits_csv(result, series));
                lppl::write_text_file(out_dir(cfg) / "scan.json", lppl::render_json(summary));
                std::cout << lppl::render_json(summary);
                return result.n_converged == 0 ? 2 : 0;
            }
            const lppl::StationarityInput input{cfg.index_name, "", &series, &result};
            const auto table = lppl::stationarity_table({&input, 1}, cfg.unit_root_alphas);
            const auto& row = table.rows.front();
            std::cout << "windows " << row.n_windows << ", analysed " << row.n_analyzed << ", p_lppl "
                      << 100.0 * row.p_lppl << "%\n";
            for (double a : table.alphas) {
                std::cout << "alpha " << a << ": PP " << row.marginal.at(a).phillips_perron_pct << "%, DF "
                          << row.marginal.at(a).dickey_fuller_pct << "%, P(stationary|LPPL) "
                          << row.p_stationary_given_lppl_pct.at(a) << "%\n";
            }
            return 0;
        }

        // report
        const lppl::Report rep = lppl::run(cfg, series);
        lppl::write_report(rep, out_dir(cfg));
        const json& s = rep.document["scan"];
        std::cout << "windows " << s["n_windows"] << ", survivors " << s["n_survivors"] << ", p_lppl "
                  << s["p_lppl"] << " (" << s["diagnosis"]["message"].get<std::string>() << ")\n"
                  << "report written to " << (out_dir(cfg) / "report.json").string() << "\n";
        return rep.exit_code;
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

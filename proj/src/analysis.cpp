#include "lppl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lppl/io.hpp"
#include "lppl/regime.hpp"
#include "lppl/seed.hpp"
#include "lppl/stationarity.hpp"

namespace lppl {

using nlohmann::json;
namespace chr = std::chrono;

namespace {

// ---- strict config reading ----------------------------------------------------

class Reader {
public:
    Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw std::invalid_argument(path_ + ": expected an object");
        }
    }

    ~Reader() noexcept(false) {
        if (std::uncaught_exceptions() > 0) {
            return;
        }
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.contains(key)) {
                throw std::invalid_argument(path_ + ": unknown key '" + key + "'");
            }
        }
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end() || it->is_null()) {
            return nullptr;
        }
        return &*it;
    }

    std::string where(const std::string& key) const { return path_ + "." + key; }

    void number(const std::string& key, double& out) {
        if (const json* v = find(key)) {
            if (!v->is_number()) {
                throw std::invalid_argument(where(key) + ": expected a number");
            }
            out = v->get<double>();
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out) {
        if (const json* v = find(key)) {
            if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0)) {
                throw std::invalid_argument(where(key) + ": expected a non-negative integer");
            }
            out = v->get<Int>();
        }
    }

    void string(const std::string& key, std::string& out) {
        if (const json* v = find(key)) {
            if (!v->is_string()) {
                throw std::invalid_argument(where(key) + ": expected a string");
            }
            out = v->get<std::string>();
        }
    }

    void date(const std::string& key, Date& out) {
        std::string s;
        string(key, s);
        if (!s.empty()) {
            out = parse_date(s);
        }
    }

    void optional_date(const std::string& key, std::optional<Date>& out) {
        std::string s;
        string(key, s);
        if (!s.empty()) {
            out = parse_date(s);
        }
    }

    void interval(const std::string& key, Interval& out) {
        if (const json* v = find(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
                throw std::invalid_argument(where(key) + ": expected [lo, hi]");
            }
            out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }

    template <class T>
    void list(const std::string& key, std::vector<T>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) {
                throw std::invalid_argument(where(key) + ": expected an array");
            }
            std::vector<T> tmp;
            for (const json& e : *v) {
                if constexpr (std::is_integral_v<T>) {
                    if (!e.is_number_unsigned()) {
                        throw std::invalid_argument(where(key) + ": expected non-negative integers");
                    }
                } else if (!e.is_number()) {
                    throw std::invalid_argument(where(key) + ": expected numbers");
                }
                tmp.push_back(e.get<T>());
            }
            out = std::move(tmp);
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

ScanMode parse_mode(const std::string& s) {
    if (s == "shrinking") {
        return ScanMode::shrinking;
    }
    if (s == "expanding") {
        return ScanMode::expanding;
    }
    throw std::invalid_argument("scan mode must be 'shrinking' or 'expanding', got '" + s + "'");
}

std::string mode_name(ScanMode m) { return m == ScanMode::shrinking ? "shrinking" : "expanding"; }

json opt_date(const std::optional<Date>& d) { return d ? json(format_date(*d)) : json(nullptr); }

std::size_t index_on_or_after(const PriceSeries& series, const Date& date) {
    const auto before = series.index_on_or_before(date);
    if (!before) {
        return 0;
    }
    if (series.date(*before) == date) {
        return *before;
    }
    return *before + 1;
}

std::size_t require_on_or_before(const PriceSeries& series, const Date& date, const char* what) {
    const auto idx = series.index_on_or_before(date);
    if (!idx) {
        throw std::invalid_argument(std::string(what) + " " + format_date(date) + " precedes the series start " +
                                    format_date(series.date(0)));
    }
    return *idx;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

double median(std::vector<double> v) { return empirical_quantile(v, 0.5); }

std::string alpha_key(double a) { return format_number(a); }

}  // namespace

// ---- config -------------------------------------------------------------------

AnalysisConfig config_from_json(const json& doc) {
    AnalysisConfig cfg;
    Reader top(doc, "config");
    top.string("input", cfg.input);
    top.string("index", cfg.index_name);
    top.string("output_dir", cfg.output_dir);
    if (const json* s = top.find("seed")) {
        if (!s->is_number_unsigned()) {
            throw std::invalid_argument("config.seed: expected a non-negative integer");
        }
        cfg.seed = s->get<std::uint64_t>();
    }
    top.integer("workers", cfg.workers);
    top.integer("n_repeats", cfg.n_repeats);
    top.list("quantile_levels", cfg.quantile_levels);
    top.number("diagnosis_threshold", cfg.diagnosis_threshold);
    if (const json* scans = top.find("scans")) {
        if (!scans->is_array()) {
            throw std::invalid_argument("config.scans: expected an array");
        }
        for (std::size_t i = 0; i < scans->size(); ++i) {
            Reader r((*scans)[i], "config.scans[" + std::to_string(i) + "]");
            ScanPlan plan;
            std::string mode = "shrinking";
            r.string("mode", mode);
            plan.mode = parse_mode(mode);
            for (const char* key : {"fixed", "first", "last"}) {
                if (r.find(key) == nullptr) {
                    throw std::invalid_argument(r.where(key) + ": required");
                }
            }
            r.date("fixed", plan.fixed);
            r.date("first", plan.first);
            r.date("last", plan.last);
            r.integer("step", plan.step);
            cfg.scans.push_back(plan);
        }
    }
    if (const json* s = top.find("search")) {
        Reader r(*s, "config.search");
        r.interval("m", cfg.bounds.m);
        r.interval("omega", cfg.bounds.omega);
        r.number("tc_horizon_fraction", cfg.bounds.tc_horizon_fraction);
        r.number("tc_min_offset", cfg.bounds.tc_min_offset);
    }
    if (const json* s = top.find("taboo")) {
        Reader r(*s, "config.taboo");
        r.integer("n_candidates", cfg.taboo.n_candidates);
        r.integer("n_iterations", cfg.taboo.n_iterations);
        r.integer("n_neighbors", cfg.taboo.n_neighbors);
        r.number("step_fraction", cfg.taboo.step_fraction);
        r.integer("taboo_length", cfg.taboo.taboo_length);
        r.integer("cells_per_dim", cfg.taboo.cells_per_dim);
        r.integer("stagnation_limit", cfg.taboo.stagnation_limit);
    }
    if (const json* s = top.find("refine")) {
        Reader r(*s, "config.refine");
        r.number("rel_sse_tol", cfg.refine.rel_sse_tol);
        r.number("grad_tol", cfg.refine.grad_tol);
        r.integer("max_iterations", cfg.refine.max_iterations);
    }
    if (const json* s = top.find("lomb")) {
        Reader r(*s, "config.lomb");
        r.number("omega_min", cfg.lomb.grid.omega_min);
        r.number("omega_max", cfg.lomb.grid.omega_max);
        r.number("oversampling", cfg.lomb.grid.oversampling);
        r.optional_date("tc", cfg.lomb.tc);
        r.list("hq_H", cfg.lomb.h_grid);
        r.list("hq_q", cfg.lomb.q_grid);
        r.optional_date("hq_first", cfg.lomb.hq_first);
        r.optional_date("hq_last", cfg.lomb.hq_last);
        r.number("harmonic_tol", cfg.lomb.harmonic_tol);
    }
    if (const json* s = top.find("unit_root")) {
        Reader r(*s, "config.unit_root");
        r.list("alphas", cfg.unit_root_alphas);
    }
    if (const json* s = top.find("regime")) {
        Reader r(*s, "config.regime");
        r.list("T", cfg.regime_T);
    }
    return cfg;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    AnalysisConfig cfg = config_from_json(doc);
    // input is relative to the config file, output_dir to the working directory
    if (!cfg.input.empty() && std::filesystem::path(cfg.input).is_relative()) {
        cfg.input = (path.parent_path() / cfg.input).lexically_normal().string();
    }
    return cfg;
}

json config_to_json(const AnalysisConfig& cfg) {
    json scans = json::array();
    for (const ScanPlan& p : cfg.scans) {
        scans.push_back({{"mode", mode_name(p.mode)},
                         {"fixed", format_date(p.fixed)},
                         {"first", format_date(p.first)},
                         {"last", format_date(p.last)},
                         {"step", p.step}});
    }
    return {
        {"input", cfg.input},
        {"index", cfg.index_name},
        {"output_dir", cfg.output_dir},
        {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
        {"workers", cfg.workers},
        {"n_repeats", cfg.n_repeats},
        {"quantile_levels", cfg.quantile_levels},
        {"diagnosis_threshold", cfg.diagnosis_threshold},
        {"scans", scans},
        {"search",
         {{"m", {cfg.bounds.m.lo, cfg.bounds.m.hi}},
          {"omega", {cfg.bounds.omega.lo, cfg.bounds.omega.hi}},
          {"tc_horizon_fraction", cfg.bounds.tc_horizon_fraction},
          {"tc_min_offset", cfg.bounds.tc_min_offset}}},
        {"taboo",
         {{"n_candidates", cfg.taboo.n_candidates},
          {"n_iterations", cfg.taboo.n_iterations},
          {"n_neighbors", cfg.taboo.n_neighbors},
          {"step_fraction", cfg.taboo.step_fraction},
          {"taboo_length", cfg.taboo.taboo_length},
          {"cells_per_dim", cfg.taboo.cells_per_dim},
          {"stagnation_limit", cfg.taboo.stagnation_limit}}},
        {"refine",
         {{"rel_sse_tol", cfg.refine.rel_sse_tol},
          {"grad_tol", cfg.refine.grad_tol},
          {"max_iterations", cfg.refine.max_iterations}}},
        {"lomb",
         {{"omega_min", cfg.lomb.grid.omega_min},
          {"omega_max", cfg.lomb.grid.omega_max},
          {"oversampling", cfg.lomb.grid.oversampling},
          {"tc", opt_date(cfg.lomb.tc)},
          {"hq_H", cfg.lomb.h_grid},
          {"hq_q", cfg.lomb.q_grid},
          {"hq_first", opt_date(cfg.lomb.hq_first)},
          {"hq_last", opt_date(cfg.lomb.hq_last)},
          {"harmonic_tol", cfg.lomb.harmonic_tol}}},
        {"unit_root", {{"alphas", cfg.unit_root_alphas}}},
        {"regime", {{"T", cfg.regime_T}}},
    };
}

void validate_config(const AnalysisConfig& cfg) {
    auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
    if (!cfg.seed) {
        fail("seed is mandatory");
    }
    if (cfg.n_repeats == 0) {
        fail("n_repeats must be >= 1");
    }
    for (double q : cfg.quantile_levels) {
        if (!(q >= 0.0 && q <= 1.0)) {
            fail("quantile levels must lie in [0, 1]");
        }
    }
    for (const ScanPlan& p : cfg.scans) {
        if (p.step == 0) {
            fail("scan step must be >= 1");
        }
        if (p.last < p.first) {
            fail("scan range last precedes first");
        }
    }
    if (!(cfg.bounds.m.lo <= cfg.bounds.m.hi) || !(cfg.bounds.omega.lo <= cfg.bounds.omega.hi)) {
        fail("search intervals must have lo <= hi");
    }
    if (!(cfg.bounds.m.lo > 0.0)) {
        fail("search m interval must be positive");
    }
    if (!(cfg.bounds.omega.lo > 0.0)) {
        fail("search omega interval must be positive");
    }
    if (!(cfg.bounds.tc_horizon_fraction > 0.0) || !(cfg.bounds.tc_min_offset > 0.0)) {
        fail("tc_horizon_fraction and tc_min_offset must be positive");
    }
    if (cfg.taboo.n_candidates == 0 || cfg.taboo.cells_per_dim == 0 || cfg.taboo.n_neighbors == 0) {
        fail("taboo n_candidates, n_neighbors and cells_per_dim must be >= 1");
    }
    if (!(cfg.lomb.grid.omega_min > 0.0 && cfg.lomb.grid.omega_max > cfg.lomb.grid.omega_min &&
          cfg.lomb.grid.oversampling >= 1.0)) {
        fail("lomb grid needs 0 < omega_min < omega_max and oversampling >= 1");
    }
    for (double h : cfg.lomb.h_grid) {
        if (!(h >= -1.0 && h <= 1.0)) {
            fail("hq_H values must lie in [-1, 1]");
        }
    }
    for (double q : cfg.lomb.q_grid) {
        if (!(q > 0.0 && q < 1.0)) {
            fail("hq_q values must lie in (0, 1)");
        }
    }
    if (!(cfg.lomb.harmonic_tol > 0.0 && cfg.lomb.harmonic_tol < 1.0 / 3.0)) {
        fail("harmonic_tol must lie in (0, 1/3)");
    }
    for (double a : cfg.unit_root_alphas) {
        if (std::find(std::begin(kSupportedAlphas), std::end(kSupportedAlphas), a) == std::end(kSupportedAlphas)) {
            fail("unsupported unit-root alpha " + format_number(a) + " (use 0.1, 0.05, 0.01 or 0.001)");
        }
    }
    for (std::size_t T : cfg.regime_T) {
        if (T == 0) {
            fail("regime T values must be >= 1");
        }
    }
}

void apply_output_dir_env(AnalysisConfig& cfg) {
    if (const char* v = std::getenv(kOutputDirEnv); v != nullptr && *v != '\0') {
        cfg.output_dir = v;
    }
}

double ordinal_of_date(const PriceSeries& series, const Date& date) {
    if (series.empty()) {
        throw std::invalid_argument("ordinal_of_date: empty series");
    }
    const Date& last = series.date(series.size() - 1);
    if (date <= last) {
        return static_cast<double>(require_on_or_before(series, date, "date"));
    }
    std::size_t extra = 0;
    for (chr::sys_days d = chr::sys_days{last} + chr::days{1}; d <= chr::sys_days{date}; d += chr::days{1}) {
        const chr::weekday wd{d};
        if (wd != chr::Saturday && wd != chr::Sunday) {
            ++extra;
        }
    }
    return static_cast<double>(series.size() - 1 + extra);
}

std::vector<WindowSpec> resolve_windows(const PriceSeries& series, const std::vector<ScanPlan>& plans) {
    if (series.empty()) {
        throw std::invalid_argument("resolve_windows: empty series");
    }
    const Date& last_date = series.date(series.size() - 1);
    std::vector<WindowSpec> out;
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const ScanPlan& p : plans) {
        if (p.fixed > last_date || p.first > last_date) {
            throw std::invalid_argument("scan dates must not lie after the series end " + format_date(last_date));
        }
        const std::size_t fixed = p.mode == ScanMode::shrinking ? require_on_or_before(series, p.fixed, "t2")
                                                                 : index_on_or_after(series, p.fixed);
        const std::size_t first = index_on_or_after(series, p.first);
        const std::size_t last = require_on_or_before(series, p.last, "range end");
        const auto family = p.mode == ScanMode::shrinking ? gen_shrinking_windows(first, last, fixed, p.step)
                                                          : gen_expanding_windows(fixed, first, last, p.step);
        for (const WindowSpec& w : family) {
            if (seen.insert({w.t1, w.t2}).second) {
                out.push_back(w);
            }
        }
    }
    return out;
}

ScanConfig make_scan_config(const AnalysisConfig& cfg) {
    ScanConfig sc;
    sc.bounds = cfg.bounds;
    sc.taboo = cfg.taboo;
    sc.refine = cfg.refine;
    sc.n_repeats = cfg.n_repeats;
    sc.seed = cfg.seed.value_or(0);
    sc.quantile_levels = cfg.quantile_levels;
    sc.workers = cfg.workers;
    return sc;
}

// ---- report -------------------------------------------------------------------

json finite_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

json fit_to_json(const LpplFit& fit, const PriceSeries& series) {
    const LpplParams& p = fit.params;
    json tc_date = nullptr;
    if (fit.status != FitStatus::unfittable && std::isfinite(p.tc)) {
        tc_date = format_date(series.date_of_ordinal(p.tc));
    }
    return {{"t1", fit.window.t1},
            {"t2", fit.window.t2},
            {"t1_date", format_date(series.date(fit.window.t1))},
            {"t2_date", format_date(series.date(fit.window.t2))},
            {"status", std::string(to_string(fit.status))},
            {"A", finite_or_null(p.A)},
            {"B", finite_or_null(p.B)},
            {"C", finite_or_null(p.C)},
            {"m", finite_or_null(p.m)},
            {"omega", finite_or_null(p.omega)},
            {"phi", finite_or_null(p.phi)},
            {"tc", finite_or_null(p.tc)},
            {"tc_date", tc_date},
            {"sse", finite_or_null(fit.sse)},
            {"n_points", fit.n_points},
            {"rng_seed", fit.rng_seed},
            {"passes_filter", fit.passes_filter},
            {"iterations", fit.iterations},
            {"failure_reason", fit.failure_reason}};
}

std::string fits_csv(const ScanResult& result, const PriceSeries& series) {
    std::ostringstream out;
    out << "index,t1,t2,t1_date,t2_date,status,A,B,C,m,omega,phi,tc,tc_date,sse,n_points,passes_filter,rng_seed\n";
    for (std::size_t i = 0; i < result.fits.size(); ++i) {
        const LpplFit& f = result.fits[i];
        const LpplParams& p = f.params;
        const bool has_params = f.status != FitStatus::unfittable;
        auto num = [&](double v) { return has_params && std::isfinite(v) ? format_number(v) : std::string(); };
        out << i << ',' << f.window.t1 << ',' << f.window.t2 << ',' << format_date(series.date(f.window.t1)) << ','
            << format_date(series.date(f.window.t2)) << ',' << to_string(f.status) << ',' << num(p.A) << ','
            << num(p.B) << ',' << num(p.C) << ',' << num(p.m) << ',' << num(p.omega) << ',' << num(p.phi) << ','
            << num(p.tc) << ','
            << (has_params && std::isfinite(p.tc) ? format_date(series.date_of_ordinal(p.tc)) : std::string())
            << ',' << num(f.sse) << ',' << f.n_points << ',' << (f.passes_filter ? "true" : "false") << ','
            << f.rng_seed << '\n';
    }
    return out.str();
}

namespace {

std::string periodogram_text(const std::vector<PeriodogramPoint>& points) {
    std::ostringstream out;
    write_periodogram_csv(points, out);
    return out.str();
}

json peak_json(const LombPeak& peak) {
    return {{"omega_lomb", finite_or_null(peak.omega_lomb)},
            {"power", finite_or_null(peak.power)},
            {"false_alarm", finite_or_null(peak.false_alarm)}};
}

json stationarity_json(const StationarityTable& table) {
    json rows = json::array();
    for (const StationarityRow& row : table.rows) {
        json levels = json::array();
        for (double a : table.alphas) {
            levels.push_back({{"alpha", a},
                              {"df_reject_pct", finite_or_null(row.marginal.at(a).dickey_fuller_pct)},
                              {"pp_reject_pct", finite_or_null(row.marginal.at(a).phillips_perron_pct)},
                              {"df_reject_given_lppl_pct", finite_or_null(row.given_lppl.at(a).dickey_fuller_pct)},
                              {"pp_reject_given_lppl_pct", finite_or_null(row.given_lppl.at(a).phillips_perron_pct)},
                              {"p_stationary_given_lppl_pct", finite_or_null(row.p_stationary_given_lppl_pct.at(a))}});
        }
        json windows = json::array();
        for (const WindowStationarity& w : row.windows) {
            json df_rej = json::object();
            json pp_rej = json::object();
            for (double a : table.alphas) {
                df_rej[alpha_key(a)] = w.dickey_fuller.reject_at.at(a);
                pp_rej[alpha_key(a)] = w.phillips_perron.reject_at.at(a);
            }
            windows.push_back({{"fit_index", w.fit_index},
                               {"survivor", w.survivor},
                               {"n", w.dickey_fuller.n},
                               {"df_statistic", finite_or_null(w.dickey_fuller.statistic)},
                               {"pp_statistic", finite_or_null(w.phillips_perron.statistic)},
                               {"pp_bandwidth", w.phillips_perron.lag_or_bandwidth},
                               {"df_reject", df_rej},
                               {"pp_reject", pp_rej}});
        }
        rows.push_back({{"index", row.index},
                        {"range", row.range},
                        {"n_windows", row.n_windows},
                        {"n_analyzed", row.n_analyzed},
                        {"n_survivors", row.n_survivors},
                        {"p_lppl", finite_or_null(row.p_lppl)},
                        {"levels", levels},
                        {"windows", windows}});
    }
    return {{"available", true},
            {"alphas", table.alphas},
            {"spec", "constant"},
            {"critical_values", {{"table_replications", simulated_table_replications()},
                                 {"table_seed", simulated_table_seed()}}},
            {"rows", rows}};
}

std::string stationarity_csv(const StationarityTable& table) {
    std::ostringstream out;
    out << "index,range,n_windows,n_analyzed,p_lppl_pct,alpha,pp_reject_pct,df_reject_pct,pp_reject_given_lppl_pct,"
           "df_reject_given_lppl_pct,p_stationary_given_lppl_pct\n";
    for (const StationarityRow& row : table.rows) {
        for (double a : table.alphas) {
            out << row.index << ',' << row.range << ',' << row.n_windows << ',' << row.n_analyzed << ','
                << format_number(100.0 * row.p_lppl) << ',' << format_number(a) << ','
                << format_number(row.marginal.at(a).phillips_perron_pct) << ','
                << format_number(row.marginal.at(a).dickey_fuller_pct) << ','
                << format_number(row.given_lppl.at(a).phillips_perron_pct) << ','
                << format_number(row.given_lppl.at(a).dickey_fuller_pct) << ','
                << format_number(row.p_stationary_given_lppl_pct.at(a)) << '\n';
        }
    }
    return out.str();
}

}  // namespace

Report run(const AnalysisConfig& cfg, const PriceSeries& series) {
    validate_config(cfg);
    if (cfg.scans.empty()) {
        throw std::invalid_argument("config: at least one scan is required");
    }
    Report report;
    json& doc = report.document;
    doc["schema_version"] = kReportSchemaVersion;
    doc["software_version"] = kSoftwareVersion;
    doc["generated_at"] = utc_timestamp();
    doc["seed"] = *cfg.seed;
    doc["config"] = config_to_json(cfg);
    doc["input"] = {{"path", cfg.input},
                    {"n_bars", series.size()},
                    {"first_date", format_date(series.date(0))},
                    {"last_date", format_date(series.date(series.size() - 1))}};

    // scan + quantiles
    const std::vector<WindowSpec> windows = resolve_windows(series, cfg.scans);
    const ScanResult result = scan(series, windows, make_scan_config(cfg));
    std::size_t n_unfittable = 0;
    std::size_t n_not_converged = 0;
    json fits = json::array();
    for (const LpplFit& f : result.fits) {
        n_unfittable += f.status == FitStatus::unfittable;
        n_not_converged += f.status == FitStatus::not_converged;
        fits.push_back(fit_to_json(f, series));
    }
    json quantiles = json::array();
    for (const TcQuantile& q : result.forecast.quantiles) {
        quantiles.push_back({{"level", q.level}, {"ordinal", finite_or_null(q.ordinal)}, {"date", format_date(q.date)}});
    }
    const bool diagnosis = result.n_converged > 0 && result.p_lppl >= cfg.diagnosis_threshold;
    doc["scan"] = {{"n_windows", result.windows.size()},
                   {"n_converged", result.n_converged},
                   {"n_not_converged", n_not_converged},
                   {"n_unfittable", n_unfittable},
                   {"n_survivors", result.survivors.size()},
                   {"p_lppl", finite_or_null(result.p_lppl)},
                   {"diagnosis",
                    {{"threshold", cfg.diagnosis_threshold},
                     {"lppl_diagnosis", diagnosis},
                     {"message", diagnosis ? "LPPL diagnosis" : "no LPPL diagnosis"}}},
                   {"survivors", result.survivors},
                   {"tc_forecast", {{"available", result.forecast.available}, {"quantiles", quantiles}}},
                   {"fits", fits}};
    report.files.emplace_back("fits.csv", fits_csv(result, series));

    // lomb on detrended residuals of every survivor
    json residual_peaks = json::array();
    std::vector<HarmonicPair> pairs;
    std::vector<std::size_t> pair_slot;
    for (std::size_t i : result.survivors) {
        const LpplFit& fit = result.fits[i];
        json entry = {{"fit_index", i}, {"omega_fit", finite_or_null(fit.params.omega)}};
        try {
            const LogTimeSignal signal = detrended_residuals(series, fit);
            const FrequencyGrid grid = make_frequency_grid(signal.log_span(), cfg.lomb.grid);
            const auto periodogram = lomb_periodogram(signal, grid.omegas);
            const LombPeak peak = lomb_peak(signal, grid);
            entry.update(peak_json(peak));
            entry["log_span"] = finite_or_null(signal.log_span());
            entry["n_samples"] = signal.size();
            entry["n_independent"] = grid.n_independent;
            const std::string file = "periodogram_residual_" + std::to_string(i) + ".csv";
            entry["file"] = file;
            report.files.emplace_back(file, periodogram_text(periodogram));
            pairs.push_back({fit.params.omega, peak.omega_lomb, signal.log_span()});
            pair_slot.push_back(residual_peaks.size());
        } catch (const std::exception& e) {
            entry["failure"] = e.what();
        }
        residual_peaks.push_back(std::move(entry));
    }
    const auto labels = classify_harmonics(pairs, cfg.lomb.harmonic_tol);
    for (std::size_t k = 0; k < labels.size(); ++k) {
        residual_peaks[pair_slot[k]]["label"] = std::string(to_string(labels[k]));
    }

    // (H,q) analysis
    json hq = {{"available", false}};
    std::optional<double> hq_tc;
    std::string tc_source;
    if (cfg.lomb.tc) {
        hq_tc = ordinal_of_date(series, *cfg.lomb.tc);
        tc_source = "config";
    } else if (!result.survivors.empty()) {
        hq_tc = median(result.survivor_tcs());
        tc_source = "median_survivor_tc";
    }
    if (!hq_tc) {
        hq["reason"] = "no tc: none configured and no surviving fits";
    } else {
        std::size_t t1 = series.size();
        std::size_t t2 = 0;
        for (const WindowSpec& w : windows) {
            t1 = std::min(t1, w.t1);
            t2 = std::max(t2, w.t2);
        }
        if (cfg.lomb.hq_first) {
            t1 = index_on_or_after(series, *cfg.lomb.hq_first);
        }
        if (cfg.lomb.hq_last) {
            t2 = require_on_or_before(series, *cfg.lomb.hq_last, "hq_last");
        }
        const double tc = *hq_tc;
        const double limit = std::ceil(tc) - 1.0;
        if (static_cast<double>(t2) > limit) {
            t2 = limit < 0.0 ? 0 : static_cast<std::size_t>(limit);
        }
        hq["tc"] = finite_or_null(tc);
        hq["tc_date"] = format_date(series.date_of_ordinal(tc));
        hq["tc_source"] = tc_source;
        hq["interpolation"] = "linear";
        if (t2 <= t1 || t2 >= series.size()) {
            hq["reason"] = "empty data range before tc";
        } else {
            const WindowSpec range{t1, t2};
            hq["available"] = true;
            hq["t1_date"] = format_date(series.date(t1));
            hq["t2_date"] = format_date(series.date(t2));
            const double log_span = std::log(tc - static_cast<double>(t1)) - std::log(tc - static_cast<double>(t2));
            hq["log_span"] = finite_or_null(log_span);
            const auto cells = hq_grid_scan(series, range, tc, cfg.lomb.h_grid, cfg.lomb.q_grid, cfg.lomb.grid,
                                            cfg.workers);
            std::optional<double> omega_ref;
            if (!result.survivors.empty()) {
                std::vector<double> omegas;
                for (std::size_t i : result.survivors) {
                    omegas.push_back(result.fits[i].params.omega);
                }
                omega_ref = median(omegas);
            }
            hq["omega_fit_reference"] = omega_ref ? finite_or_null(*omega_ref) : json(nullptr);
            json cell_json = json::array();
            std::optional<std::size_t> best;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                const HqCell& cell = cells[c];
                json e = {{"H", cell.H}, {"q", cell.q}};
                if (cell.peak) {
                    e.update(peak_json(*cell.peak));
                    if (omega_ref) {
                        const HarmonicPair pair{*omega_ref, cell.peak->omega_lomb, log_span};
                        e["label"] = std::string(to_string(classify_harmonics({&pair, 1}, cfg.lomb.harmonic_tol)[0]));
                    }
                    if (!best || cell.peak->power > cells[*best].peak->power) {
                        best = c;
                    }
                } else {
                    e["failure"] = cell.failure;
                }
                cell_json.push_back(std::move(e));
            }
            hq["cells"] = cell_json;
            if (best) {
                const HqCell& cell = cells[*best];
                const LogTimeSignal signal = hq_derivative(series, range, {cell.H, cell.q, tc});
                const FrequencyGrid grid = make_frequency_grid(signal.log_span(), cfg.lomb.grid);
                report.files.emplace_back("periodogram_hq_best.csv",
                                          periodogram_text(lomb_periodogram(signal, grid.omegas)));
                hq["best"] = {{"H", cell.H}, {"q", cell.q}, {"file", "periodogram_hq_best.csv"}};
            }
        }
    }
    doc["lomb"] = {{"grid",
                    {{"omega_min", cfg.lomb.grid.omega_min},
                     {"omega_max", cfg.lomb.grid.omega_max},
                     {"oversampling", cfg.lomb.grid.oversampling}}},
                   {"harmonic_tol", cfg.lomb.harmonic_tol},
                   {"residual_peaks", residual_peaks},
                   {"hq", hq}};

    // unit roots
    std::string range_label;
    if (!windows.empty()) {
        std::size_t lo = windows.front().t1;
        std::size_t hi = windows.front().t2;
        for (const WindowSpec& w : windows) {
            lo = std::min(lo, w.t1);
            hi = std::max(hi, w.t2);
        }
        range_label = format_date(series.date(lo)) + "/" + format_date(series.date(hi));
    }
    try {
        const StationarityInput input{cfg.index_name, range_label, &series, &result};
        const StationarityTable table = stationarity_table({&input, 1}, cfg.unit_root_alphas);
        doc["unit_root"] = stationarity_json(table);
        report.files.emplace_back("unit_root.csv", stationarity_csv(table));
    } catch (const std::exception& e) {
        doc["unit_root"] = {{"available", false}, {"reason", e.what()}};
    }

    // regime
    json regime = json::array();
    for (std::size_t T : cfg.regime_T) {
        const auto points = close_open_fraction(series, T);
        std::ostringstream out;
        write_regime_csv(points, out);
        const std::string file = "regime_T" + std::to_string(T) + ".csv";
        report.files.emplace_back(file, out.str());
        regime.push_back({{"T", T}, {"file", file}, {"n_points", points.size()}});
    }
    doc["regime"] = regime;

    json files = json::array();
    files.push_back("report.json");
    for (const auto& [name, _] : report.files) {
        files.push_back(name);
    }
    doc["files"] = files;
    report.exit_code = result.n_converged == 0 ? 2 : 0;
    return report;
}

Report run(const AnalysisConfig& cfg) {
    if (cfg.input.empty()) {
        throw std::invalid_argument("config: input path is required");
    }
    return run(cfg, load_csv(cfg.input));
}

std::string render_json(const json& doc) { return doc.dump(2) + "\n"; }

void write_report(const Report& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "report.json", render_json(report.document));
    for (const auto& [name, contents] : report.files) {
        write_text_file(dir / name, contents);
    }
}

}  // namespace lppl

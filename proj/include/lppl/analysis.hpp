#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lppl/calibration.hpp"
#include "lppl/core_model.hpp"
#include "lppl/lomb.hpp"
#include "lppl/window_scan.hpp"

namespace lppl {

inline constexpr const char* kSoftwareVersion = "0.1.0";
inline constexpr const char* kReportSchemaVersion = "1.0.0";

/// Name of the environment variable that overrides the output directory.
inline constexpr const char* kOutputDirEnv = "LPPL_OUTPUT_DIR";

enum class ScanMode { shrinking, expanding };

/**
 * @brief One window family in calendar dates.
 *
 * Shrinking: t2 = `fixed`, t1 moves over [first, last]. Expanding: t1 = `fixed`,
 * t2 moves over [first, last]. Dates snap to trading days inside the range.
 */
struct ScanPlan {
    ScanMode mode = ScanMode::shrinking;
    Date fixed;
    Date first;
    Date last;
    std::size_t step = 5;
};

struct LombSettings {
    FrequencyGridConfig grid;
    /// Anchor for the (H,q) analysis; median survivor tc when unset.
    std::optional<Date> tc;
    std::vector<double> h_grid = default_h_grid();
    std::vector<double> q_grid = default_q_grid();
    /// Data range of the (H,q) analysis; defaults to the span of all scanned windows.
    std::optional<Date> hq_first;
    std::optional<Date> hq_last;
    double harmonic_tol = 0.1;
};

struct AnalysisConfig {
    std::string input;
    std::string index_name = "series";
    std::vector<ScanPlan> scans;
    SearchBounds bounds;
    TabooConfig taboo;  ///< seed field ignored; derived from `seed`
    RefineConfig refine;
    std::size_t n_repeats = 3;
    std::vector<double> quantile_levels{0.05, 0.20, 0.80, 0.95};
    LombSettings lomb;
    std::vector<double> unit_root_alphas{0.01, 0.001};
    std::vector<std::size_t> regime_T{10, 20, 30};
    /// p_lppl below this flags "no LPPL diagnosis".
    double diagnosis_threshold = 0.5;
    std::string output_dir = "lppl_out";
    std::optional<std::uint64_t> seed;
    std::size_t workers = 0;
};

/// Strict parse: unknown keys and wrong types throw std::invalid_argument.
AnalysisConfig config_from_json(const nlohmann::json& doc);
/// A relative `input` is resolved against the config file's directory.
AnalysisConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const AnalysisConfig& cfg);

/// Throws std::invalid_argument unless the seed is set and every setting is in range.
void validate_config(const AnalysisConfig& cfg);

/// Replaces cfg.output_dir with $LPPL_OUTPUT_DIR when that is set and non-empty.
void apply_output_dir_env(AnalysisConfig& cfg);

/// Trading-day ordinal of a calendar date: the last bar on or before it, or a
/// Monday-Friday extrapolation past the end of the series.
double ordinal_of_date(const PriceSeries& series, const Date& date);

/// Windows of every plan, in plan order, with exact duplicates dropped.
std::vector<WindowSpec> resolve_windows(const PriceSeries& series, const std::vector<ScanPlan>& plans);

ScanConfig make_scan_config(const AnalysisConfig& cfg);

/// Computed analysis; nothing is written until write_report.
struct Report {
    nlohmann::json document;
    /// (file name, contents) side files, in emission order.
    std::vector<std::pair<std::string, std::string>> files;
    /// 0 on success; 2 when every window was unfittable.
    int exit_code = 0;
};

Report run(const AnalysisConfig& cfg, const PriceSeries& series);
Report run(const AnalysisConfig& cfg);

/// Writes report.json and every side file under `dir`.
void write_report(const Report& report, const std::filesystem::path& dir);

/// Stable text form used for report.json.
std::string render_json(const nlohmann::json& doc);

/// JSON number, or null when not finite.
nlohmann::json finite_or_null(double value);

nlohmann::json fit_to_json(const LpplFit& fit, const PriceSeries& series);
std::string fits_csv(const ScanResult& result, const PriceSeries& series);

}  // namespace lppl

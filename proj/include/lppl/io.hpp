#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lppl/core_model.hpp"
#include "lppl/lomb.hpp"
#include "lppl/regime.hpp"

namespace lppl {

/// Error raised for malformed input files; what() names the offending line.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief Reads `date,open,high,low,close` CSV.
 *
 * ISO-8601 dates, decimal prices, one header row. Rows are sorted by date;
 * duplicated dates, malformed rows and non-positive prices raise InputError
 * naming the line number.
 */
PriceSeries load_csv(const std::filesystem::path& path);
PriceSeries parse_csv(std::istream& in, std::string_view source = "<stream>");

/// Writes the same schema load_csv reads, with shortest round-trip number formatting.
void write_csv(const PriceSeries& series, std::ostream& out);
void write_csv(const PriceSeries& series, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

/// Two-column `omega,power` text.
void write_periodogram_csv(std::span<const PeriodogramPoint> points, std::ostream& out);

/// `date,fraction` text.
void write_regime_csv(std::span<const RegimePoint> points, std::ostream& out);

/// Writes `contents` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace lppl

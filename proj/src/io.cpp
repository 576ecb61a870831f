#include "lppl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lppl {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

struct Row {
    std::size_t line;
    Bar bar;
};

}  // namespace

PriceSeries parse_csv(std::istream& in, std::string_view source) {
    auto fail = [&](std::size_t line, const std::string& what) {
        return InputError(std::string(source) + ":" + std::to_string(line) + ": " + what);
    };
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw fail(1, "empty file, expected header 'date,open,high,low,close'");
    }
    ++line_no;
    std::string_view header = trim(line);
    if (header.starts_with("\xEF\xBB\xBF")) {
        header.remove_prefix(3);
    }
    if (header != "date,open,high,low,close") {
        throw fail(line_no, "expected header 'date,open,high,low,close'");
    }
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != 5) {
            throw fail(line_no, "expected 5 fields, found " + std::to_string(fields.size()));
        }
        Row row{line_no, {}};
        try {
            row.bar.date = parse_date(fields[0]);
        } catch (const std::invalid_argument& e) {
            throw fail(line_no, e.what());
        }
        double* targets[] = {&row.bar.open, &row.bar.high, &row.bar.low, &row.bar.close};
        for (std::size_t k = 0; k < 4; ++k) {
            const std::string_view f = fields[k + 1];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), *targets[k]);
            if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) {
                throw fail(line_no, "malformed price '" + std::string(f) + "'");
            }
            if (!(*targets[k] > 0.0) || !std::isfinite(*targets[k])) {
                throw fail(line_no, "price must be positive, got '" + std::string(f) + "'");
            }
        }
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.bar.date < b.bar.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].bar.date == rows[i - 1].bar.date) {
            const std::size_t later = std::max(rows[i].line, rows[i - 1].line);
            throw fail(later, "duplicate date " + format_date(rows[i].bar.date));
        }
    }
    std::vector<Bar> bars;
    bars.reserve(rows.size());
    for (const Row& r : rows) {
        bars.push_back(r.bar);
    }
    return PriceSeries(std::move(bars));
}

PriceSeries load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    return parse_csv(in, path.string());
}

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) {
        throw std::runtime_error("format_number: conversion failed");
    }
    return {buf, ptr};
}

void write_csv(const PriceSeries& series, std::ostream& out) {
    out << "date,open,high,low,close\n";
    for (const Bar& b : series.bars()) {
        out << format_date(b.date) << ',' << format_number(b.open) << ',' << format_number(b.high) << ','
            << format_number(b.low) << ',' << format_number(b.close) << '\n';
    }
}

void write_csv(const PriceSeries& series, const std::filesystem::path& path) {
    std::ostringstream buf;
    write_csv(series, buf);
    write_text_file(path, buf.str());
}

void write_periodogram_csv(std::span<const PeriodogramPoint> points, std::ostream& out) {
    out << "omega,power\n";
    for (const auto& p : points) {
        out << format_number(p.omega) << ',' << format_number(p.power) << '\n';
    }
}

void write_regime_csv(std::span<const RegimePoint> points, std::ostream& out) {
    out << "date,fraction\n";
    for (const auto& p : points) {
        out << format_date(p.date) << ',' << format_number(p.fraction) << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << contents;
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

}  // namespace lppl

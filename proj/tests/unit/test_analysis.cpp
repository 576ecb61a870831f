#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "lppl/analysis.hpp"
#include "lppl/io.hpp"
#include "oracles.hpp"

using namespace lppl;
using nlohmann::json;

namespace {

const std::filesystem::path kData = LPPL_TEST_DATA_DIR;

json minimal_config() {
    return json::parse(R"({
        "input": "x.csv",
        "seed": 7,
        "scans": [{"mode": "shrinking", "fixed": "2001-07-13", "first": "2000-01-03", "last": "2000-09-29"}]
    })");
}

Date d(const char* s) { return parse_date(s); }

// Every number in the document, recursively.
void collect_numbers(const json& j, std::vector<double>& out) {
    if (j.is_number()) {
        out.push_back(j.get<double>());
    } else if (j.is_structured()) {
        for (const auto& v : j) {
            collect_numbers(v, out);
        }
    }
}

json without_timestamp(json doc) {
    doc.erase("generated_at");
    return doc;
}

// Quick settings so a full run takes a second or two.
AnalysisConfig quick(const char* config_name) {
    auto cfg = load_config(kData / config_name);
    cfg.taboo.n_iterations = 800;
    cfg.n_repeats = 2;
    cfg.lomb.h_grid = {-0.5, 0.0, 0.5};
    cfg.lomb.q_grid = {0.3, 0.7};
    return cfg;
}

}  // namespace

TEST_CASE("config parsing is strict") {
    const auto cfg = config_from_json(minimal_config());
    CHECK(cfg.seed == 7u);
    REQUIRE(cfg.scans.size() == 1u);
    CHECK(cfg.scans[0].step == 5u);
    CHECK(cfg.scans[0].mode == ScanMode::shrinking);
    CHECK(cfg.diagnosis_threshold == 0.5);
    CHECK(cfg.regime_T == std::vector<std::size_t>{10, 20, 30});
    CHECK(cfg.unit_root_alphas == std::vector<double>{0.01, 0.001});
    CHECK_NOTHROW(validate_config(cfg));

    auto unknown = minimal_config();
    unknown["sead"] = 1;
    CHECK_THROWS_AS(config_from_json(unknown), std::invalid_argument);
    auto nested = minimal_config();
    nested["lomb"] = {{"omega_maxx", 30}};
    CHECK_THROWS_AS(config_from_json(nested), std::invalid_argument);
    auto wrong_type = minimal_config();
    wrong_type["n_repeats"] = "three";
    CHECK_THROWS_AS(config_from_json(wrong_type), std::invalid_argument);
    auto negative_seed = minimal_config();
    negative_seed["seed"] = -4;
    CHECK_THROWS_AS(config_from_json(negative_seed), std::invalid_argument);
    auto bad_mode = minimal_config();
    bad_mode["scans"][0]["mode"] = "sliding";
    CHECK_THROWS_AS(config_from_json(bad_mode), std::invalid_argument);
    auto missing = minimal_config();
    missing["scans"][0].erase("first");
    CHECK_THROWS_AS(config_from_json(missing), std::invalid_argument);
    auto bad_date = minimal_config();
    bad_date["scans"][0]["fixed"] = "2001/07/13";
    CHECK_THROWS_AS(config_from_json(bad_date), std::invalid_argument);
}

TEST_CASE("validation") {
    auto no_seed = minimal_config();
    no_seed.erase("seed");
    CHECK_THROWS_AS(validate_config(config_from_json(no_seed)), std::invalid_argument);

    auto alpha = minimal_config();
    alpha["unit_root"] = {{"alphas", {0.02}}};
    CHECK_THROWS_AS(validate_config(config_from_json(alpha)), std::invalid_argument);

    auto zero_t = minimal_config();
    zero_t["regime"] = {{"T", {0, 10}}};
    CHECK_THROWS_AS(validate_config(config_from_json(zero_t)), std::invalid_argument);

    auto m = minimal_config();
    m["search"] = {{"m", {0.0, 0.9}}};
    CHECK_THROWS_AS(validate_config(config_from_json(m)), std::invalid_argument);

    // subcommands without a scan accept an empty list; a full run does not
    auto no_scans = minimal_config();
    no_scans["scans"] = json::array();
    CHECK_NOTHROW(validate_config(config_from_json(no_scans)));
    CHECK_THROWS_AS(run(config_from_json(no_scans), load_csv(kData / "bubble.csv")), std::invalid_argument);
}

TEST_CASE("config survives a JSON round trip") {
    auto doc = minimal_config();
    doc["lomb"] = {{"tc", "2001-08-28"}, {"oversampling", 2.0}};
    doc["quantile_levels"] = {0.1, 0.9};
    doc["scans"].push_back({{"mode", "expanding"}, {"fixed", "2000-01-03"}, {"first", "2001-01-02"},
                            {"last", "2001-07-13"}, {"step", 3}});
    const auto cfg = config_from_json(doc);
    const auto echoed = config_to_json(cfg);
    CHECK(config_to_json(config_from_json(echoed)) == echoed);
    CHECK(echoed["scans"][1]["step"] == 3);
    CHECK(echoed["lomb"]["tc"] == "2001-08-28");
}

TEST_CASE("relative input paths follow the config file") {
    const auto cfg = load_config(kData / "bubble_config.json");
    CHECK(std::filesystem::equivalent(cfg.input, kData / "bubble.csv"));
    CHECK_THROWS_AS(load_config(kData / "missing.json"), std::invalid_argument);
}

TEST_CASE("output directory from the environment") {
    auto cfg = config_from_json(minimal_config());
    cfg.output_dir = "from_config";
    ::unsetenv(kOutputDirEnv);
    apply_output_dir_env(cfg);
    CHECK(cfg.output_dir == "from_config");
    ::setenv(kOutputDirEnv, "", 1);
    apply_output_dir_env(cfg);
    CHECK(cfg.output_dir == "from_config");
    ::setenv(kOutputDirEnv, "/tmp/elsewhere", 1);
    apply_output_dir_env(cfg);
    CHECK(cfg.output_dir == "/tmp/elsewhere");
    ::unsetenv(kOutputDirEnv);
}

TEST_CASE("dates map to trading-day ordinals") {
    const auto s = load_csv(kData / "bubble.csv");
    CHECK(ordinal_of_date(s, d("2000-01-03")) == 0.0);
    CHECK(ordinal_of_date(s, d("2000-01-07")) == 4.0);
    CHECK(ordinal_of_date(s, d("2000-01-08")) == 4.0);  // Saturday
    CHECK(ordinal_of_date(s, d("2000-01-10")) == 5.0);
    CHECK(ordinal_of_date(s, d("2001-07-13")) == 399.0);
    CHECK(ordinal_of_date(s, d("2001-07-16")) == 400.0);
    CHECK(ordinal_of_date(s, d("2001-07-27")) == 409.0);
    CHECK(format_date(s.date_of_ordinal(ordinal_of_date(s, d("2001-08-28")))) == "2001-08-28");
    CHECK_THROWS_AS(ordinal_of_date(s, d("1999-12-31")), std::invalid_argument);
}

TEST_CASE("window resolution") {
    const auto s = load_csv(kData / "bubble.csv");
    const ScanPlan shrink{ScanMode::shrinking, d("2001-07-13"), d("2000-01-03"), d("2000-01-31"), 5};
    const auto w = resolve_windows(s, {shrink});
    REQUIRE(w.size() == 5u);  // t1 = 0, 5, 10, 15, 20 (2000-01-31 is ordinal 20)
    CHECK(w.front() == WindowSpec{0, 399});
    CHECK(w.back() == WindowSpec{20, 399});
    const auto same = resolve_windows(s, {shrink, shrink});
    CHECK(same == w);

    const ScanPlan grow{ScanMode::expanding, d("2000-01-03"), d("2001-07-02"), d("2001-07-15"), 2};
    const auto g = resolve_windows(s, {grow});
    REQUIRE(!g.empty());
    CHECK(g.front() == WindowSpec{0, 390});
    CHECK(g.back().t2 <= 399u);
    for (const auto& x : g) {
        CHECK(x.t1 == 0u);
    }
    const ScanPlan late{ScanMode::shrinking, d("2002-01-01"), d("2000-01-03"), d("2000-02-01"), 5};
    CHECK_THROWS_AS(resolve_windows(s, {late}), std::invalid_argument);
}

TEST_CASE("synthetic bubble report") {
    auto cfg = quick("bubble_config.json");
    const auto series = load_csv(cfg.input);
    const auto report = run(cfg, series);
    const auto& doc = report.document;
    CHECK(report.exit_code == 0);
    CHECK(doc["schema_version"] == kReportSchemaVersion);
    CHECK(doc["software_version"] == kSoftwareVersion);
    CHECK(doc["seed"] == 20240601u);
    const auto& scan = doc["scan"];
    CHECK(scan["n_windows"] == 30);
    CHECK(scan["p_lppl"].get<double>() >= 0.9);
    CHECK(scan["diagnosis"]["lppl_diagnosis"] == true);
    CHECK(scan["diagnosis"]["message"] == "LPPL diagnosis");
    REQUIRE(scan["tc_forecast"]["available"] == true);
    const auto& q = scan["tc_forecast"]["quantiles"];
    REQUIRE(q.size() == 4u);
    const std::string truth = format_date(series.date_of_ordinal(430.0));
    CHECK(q.front()["date"].get<std::string>() <= truth);
    CHECK(q.back()["date"].get<std::string>() >= truth);
    CHECK(q.front()["ordinal"].get<double>() <= 430.0 + 1.0);
    CHECK(scan["fits"].size() == 30u);
    CHECK(scan["survivors"].size() == scan["n_survivors"].get<std::size_t>());

    std::vector<double> numbers;
    collect_numbers(doc, numbers);
    CHECK(!numbers.empty());
    for (double v : numbers) {
        CHECK(std::isfinite(v));
    }

    std::vector<std::string> names;
    for (const auto& [name, contents] : report.files) {
        names.push_back(name);
        CHECK(!contents.empty());
    }
    for (const char* want : {"fits.csv", "unit_root.csv", "regime_T10.csv", "regime_T20.csv", "regime_T30.csv",
                             "periodogram_hq_best.csv"}) {
        CHECK(std::find(names.begin(), names.end(), want) != names.end());
    }
    CHECK(doc["files"].size() == names.size() + 1);  // plus report.json
    CHECK(doc["regime"].size() == 3u);
    CHECK(doc["unit_root"]["rows"][0]["levels"][0]["df_reject_pct"] == 100.0);
    CHECK(doc["lomb"]["residual_peaks"].size() == scan["n_survivors"].get<std::size_t>());
    CHECK(doc["lomb"]["hq"]["cells"].size() == 6u);
    std::size_t fundamental = 0;
    for (const auto& p : doc["lomb"]["residual_peaks"]) {
        fundamental += p.value("label", "") == "fundamental";
    }
    CHECK(fundamental * 10 >= doc["lomb"]["residual_peaks"].size() * 8);

    SUBCASE("same seed, same report") {
        const auto again = run(cfg, series);
        CHECK(render_json(without_timestamp(again.document)) == render_json(without_timestamp(doc)));
        CHECK(again.files == report.files);
    }
    SUBCASE("writing") {
        const auto dir = std::filesystem::temp_directory_path() / "lppl_analysis_report";
        std::filesystem::remove_all(dir);
        write_report(report, dir);
        for (const auto& f : doc["files"]) {
            CHECK(std::filesystem::exists(dir / f.get<std::string>()));
        }
        std::ifstream in(dir / "report.json");
        const auto parsed = json::parse(in);
        CHECK(parsed == doc);
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("exponential fixture is not diagnosed") {
    // One fixed noise realization; see tests/data/README.md.
    const auto cfg = load_config(kData / "exponential_config.json");
    const auto report = run(cfg);
    const auto& scan = report.document["scan"];
    CHECK(report.exit_code == 0);
    CHECK(scan["p_lppl"].get<double>() < 0.5);
    CHECK(scan["diagnosis"]["lppl_diagnosis"] == false);
    CHECK(scan["diagnosis"]["message"] == "no LPPL diagnosis");
}

TEST_CASE("a run where every window fails still produces a report") {
    auto cfg = quick("bubble_config.json");
    cfg.refine.max_iterations = 1;
    cfg.scans[0].step = 60;
    const auto report = run(cfg);
    const auto& scan = report.document["scan"];
    CHECK(report.exit_code == 2);
    CHECK(scan["n_converged"] == 0);
    CHECK(scan["p_lppl"] == 0.0);
    CHECK(scan["tc_forecast"]["available"] == false);
    CHECK(scan["tc_forecast"]["quantiles"].empty());
    CHECK(scan["diagnosis"]["message"] == "no LPPL diagnosis");
    CHECK(report.document["lomb"]["hq"]["available"] == false);
    std::vector<double> numbers;
    collect_numbers(report.document, numbers);
    for (double v : numbers) {
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("helpers") {
    CHECK(finite_or_null(1.5) == 1.5);
    CHECK(finite_or_null(std::nan("")).is_null());
    CHECK(finite_or_null(INFINITY).is_null());
    CHECK(render_json(json{{"a", 1}}).back() == '\n');
    const auto s = load_csv(kData / "bubble.csv");
    LpplFit f;
    f.window = {0, 99};
    const auto j = fit_to_json(f, s);
    CHECK(j["status"] == "unfittable");
    CHECK(j["tc_date"].is_null());
    CHECK(j["t2_date"] == format_date(s.date(99)));
}

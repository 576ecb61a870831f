#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lppl/core_model.hpp"
#include "oracles.hpp"

using namespace lppl;
using std::chrono::day;
using std::chrono::month;
using std::chrono::year;

namespace {

LpplParams sample_params() { return {2.0, -0.5, 0.1, 0.5, 8.0, 1.0, 100.0}; }

}  // namespace

TEST_CASE("parse_date and format_date") {
    CHECK(format_date(parse_date("2007-10-16")) == "2007-10-16");
    CHECK(parse_date("2009-04-31") == Date{year{2009}, month{4}, day{30}});
    CHECK(parse_date("2008-02-30") == Date{year{2008}, month{2}, day{29}});
    CHECK_THROWS_AS(parse_date("2007-13-01"), std::invalid_argument);
    CHECK_THROWS_AS(parse_date("07-10-16"), std::invalid_argument);
    CHECK_THROWS_AS(parse_date("2007-10-16x"), std::invalid_argument);
    CHECK_THROWS_AS(parse_date(""), std::invalid_argument);
}

TEST_CASE("PriceSeries rejects bad input") {
    const Date d0{year{2020}, month{1}, day{6}};
    const Date d1{year{2020}, month{1}, day{7}};
    CHECK_NOTHROW(PriceSeries({{d0, 1, 1, 1, 1}, {d1, 2, 2, 2, 2}}));
    CHECK_THROWS_AS(PriceSeries({{d1, 1, 1, 1, 1}, {d0, 2, 2, 2, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(PriceSeries({{d0, 1, 1, 1, 1}, {d0, 2, 2, 2, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(PriceSeries({{d0, 1, 1, 1, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(PriceSeries({{d0, -1, 1, 1, 1}}), std::invalid_argument);
}

TEST_CASE("trading calendar lookups") {
    const auto s = oracle::series_from_log(std::vector<double>(10, 0.0), Date{year{2021}, month{3}, day{1}});
    // 2021-03-01 is a Monday; bars run Mon 1 .. Fri 12
    CHECK(s.index_on_or_before(Date{year{2021}, month{3}, day{6}}) == 4u);  // Saturday -> Friday
    CHECK(s.index_on_or_before(Date{year{2021}, month{2}, day{26}}) == std::nullopt);
    CHECK(s.index_on_or_before(Date{year{2021}, month{12}, day{1}}) == 9u);
    CHECK(s.date_of_ordinal(3.0) == Date{year{2021}, month{3}, day{4}});
    CHECK(s.date_of_ordinal(3.2) == Date{year{2021}, month{3}, day{5}});  // rounds up
    CHECK(s.date_of_ordinal(10.0) == Date{year{2021}, month{3}, day{15}});  // skips the weekend
    CHECK(s.date_of_ordinal(14.5) == Date{year{2021}, month{3}, day{22}});
}

TEST_CASE("lppl_log_price examples") {
    CHECK(lppl_log_price({3, 0, 0, 0.7, 5, 2, 50}, 5) == doctest::Approx(3.0));
    CHECK(lppl_log_price({0, -1, 0, 1, 0, 0, 10}, 9) == doctest::Approx(-1.0));
    const long double expect = 2.0L - 0.5L * 2.0L + 0.1L * 2.0L * std::cos(8.0L * std::log(4.0L) + 1.0L);
    CHECK(std::fabs(lppl_log_price(sample_params(), 96) - static_cast<double>(expect)) < 1e-14);
    CHECK_THROWS_AS(lppl_log_price(sample_params(), 100), std::domain_error);
    CHECK_THROWS_AS(lppl_log_price(sample_params(), 101), std::domain_error);
}

TEST_CASE("lppl_log_price matches a long double oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 1000; ++k) {
        const LpplParams p{u(rng) * 10, -u(rng), u(rng) - 0.5, 0.05 + u(rng), 2 + 20 * u(rng),
                           2 * std::numbers::pi * u(rng), 500 + 100 * u(rng)};
        const double t = 499 * u(rng);
        const double got = lppl_log_price(p, t);
        const long double want = oracle::lppl_ld(p, t);
        CHECK(std::fabs(got - want) <= 1e-12 * std::max(1.0L, std::fabs(want)));
    }
}

TEST_CASE("phase periodicity") {
    LpplParams p = sample_params();
    LpplParams q = p;
    q.phi += 2 * std::numbers::pi;
    for (double t = 0; t < 99; t += 7) {
        CHECK(lppl_log_price(p, t) == doctest::Approx(lppl_log_price(q, t)).epsilon(1e-13));
    }
}

TEST_CASE("normalized keeps the model and the phase range") {
    LpplParams p{1.0, -0.2, 0.05, 0.4, -6.0, -2.5, 80.0};
    const LpplParams n = p.normalized();
    CHECK(n.omega >= 0.0);
    CHECK(n.phi >= 0.0);
    CHECK(n.phi < 2 * std::numbers::pi);
    for (double t = 0; t < 79; t += 3) {
        CHECK(lppl_log_price(n, t) == doctest::Approx(lppl_log_price(p, t)).epsilon(1e-12));
    }
    CHECK(wrap_phase(-0.1) == doctest::Approx(2 * std::numbers::pi - 0.1));
    CHECK(wrap_phase(2 * std::numbers::pi) == doctest::Approx(0.0));
}

TEST_CASE("super-exponential growth when C = 0") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.02, 0.98);
    for (int k = 0; k < 200; ++k) {
        const LpplParams p{5, -u(rng), 0, u(rng), 8, 1, 300 + 50 * u(rng)};
        double prev = lppl_log_price(p, 0);
        double prev_diff = -INFINITY;
        for (double t = 1; t < 300; t += 1) {
            const double v = lppl_log_price(p, t);
            const double d = v - prev;
            REQUIRE(d > 0);
            REQUIRE(d > prev_diff);
            prev = v;
            prev_diff = d;
        }
    }
}

TEST_CASE("residuals and sse") {
    const LpplParams p = sample_params();
    std::vector<double> y;
    for (int t = 0; t < 90; ++t) {
        y.push_back(lppl_log_price(p, t));
    }
    const auto s = oracle::series_from_log(y);
    const WindowSpec w{5, 80};

    const auto r = residuals(s, p, w);
    REQUIRE(r.size() == w.n_points());
    for (std::size_t k = 0; k < r.size(); ++k) {
        CHECK(r[k].t == w.t1 + k);
        CHECK(std::fabs(r[k].value) < 1e-9);
    }
    CHECK(sse(s, p, w) <= 1e-15 * w.n_points());

    LpplParams shifted = p;
    shifted.A += 0.25;
    for (const auto& e : residuals(s, shifted, w)) {
        CHECK(e.value == doctest::Approx(-0.25).epsilon(1e-9));
    }

    // residuals all equal 2 over 5 points -> 20
    const auto flat = oracle::series_from_log(std::vector<double>(10, 3.0));
    const LpplParams c1{1.0, 0, 0, 0.5, 1, 0, 20};
    CHECK(sse(flat, c1, {0, 4}) == doctest::Approx(20.0));

    CHECK_THROWS_AS(residuals(s, p, {0, 100}), std::invalid_argument);
    LpplParams early = p;
    early.tc = 60;
    CHECK_THROWS_AS(residuals(s, early, w), std::domain_error);
}

TEST_CASE("residuals against direct recomputation on random data") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0, 0.3);
    std::vector<double> y(120);
    for (double& v : y) {
        v = 4 + n(rng);
    }
    const auto s = oracle::series_from_log(y);
    const LpplParams p{4.1, -0.3, 0.02, 0.6, 7.0, 0.3, 140.0};
    const WindowSpec w{10, 110};
    long double total = 0;
    const auto r = residuals(s, p, w);
    for (std::size_t k = 0; k < r.size(); ++k) {
        const std::size_t t = w.t1 + k;
        const long double want = std::log(static_cast<long double>(s[t].close)) - oracle::lppl_ld(p, t);
        CHECK(std::fabs(r[k].value - want) < 1e-12);
        total += want * want;
    }
    CHECK(std::fabs(sse(s, p, w) - total) <= 1e-12 * total);
}

TEST_CASE("validate_window") {
    const auto s = oracle::series_from_log(std::vector<double>(10, 1.0));
    CHECK_NOTHROW(validate_window(s, {0, 9}));
    CHECK_THROWS_AS(validate_window(s, {3, 3}), std::invalid_argument);
    CHECK_THROWS_AS(validate_window(s, {4, 3}), std::invalid_argument);
    CHECK_THROWS_AS(validate_window(s, {0, 10}), std::invalid_argument);
    CHECK(WindowSpec{2, 7}.n_points() == 6u);
}

TEST_CASE("fit status names") {
    CHECK(to_string(FitStatus::converged) == "converged");
    CHECK(to_string(FitStatus::not_converged) == "not_converged");
    CHECK(to_string(FitStatus::unfittable) == "unfittable");
}

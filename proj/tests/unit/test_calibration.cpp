#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lppl/calibration.hpp"
#include "lppl/synth.hpp"
#include "oracles.hpp"

using namespace lppl;

namespace {

const LpplParams kTruth{7.0, -0.07, 0.01, 0.5, 8.0, 1.0, 430.0};

PriceSeries exact_series(const LpplParams& p, std::size_t n) {
    std::vector<double> y;
    for (std::size_t t = 0; t < n; ++t) {
        y.push_back(lppl_log_price(p, static_cast<double>(t)));
    }
    return oracle::series_from_log(y);
}

PriceSeries noisy_series(const LpplParams& p, std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> e(0, sigma);
    std::vector<double> y;
    for (std::size_t t = 0; t < n; ++t) {
        y.push_back(lppl_log_price(p, static_cast<double>(t)) + e(rng));
    }
    return oracle::series_from_log(y);
}

bool close_rel(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b)); }

}  // namespace

TEST_CASE("slaving recovers exact linear parameters") {
    const auto s = exact_series(kTruth, 400);
    const WindowSpec w{0, 399};
    const auto sol = solve_linear_params(s, w, kTruth.nonlinear());
    CHECK(close_rel(sol.params.A, kTruth.A, 1e-8));
    CHECK(close_rel(sol.params.B, kTruth.B, 1e-8));
    CHECK(close_rel(sol.params.C, kTruth.C, 1e-8));
    CHECK(sol.sse < 1e-18);
}

TEST_CASE("slaving on a constant series") {
    const auto s = oracle::series_from_log(std::vector<double>(60, 2.5));
    const auto sol = solve_linear_params(s, {0, 59}, {80.0, 0.6, 7.0, 0.4});
    CHECK(sol.params.A == doctest::Approx(2.5).epsilon(1e-8));
    CHECK(std::fabs(sol.params.B) < 1e-8);
    CHECK(std::fabs(sol.params.C) < 1e-8);
}

TEST_CASE("slaving agrees with a long double normal-equation oracle") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 100; ++k) {
        const auto s = noisy_series(kTruth, 300, 0.02, 100 + k);
        const WindowSpec w{static_cast<std::size_t>(u(rng) * 100), 299};
        const NonlinearParams nl{300.5 + 100 * u(rng), 0.1 + 0.85 * u(rng), 3 + 15 * u(rng),
                                 2 * std::numbers::pi * u(rng)};
        const auto got = solve_linear_params(s, w, nl);
        const auto want = oracle::slaved(s, w, nl);
        CHECK(close_rel(got.params.A, want.A, 1e-10));
        CHECK(close_rel(got.params.B, want.B, 1e-10));
        CHECK(close_rel(got.params.C, want.C, 1e-10));
        CHECK(std::fabs(got.sse - want.sse) <= 1e-10 * want.sse);
    }
}

TEST_CASE("slaving beats a brute-force (A, B, C) grid") {
    const auto s = noisy_series(kTruth, 200, 0.02, 3);
    const WindowSpec w{20, 199};
    const NonlinearParams nl{240.0, 0.45, 7.5, 2.0};
    const auto sol = solve_linear_params(s, w, nl);
    std::vector<double> f, g, y;
    for (std::size_t t = w.t1; t <= w.t2; ++t) {
        const double x = nl.tc - t;
        f.push_back(std::pow(x, nl.m));
        g.push_back(f.back() * std::cos(nl.omega * std::log(x) + nl.phi));
        y.push_back(s.log_close(t));
    }
    const int n = 50;
    double best = INFINITY;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int l = 0; l < n; ++l) {
                const double A = sol.params.A * (1 + 0.02 * (i - n / 2) / n);
                const double B = sol.params.B * (1 + 0.2 * (j - n / 2) / n);
                const double C = sol.params.C * (1 + 0.5 * (l - n / 2) / n) + 1e-4 * (l - n / 2) / n;
                double e = 0;
                for (std::size_t k = 0; k < y.size(); ++k) {
                    const double r = y[k] - A - B * f[k] - C * g[k];
                    e += r * r;
                }
                best = std::min(best, e);
            }
        }
    }
    CHECK(sol.sse <= best);
}

TEST_CASE("slaving is locally optimal") {
    const auto s = noisy_series(kTruth, 200, 0.02, 4);
    const WindowSpec w{0, 199};
    const NonlinearParams nl{250.0, 0.6, 9.0, 0.5};
    const auto sol = solve_linear_params(s, w, nl);
    for (int axis = 0; axis < 3; ++axis) {
        for (double d : {-1e-3, 1e-3}) {
            LpplParams p = LpplParams::combine(sol.params, nl);
            (axis == 0 ? p.A : axis == 1 ? p.B : p.C) += d;
            CHECK(sse(s, p, w) >= sol.sse);
        }
    }
}

TEST_CASE("slaving errors") {
    const auto s = exact_series(kTruth, 100);
    CHECK_THROWS_AS(solve_linear_params(s, {0, 99}, {99.0, 0.5, 8, 1}), std::domain_error);
    CHECK_THROWS_AS(solve_linear_params(s, {0, 2}, {50.0, 0.5, 8, 1}), std::invalid_argument);
    // m = 0 makes f identically 1, collinear with the intercept
    CHECK_THROWS_AS(solve_linear_params(s, {0, 99}, {150.0, 0.0, 8, 1}), SingularSystemError);
    // omega = phi = 0 makes g equal to f
    CHECK_THROWS_AS(solve_linear_params(s, {0, 99}, {150.0, 0.5, 0, 0}), SingularSystemError);
}

TEST_CASE("search space") {
    const auto sp = SearchSpace::for_window({100, 300});
    CHECK(sp.tc.lo == doctest::Approx(301.0));
    CHECK(sp.tc.hi == doctest::Approx(400.0));
    CHECK(sp.m.lo == doctest::Approx(0.01));
    CHECK(sp.m.hi == doctest::Approx(1.2));
    CHECK(sp.omega.lo == doctest::Approx(2.0));
    CHECK(sp.omega.hi == doctest::Approx(25.0));
    CHECK(sp.phi.lo == doctest::Approx(0.0));
    CHECK(sp.phi.hi == doctest::Approx(2 * std::numbers::pi));
    CHECK_NOTHROW(sp.validate(300));
    SearchSpace bad = sp;
    bad.tc.lo = 300.0;
    CHECK_THROWS_AS(bad.validate(300), std::invalid_argument);
    bad = sp;
    bad.m = {0.8, 0.2};
    CHECK_THROWS_AS(bad.validate(300), std::invalid_argument);
}

TEST_CASE("taboo candidates: count, order, bounds, determinism") {
    const auto s = noisy_series(kTruth, 400, 0.01, 8);
    const WindowSpec w{0, 399};
    const auto sp = SearchSpace::for_window(w);
    TabooConfig cfg;
    cfg.seed = 77;
    const auto a = taboo_candidates(s, w, sp, cfg);
    const auto b = taboo_candidates(s, w, sp, cfg);
    REQUIRE(a.size() == cfg.n_candidates);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].params == b[i].params);
        CHECK(a[i].sse == b[i].sse);
        CHECK(sp.contains(a[i].params));
        if (i > 0) {
            CHECK(a[i - 1].sse <= a[i].sse);
        }
        const auto sol = solve_linear_params(s, w, a[i].params);
        CHECK(a[i].sse == doctest::Approx(sol.sse).epsilon(1e-9));
    }
    cfg.seed = 78;
    const auto c = taboo_candidates(s, w, sp, cfg);
    CHECK_FALSE(c.front().params == a.front().params);
}

TEST_CASE("taboo candidates on a collapsed space") {
    const auto s = noisy_series(kTruth, 200, 0.01, 9);
    const WindowSpec w{0, 199};
    const NonlinearParams pt{260.0, 0.5, 8.0, 1.0};
    TabooConfig cfg;
    cfg.n_iterations = 50;
    const auto c = taboo_candidates(s, w, SearchSpace::point(pt), cfg);
    REQUIRE(c.size() == cfg.n_candidates);
    for (const auto& e : c) {
        CHECK(e.params == pt);
    }
}

TEST_CASE("refine at the truth is a fixed point") {
    const auto s = exact_series(kTruth, 400);
    const WindowSpec w{0, 399};
    const auto fit = refine(s, w, kTruth.nonlinear());
    CHECK(fit.converged());
    CHECK(fit.sse < 1e-20);
    CHECK(fit.params.m == doctest::Approx(kTruth.m).epsilon(1e-9));
    CHECK(fit.params.tc == doctest::Approx(kTruth.tc).epsilon(1e-9));
}

TEST_CASE("refine recovers the truth from a perturbed start") {
    const auto s = exact_series(kTruth, 400);
    const WindowSpec w{0, 399};
    const NonlinearParams start{kTruth.tc + 6.0, kTruth.m * 1.08, kTruth.omega * 0.96, kTruth.phi + 0.2};
    const auto fit = refine(s, w, start);
    CHECK(fit.converged());
    CHECK(std::fabs(fit.params.m / kTruth.m - 1) < 1e-3);
    CHECK(std::fabs(fit.params.omega / kTruth.omega - 1) < 1e-3);
    CHECK(std::fabs(fit.params.tc - kTruth.tc) < 0.5);
    CHECK(passes_lppl_filter(fit));
}

TEST_CASE("refine never increases sse and leaves a flat gradient when converged") {
    const auto s = noisy_series(kTruth, 300, 0.01, 12);
    const WindowSpec w{0, 299};
    const auto sp = SearchSpace::for_window(w);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0, 1);
    std::size_t n_converged = 0;
    for (int k = 0; k < 100; ++k) {
        const NonlinearParams start{sp.tc.lo + u(rng) * sp.tc.width(), sp.m.lo + u(rng) * sp.m.width(),
                                    sp.omega.lo + u(rng) * sp.omega.width(), sp.phi.lo + u(rng) * sp.phi.width()};
        double initial = INFINITY;
        try {
            initial = solve_linear_params(s, w, start).sse;
        } catch (const SingularSystemError&) {
            continue;
        }
        const auto fit = refine(s, w, start);
        if (fit.status == FitStatus::unfittable) {
            continue;
        }
        CHECK(fit.sse <= initial);
        CHECK(fit.params.tc > w.t2);
        CHECK(fit.sse == doctest::Approx(sse(s, fit.params, w)).epsilon(1e-9));
        if (fit.converged()) {
            ++n_converged;
            CHECK(relative_gradient(s, w, fit.params) <= std::sqrt(RefineConfig{}.grad_tol));
        }
    }
    CHECK(n_converged > 50);
}

TEST_CASE("lppl filter") {
    const WindowSpec w{0, 100};
    CHECK(passes_lppl_filter(LpplParams{1, -0.5, 0.1, 0.5, 8, 1, 110}, w));
    CHECK_FALSE(passes_lppl_filter(LpplParams{1, 0.5, 0.1, 0.5, 8, 1, 110}, w));
    CHECK_FALSE(passes_lppl_filter(LpplParams{1, -0.5, 0.1, 1.0, 8, 1, 110}, w));
    CHECK_FALSE(passes_lppl_filter(LpplParams{1, -0.5, 0.1, 0.0, 8, 1, 110}, w));
    CHECK_FALSE(passes_lppl_filter(LpplParams{1, -0.5, 0.1, 0.5, 8, 1, 100}, w));
    CHECK_FALSE(passes_lppl_filter(LpplParams{1, 0.0, 0.1, 0.5, 8, 1, 110}, w));
    LpplFit fit;
    fit.params = {1, -0.5, 0.1, 0.5, 8, 1, 110};
    fit.window = w;
    CHECK(passes_lppl_filter(fit));
}

TEST_CASE("fit_window selection rule") {
    SynthSpec spec;
    spec.params = kTruth;
    spec.n_days = 400;
    spec.residual = Ar1Residual{0.9, 0.01};
    spec.seed = 5;
    const auto s = generate(spec);
    const WindowSpec w{0, 399};
    const auto sp = SearchSpace::for_window(w);
    TabooConfig cfg;
    cfg.seed = 1234;

    auto one_pass = [&](std::size_t r) {
        TabooConfig run = cfg;
        run.seed = repeat_seed(cfg.seed, r);
        LpplFit best;
        best.sse = INFINITY;
        for (const auto& c : taboo_candidates(s, w, sp, run)) {
            const auto f = refine(s, w, c.params);
            if (f.status != FitStatus::unfittable && f.sse < best.sse) {
                best = f;
            }
        }
        return best;
    };

    const auto single = fit_window(s, w, sp, cfg, 1);
    const auto manual = one_pass(0);
    CHECK(single.sse == manual.sse);
    CHECK(single.params == manual.params);
    CHECK(single.rng_seed == repeat_seed(cfg.seed, 0));

    const auto three = fit_window(s, w, sp, cfg, 3);
    const double expect = std::min({manual.sse, one_pass(1).sse, one_pass(2).sse});
    CHECK(three.sse == expect);
    CHECK(passes_lppl_filter(three));
    CHECK(three.passes_filter == passes_lppl_filter(three));

    const auto again = fit_window(s, w, sp, cfg, 3);
    CHECK(again.params == three.params);
    CHECK(again.sse == three.sse);

    CHECK_THROWS_AS(fit_window(s, w, sp, cfg, 0), std::invalid_argument);
}

TEST_CASE("noise-free data: best taboo candidate refines close to the truth") {
    const auto s = exact_series(kTruth, 400);
    const WindowSpec w{0, 399};
    TabooConfig cfg;
    cfg.seed = 99;
    const auto fit = fit_window(s, w, SearchSpace::for_window(w), cfg, 1);
    CHECK(std::fabs((fit.params.tc - w.t2) / (kTruth.tc - w.t2) - 1) < 0.1);
    CHECK(std::fabs(fit.params.m / kTruth.m - 1) < 0.1);
    CHECK(std::fabs(fit.params.omega / kTruth.omega - 1) < 0.1);
}

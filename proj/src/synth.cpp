#include "lppl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "lppl/seed.hpp"

namespace lppl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void validate(const ResidualModel& model) {
    if (const auto* ar = std::get_if<Ar1Residual>(&model)) {
        if (!(std::abs(ar->a) < 1.0) || !(ar->sigma >= 0.0)) {
            throw std::invalid_argument("synth: AR(1) residuals need |a| < 1 and sigma >= 0");
        }
    }
    if (const auto* w = std::get_if<WhiteResidual>(&model); w && !(w->sigma >= 0.0)) {
        throw std::invalid_argument("synth: white residuals need sigma >= 0");
    }
}

std::vector<Date> weekday_calendar(Date start, std::size_t n) {
    namespace chr = std::chrono;
    std::vector<Date> out;
    out.reserve(n);
    chr::sys_days day{start};
    while (out.size() < n) {
        const chr::weekday wd{day};
        if (wd != chr::Saturday && wd != chr::Sunday) {
            out.emplace_back(day);
        }
        day += chr::days{1};
    }
    return out;
}

}  // namespace

std::vector<double> residual_path(const ResidualModel& model, std::size_t n, std::uint64_t seed) {
    validate(model);
    std::mt19937_64 rng(derive_seed(seed, "synth-residual"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> out(n, 0.0);
    std::visit(overloaded{
                   [](const NoResidual&) {},
                   [&](const WhiteResidual& w) {
                       for (double& v : out) {
                           v = w.sigma * gauss(rng);
                       }
                   },
                   [&](const Ar1Residual& ar) {
                       double prev = ar.sigma / std::sqrt(1.0 - ar.a * ar.a) * gauss(rng);
                       for (double& v : out) {
                           v = prev;
                           prev = ar.a * prev + ar.sigma * gauss(rng);
                       }
                   },
               },
               model);
    return out;
}

PriceSeries generate(const SynthSpec& spec) {
    if (spec.n_days < 10) {
        throw std::invalid_argument("synth: n_days must be >= 10");
    }
    if (!(spec.params.tc > static_cast<double>(spec.n_days))) {
        throw std::invalid_argument("synth: tc must exceed n_days (singularity inside sample)");
    }
    if (!spec.start_date.ok()) {
        throw std::invalid_argument("synth: invalid start date");
    }
    const auto resid = residual_path(spec.residual, spec.n_days, spec.seed);
    const auto dates = weekday_calendar(spec.start_date, spec.n_days);

    std::mt19937_64 open_rng(derive_seed(spec.seed, "synth-open"));
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Bar> bars;
    bars.reserve(spec.n_days);
    double prev_close = 0.0;
    for (std::size_t t = 0; t < spec.n_days; ++t) {
        const double close = std::exp(lppl_log_price(spec.params, static_cast<double>(t)) + resid[t]);
        const double anchor = t == 0 ? close : prev_close;
        const double open = anchor * std::exp(spec.open_noise * gauss(open_rng));
        bars.push_back({dates[t], open, std::max(open, close), std::min(open, close), close});
        prev_close = close;
    }
    return PriceSeries(std::move(bars));
}

}  // namespace lppl

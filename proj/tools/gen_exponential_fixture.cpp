// Writes tests/data/exponential.csv: ln close = 5 + 0.001 t + AR(1) noise, no
// bubble component. Usage: gen_exponential_fixture SEED > file.csv
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <random>

#include "lppl/io.hpp"
#include "lppl/synth.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: gen_exponential_fixture SEED\n";
        return 1;
    }
    const std::uint64_t seed = std::strtoull(argv[1], nullptr, 10);
    const std::size_t n = 400;
    const auto noise = lppl::residual_path(lppl::Ar1Residual{0.9, 0.01}, n, seed);
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<double> z(0, 1);
    std::chrono::sys_days day{lppl::Date{std::chrono::year{2000}, std::chrono::January, std::chrono::day{3}}};
    std::vector<lppl::Bar> bars;
    double prev = std::exp(5.0 + noise[0]);
    for (std::size_t t = 0; t < n; ++t) {
        while (std::chrono::weekday{day}.iso_encoding() > 5) {
            day += std::chrono::days{1};
        }
        const double close = std::exp(5.0 + 0.001 * static_cast<double>(t) + noise[t]);
        const double open = prev * std::exp(0.002 * z(rng));
        bars.push_back({lppl::Date{day}, open, std::max(open, close) * 1.001, std::min(open, close) * 0.999, close});
        prev = close;
        day += std::chrono::days{1};
    }
    lppl::write_csv(lppl::PriceSeries(std::move(bars)), std::cout);
}

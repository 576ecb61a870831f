// Simulates lower-tail quantiles of the constant-only Dickey-Fuller tau under the
// unit-root null and prints them as the table compiled into the library.
//
//   gen_critical_values --reps 1000000 --seed 20091015 > src/df_critical_values.inc

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <random>
#include <vector>

#include "lppl/seed.hpp"
#include "lppl/stationarity.hpp"

namespace {

double quantile(std::vector<double>& v, double p) {
    const auto k = static_cast<std::size_t>(p * static_cast<double>(v.size() - 1));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulate Dickey-Fuller tau critical values"};
    std::size_t reps = 1000000;
    std::uint64_t seed = 20091015;
    std::vector<std::size_t> sizes{19, 25, 30, 40, 50, 75, 100, 150, 200, 300, 500, 750, 1000};
    app.add_option("--reps", reps, "replications per sample size");
    app.add_option("--seed", seed, "base seed");
    app.add_option("--sizes", sizes, "regression sample sizes T");
    CLI11_PARSE(app, argc, argv);

    std::printf("// Generated by tools/gen_critical_values --reps %zu --seed %llu. Do not edit.\n", reps,
                static_cast<unsigned long long>(seed));
    std::printf("// Lower-tail quantiles of the constant-only Dickey-Fuller tau for a driftless\n");
    std::printf("// Gaussian random walk with T regression observations.\n");
    std::printf("constexpr std::size_t kTableReplications = %zu;\n", reps);
    std::printf("constexpr std::uint64_t kTableSeed = %lluULL;\n", static_cast<unsigned long long>(seed));
    std::printf("constexpr SimulatedQuantiles kTable[] = {\n");
    std::vector<double> stats(reps);
    std::vector<double> walk;
    for (std::size_t T : sizes) {
        std::mt19937_64 rng(lppl::derive_seed(seed, "df-null", T));
        std::normal_distribution<double> gauss(0.0, 1.0);
        walk.assign(T + 1, 0.0);
        for (std::size_t r = 0; r < reps; ++r) {
            for (std::size_t t = 1; t <= T; ++t) {
                walk[t] = walk[t - 1] + gauss(rng);
            }
            stats[r] = lppl::dickey_fuller_statistic(walk);
        }
        const double q001 = quantile(stats, 0.001);
        const double q01 = quantile(stats, 0.01);
        const double q05 = quantile(stats, 0.05);
        const double q10 = quantile(stats, 0.10);
        std::printf("    {%zu, %.4f, %.4f, %.4f, %.4f},\n", T, q001, q01, q05, q10);
        std::fflush(stdout);
    }
    std::printf("};\n");
    return 0;
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "lppl/core_model.hpp"

namespace lppl {

struct NoResidual {};

/// r_t = a r_{t-1} + sigma eps_t, started from its stationary law.
struct Ar1Residual {
    double a = 0.9;
    double sigma = 0.01;
};

struct WhiteResidual {
    double sigma = 0.01;
};

using ResidualModel = std::variant<NoResidual, Ar1Residual, WhiteResidual>;

/// Synthetic LPPL price path: ln close(t) = model(t) + residual(t), t = 0..n_days-1.
struct SynthSpec {
    LpplParams params;
    std::size_t n_days = 0;
    ResidualModel residual = NoResidual{};
    std::uint64_t seed = 0;
    /// First bar; later bars follow a Monday-Friday calendar.
    Date start_date{std::chrono::year{2000}, std::chrono::January, std::chrono::day{3}};
    /// Log-scale noise between the previous close and the next open.
    double open_noise = 0.002;
};

/// Residual path alone (no prices), same draws as generate() uses.
std::vector<double> residual_path(const ResidualModel& model, std::size_t n, std::uint64_t seed);

/**
 * @brief Generates a seeded synthetic bubble.
 *
 * Opens are the previous close perturbed by independent log-normal noise;
 * high/low bracket open and close. Throws std::invalid_argument when tc <= n_days,
 * n_days < 10, or an AR(1) coefficient has |a| >= 1.
 */
PriceSeries generate(const SynthSpec& spec);

}  // namespace lppl

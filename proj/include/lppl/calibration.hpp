#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lppl/core_model.hpp"

namespace lppl {

/// Raised when the slaved (A, B, C) normal equations are rank-deficient.
class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed interval; lo == hi collapses a dimension to a point.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

/// User-facing search bounds, turned into a SearchSpace per window.
struct SearchBounds {
    Interval m{0.01, 1.2};
    Interval omega{2.0, 25.0};
    /// tc upper bound is t2 + horizon_fraction * (t2 - t1).
    double tc_horizon_fraction = 0.5;
    /// tc lower bound is t2 + tc_min_offset (trading days).
    double tc_min_offset = 1.0;
};

/// Box over the nonlinear parameters (tc, m, omega, phi) for one window.
struct SearchSpace {
    Interval tc;
    Interval m;
    Interval omega;
    Interval phi;

    static SearchSpace for_window(const WindowSpec& window, const SearchBounds& bounds = {});
    static SearchSpace point(const NonlinearParams& p);

    bool contains(const NonlinearParams& p) const;
    /// Throws std::invalid_argument on empty ranges or tc bounds not after `window_end`.
    void validate(std::size_t window_end) const;
};

struct TabooConfig {
    std::size_t n_candidates = 10;
    std::size_t n_iterations = 2000;
    /// Gaussian neighbours drawn per iteration.
    std::size_t n_neighbors = 4;
    /// Neighbourhood step, as a fraction of each parameter range.
    double step_fraction = 0.05;
    std::size_t taboo_length = 50;
    std::size_t cells_per_dim = 20;
    /// Iterations without improving the incumbent before a random restart.
    std::size_t stagnation_limit = 200;
    std::uint64_t seed = 0;
};

struct RefineConfig {
    double rel_sse_tol = 1e-10;
    double grad_tol = 1e-6;
    std::size_t max_iterations = 500;
};

struct LinearSolution {
    LinearParams params;
    double sse = 0.0;
};

/**
 * @brief Slaves (A, B, C) to fixed nonlinear parameters.
 *
 * Solves the 3x3 normal equations of ln p = A + B f + C g with f = x^m and
 * g = x^m cos(omega ln x + phi). Throws SingularSystemError when the Gram matrix
 * is numerically rank-deficient, std::domain_error when tc <= t2.
 */
LinearSolution solve_linear_params(const PriceSeries& series, const WindowSpec& window,
                                   const NonlinearParams& nonlinear);

struct TabooCandidate {
    NonlinearParams params;
    double sse = 0.0;
};

/// Best `cfg.n_candidates` points found by a taboo search over `space`, ranked
/// by slaved sse. Deterministic in cfg.seed.
std::vector<TabooCandidate> taboo_candidates(const PriceSeries& series, const WindowSpec& window,
                                             const SearchSpace& space, const TabooConfig& cfg);

/// Largest |d sse / d theta_i| over the nonlinear parameters, normalised to a
/// cosine between the residual vector and each Jacobian column.
double relative_gradient(const PriceSeries& series, const WindowSpec& window, const LpplParams& params);

/**
 * @brief Levenberg-Marquardt refinement of one candidate.
 *
 * Starts from the candidate with slaved linear parameters and only ever accepts
 * steps that lower the sse, so the result is never worse than the start. Converged
 * means relative_gradient <= grad_tol, or an sse change below rel_sse_tol with
 * relative_gradient <= sqrt(grad_tol). Linear parameters are re-slaved at the
 * solution. A candidate that cannot be slaved or whose tc ends at or before t2
 * comes back with status unfittable.
 */
LpplFit refine(const PriceSeries& series, const WindowSpec& window, const NonlinearParams& candidate,
               const RefineConfig& cfg = {});

/// tc > t2, B < 0 and 0 < m < 1, all strict.
bool passes_lppl_filter(const LpplFit& fit);
bool passes_lppl_filter(const LpplParams& params, const WindowSpec& window);

/// Taboo search plus refinement of every candidate, repeated `n_repeats` times
/// with seeds derived from cfg.seed; the lowest-sse fit wins (smaller seed on ties).
LpplFit fit_window(const PriceSeries& series, const WindowSpec& window, const SearchSpace& space,
                   const TabooConfig& cfg, std::size_t n_repeats = 3, const RefineConfig& refine_cfg = {});

/// Seed used by repeat `r` of fit_window.
std::uint64_t repeat_seed(std::uint64_t base_seed, std::size_t r);

}  // namespace lppl

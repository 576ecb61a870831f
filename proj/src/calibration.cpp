#include "lppl/calibration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_set>

#include "basis_kernel.hpp"
#include "lppl/seed.hpp"

namespace lppl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Smallest squared pivot of the unit-diagonal Gram matrix accepted as full rank.
constexpr double kSingularPivot = 1e-12;

using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;

enum Index : int { kA = 0, kB, kC, kTc, kM, kOmega, kPhi };

std::optional<LinearParams> solve_gram(const Eigen::Matrix3d& gram, const Eigen::Vector3d& rhs) {
    if (!gram.allFinite() || !rhs.allFinite()) {
        return std::nullopt;
    }
    const Eigen::Vector3d diag = gram.diagonal();
    if ((diag.array() <= 0.0).any()) {
        return std::nullopt;
    }
    const Eigen::Vector3d scale = diag.cwiseSqrt().cwiseInverse();
    const Eigen::Matrix3d scaled = scale.asDiagonal() * gram * scale.asDiagonal();
    const Eigen::LLT<Eigen::Matrix3d> llt(scaled);
    if (llt.info() != Eigen::Success) {
        return std::nullopt;
    }
    const Eigen::Matrix3d lower = llt.matrixL();
    const double pivot = lower.diagonal().minCoeff();
    if (!(pivot * pivot > kSingularPivot)) {
        return std::nullopt;
    }
    const Eigen::Vector3d beta = scale.asDiagonal() * llt.solve(scale.asDiagonal() * rhs);
    return LinearParams{beta[0], beta[1], beta[2]};
}

/// Log-prices of one window plus scratch buffers for repeated objective calls.
class WindowData {
public:
    WindowData(const PriceSeries& series, const WindowSpec& window) : t2_(static_cast<double>(window.t2)) {
        validate_window(series, window);
        t_.reserve(window.n_points());
        y_.reserve(window.n_points());
        for (std::size_t t = window.t1; t <= window.t2; ++t) {
            t_.push_back(static_cast<double>(t));
            y_.push_back(series.log_close(t));
        }
        f_.resize(t_.size());
        g_.resize(t_.size());
    }

    double t2() const { return t2_; }
    std::size_t size() const { return t_.size(); }

    std::optional<LinearSolution> slave(const NonlinearParams& nl) {
        if (!(nl.tc > t2_)) {
            return std::nullopt;
        }
        Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
        Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
        const std::size_t n = t_.size();
        detail::lppl_basis(t_.data(), n, nl.tc, nl.m, nl.omega, nl.phi, f_.data(), g_.data());
        double sf = 0, sg = 0, sff = 0, sfg = 0, sgg = 0, sy = 0, syf = 0, syg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = f_[i];
            const double g = g_[i];
            const double y = y_[i];
            sf += f;
            sg += g;
            sff += f * f;
            sfg += f * g;
            sgg += g * g;
            sy += y;
            syf += y * f;
            syg += y * g;
        }
        gram << static_cast<double>(n), sf, sg, sf, sff, sfg, sg, sfg, sgg;
        rhs << sy, syf, syg;
        const auto lin = solve_gram(gram, rhs);
        if (!lin) {
            return std::nullopt;
        }
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y_[i] - lin->A - lin->B * f_[i] - lin->C * g_[i];
            total += r * r;
        }
        if (!std::isfinite(total)) {
            return std::nullopt;
        }
        return LinearSolution{*lin, total};
    }

    double sse(const Vec7& p) {
        detail::lppl_basis(t_.data(), t_.size(), p[kTc], p[kM], p[kOmega], p[kPhi], f_.data(), g_.data());
        double total = 0.0;
        for (std::size_t i = 0; i < t_.size(); ++i) {
            const double r = y_[i] - p[kA] - p[kB] * f_[i] - p[kC] * g_[i];
            total += r * r;
        }
        return total;
    }

    /// Accumulates J^T J and J^T r for the model Jacobian at p; returns the sse.
    double normal_system(const Vec7& p, Mat7& jtj, Vec7& jtr) const {
        jtj.setZero();
        jtr.setZero();
        double total = 0.0;
        Vec7 row;
        for (std::size_t i = 0; i < t_.size(); ++i) {
            const double x = p[kTc] - t_[i];
            const double lx = std::log(x);
            const double xm = std::exp(p[kM] * lx);
            const double th = p[kOmega] * lx + p[kPhi];
            const double c = std::cos(th);
            const double s = std::sin(th);
            const double trend = p[kB] + p[kC] * c;
            const double r = y_[i] - p[kA] - xm * trend;
            row[kA] = 1.0;
            row[kB] = xm;
            row[kC] = xm * c;
            row[kTc] = (xm / x) * (p[kM] * trend - p[kC] * p[kOmega] * s);
            row[kM] = lx * xm * trend;
            row[kOmega] = -p[kC] * xm * s * lx;
            row[kPhi] = -p[kC] * xm * s;
            jtj.selfadjointView<Eigen::Lower>().rankUpdate(row);
            jtr += r * row;
            total += r * r;
        }
        jtj = jtj.selfadjointView<Eigen::Lower>();
        return total;
    }

private:
    double t2_;
    std::vector<double> t_;
    std::vector<double> y_;
    std::vector<double> f_;
    std::vector<double> g_;
};

Vec7 pack(const LpplParams& p) {
    Vec7 v;
    v << p.A, p.B, p.C, p.tc, p.m, p.omega, p.phi;
    return v;
}

LpplParams unpack(const Vec7& v) {
    return LpplParams{v[kA], v[kB], v[kC], v[kM], v[kOmega], v[kPhi], v[kTc]};
}

double gradient_cosine(const Mat7& jtj, const Vec7& jtr, double sse) {
    if (!(sse > 0.0)) {
        return 0.0;
    }
    double worst = 0.0;
    for (int k = kTc; k <= kPhi; ++k) {
        const double col = jtj(k, k);
        if (col > 0.0) {
            worst = std::max(worst, std::abs(jtr[k]) / std::sqrt(col * sse));
        }
    }
    return worst;
}

double reflect(double v, const Interval& range) {
    if (range.width() <= 0.0) {
        return range.lo;
    }
    if (v < range.lo) {
        v = range.lo + (range.lo - v);
    }
    if (v > range.hi) {
        v = range.hi - (v - range.hi);
    }
    return std::clamp(v, range.lo, range.hi);
}

}  // namespace

SearchSpace SearchSpace::for_window(const WindowSpec& window, const SearchBounds& bounds) {
    const double t2 = static_cast<double>(window.t2);
    const double span = static_cast<double>(window.t2 - window.t1);
    const double lo = t2 + bounds.tc_min_offset;
    const double hi = std::max(lo, t2 + bounds.tc_horizon_fraction * span);
    return {{lo, hi}, bounds.m, bounds.omega, {0.0, kTwoPi}};
}

SearchSpace SearchSpace::point(const NonlinearParams& p) {
    return {{p.tc, p.tc}, {p.m, p.m}, {p.omega, p.omega}, {p.phi, p.phi}};
}

bool SearchSpace::contains(const NonlinearParams& p) const {
    return tc.contains(p.tc) && m.contains(p.m) && omega.contains(p.omega) && phi.contains(p.phi);
}

void SearchSpace::validate(std::size_t window_end) const {
    for (const Interval* r : {&tc, &m, &omega, &phi}) {
        if (!(r->lo <= r->hi) || !std::isfinite(r->lo) || !std::isfinite(r->hi)) {
            throw std::invalid_argument("search space: empty or non-finite range");
        }
    }
    if (!(tc.lo > static_cast<double>(window_end))) {
        throw std::invalid_argument("search space: tc range must start after the window end");
    }
    if (omega.lo < 0.0) {
        throw std::invalid_argument("search space: omega must be non-negative");
    }
}

LinearSolution solve_linear_params(const PriceSeries& series, const WindowSpec& window,
                                   const NonlinearParams& nonlinear) {
    validate_window(series, window);
    if (window.n_points() < 4) {
        throw std::invalid_argument("solve_linear_params: window needs at least 4 points");
    }
    if (!(nonlinear.tc > static_cast<double>(window.t2))) {
        throw std::domain_error("solve_linear_params: tc must lie after the window end");
    }
    WindowData data(series, window);
    auto sol = data.slave(nonlinear);
    if (!sol) {
        throw SingularSystemError("solve_linear_params: rank-deficient normal equations");
    }
    return *sol;
}

std::vector<TabooCandidate> taboo_candidates(const PriceSeries& series, const WindowSpec& window,
                                             const SearchSpace& space, const TabooConfig& cfg) {
    space.validate(window.t2);
    if (cfg.n_candidates == 0) {
        throw std::invalid_argument("taboo_candidates: n_candidates must be >= 1");
    }
    WindowData data(series, window);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const std::array<const Interval*, 4> ranges{&space.tc, &space.m, &space.omega, &space.phi};
    const std::size_t cells = std::max<std::size_t>(1, cfg.cells_per_dim);

    auto cell_of = [&](const NonlinearParams& p) {
        const std::array<double, 4> v{p.tc, p.m, p.omega, p.phi};
        std::uint64_t id = 0;
        for (std::size_t d = 0; d < 4; ++d) {
            std::size_t k = 0;
            if (ranges[d]->width() > 0.0) {
                const double u = (v[d] - ranges[d]->lo) / ranges[d]->width();
                k = std::min(cells - 1, static_cast<std::size_t>(std::max(0.0, u) * static_cast<double>(cells)));
            }
            id = id * cells + k;
        }
        return id;
    };
    auto random_point = [&] {
        auto draw = [&](const Interval& r) { return r.lo + unit(rng) * r.width(); };
        NonlinearParams p;
        p.tc = draw(space.tc);
        p.m = draw(space.m);
        p.omega = draw(space.omega);
        p.phi = draw(space.phi);
        return p;
    };
    auto neighbor = [&](const NonlinearParams& from) {
        const double s = cfg.step_fraction;
        NonlinearParams p;
        p.tc = reflect(from.tc + s * space.tc.width() * gauss(rng), space.tc);
        p.m = reflect(from.m + s * space.m.width() * gauss(rng), space.m);
        p.omega = reflect(from.omega + s * space.omega.width() * gauss(rng), space.omega);
        if (space.phi.width() >= kTwoPi) {
            p.phi = wrap_phase(from.phi + s * space.phi.width() * gauss(rng));
        } else {
            p.phi = reflect(from.phi + s * space.phi.width() * gauss(rng), space.phi);
        }
        return p;
    };

    // Elite set: best point per visited cell, at most n_candidates cells.
    struct Entry {
        std::uint64_t cell;
        TabooCandidate cand;
    };
    std::vector<Entry> elite;
    auto offer = [&](const NonlinearParams& p, double value, std::uint64_t cell) {
        auto same = std::find_if(elite.begin(), elite.end(), [&](const Entry& e) { return e.cell == cell; });
        if (same != elite.end()) {
            if (value < same->cand.sse) {
                same->cand = {p, value};
            }
        } else if (elite.size() < cfg.n_candidates) {
            elite.push_back({cell, {p, value}});
        } else {
            auto worst = std::max_element(elite.begin(), elite.end(),
                                          [](const Entry& a, const Entry& b) { return a.cand.sse < b.cand.sse; });
            if (value < worst->cand.sse) {
                *worst = {cell, {p, value}};
            }
        }
    };

    std::deque<std::uint64_t> taboo_order;
    std::unordered_set<std::uint64_t> taboo;
    auto make_taboo = [&](std::uint64_t cell) {
        if (cfg.taboo_length == 0 || taboo.contains(cell)) {
            return;
        }
        taboo_order.push_back(cell);
        taboo.insert(cell);
        if (taboo_order.size() > cfg.taboo_length) {
            taboo.erase(taboo_order.front());
            taboo_order.pop_front();
        }
    };

    double incumbent = std::numeric_limits<double>::infinity();
    auto restart = [&]() -> std::optional<NonlinearParams> {
        for (int attempt = 0; attempt < 100; ++attempt) {
            const NonlinearParams p = random_point();
            if (auto sol = data.slave(p)) {
                const auto cell = cell_of(p);
                offer(p, sol->sse, cell);
                incumbent = std::min(incumbent, sol->sse);
                make_taboo(cell);
                return p;
            }
        }
        return std::nullopt;
    };

    auto current = restart();
    std::size_t stagnant = 0;
    for (std::size_t it = 0; it < cfg.n_iterations && current; ++it) {
        std::optional<NonlinearParams> best_move;
        double best_value = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cfg.n_neighbors; ++k) {
            const NonlinearParams p = neighbor(*current);
            const auto sol = data.slave(p);
            if (!sol) {
                continue;
            }
            const auto cell = cell_of(p);
            offer(p, sol->sse, cell);
            // Aspiration: a taboo cell is admissible if it beats the incumbent.
            if (taboo.contains(cell) && !(sol->sse < incumbent)) {
                continue;
            }
            if (sol->sse < best_value) {
                best_value = sol->sse;
                best_move = p;
            }
        }
        if (!best_move) {
            current = restart();
            stagnant = 0;
            continue;
        }
        current = best_move;
        make_taboo(cell_of(*best_move));
        if (best_value < incumbent) {
            incumbent = best_value;
            stagnant = 0;
        } else if (++stagnant >= cfg.stagnation_limit) {
            current = restart();
            stagnant = 0;
        }
    }

    std::vector<TabooCandidate> out;
    out.reserve(cfg.n_candidates);
    std::sort(elite.begin(), elite.end(), [](const Entry& a, const Entry& b) {
        if (a.cand.sse != b.cand.sse) {
            return a.cand.sse < b.cand.sse;
        }
        return a.cell < b.cell;
    });
    for (const Entry& e : elite) {
        out.push_back(e.cand);
    }
    // Fewer distinct cells than requested (e.g. a collapsed space): repeat the best.
    while (!out.empty() && out.size() < cfg.n_candidates) {
        out.push_back(out.front());
    }
    return out;
}

double relative_gradient(const PriceSeries& series, const WindowSpec& window, const LpplParams& params) {
    WindowData data(series, window);
    if (!(params.tc > data.t2())) {
        throw std::domain_error("relative_gradient: tc must lie after the window end");
    }
    Mat7 jtj;
    Vec7 jtr;
    const double total = data.normal_system(pack(params), jtj, jtr);
    return gradient_cosine(jtj, jtr, total);
}

LpplFit refine(const PriceSeries& series, const WindowSpec& window, const NonlinearParams& candidate,
               const RefineConfig& cfg) {
    WindowData data(series, window);
    LpplFit fit;
    fit.window = window;
    fit.n_points = window.n_points();
    fit.status = FitStatus::unfittable;

    const auto start = data.slave(candidate);
    if (!start) {
        fit.failure_reason = !(candidate.tc > data.t2()) ? "tc not after window end" : "singular linear system";
        return fit;
    }
    Vec7 p = pack(LpplParams::combine(start->params, candidate));
    double current = start->sse;
    const double exact_floor = 1e-28 * static_cast<double>(data.size());

    FitStatus status = FitStatus::not_converged;
    double lambda = 1e-3;
    Mat7 jtj;
    Vec7 jtr;
    std::size_t iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        current = data.normal_system(p, jtj, jtr);
        const double grad = gradient_cosine(jtj, jtr, current);
        if (current <= exact_floor || grad <= cfg.grad_tol) {
            status = FitStatus::converged;
            break;
        }
        Vec7 damping = jtj.diagonal().cwiseMax(1e-12 * jtj.diagonal().maxCoeff()).cwiseMax(1e-300);
        bool accepted = false;
        double trial_value = current;
        while (lambda <= 1e16) {
            Mat7 lhs = jtj;
            lhs.diagonal() += lambda * damping;
            const Vec7 step = lhs.ldlt().solve(jtr);
            const Vec7 trial = p + step;
            if (step.allFinite() && trial[kTc] > data.t2()) {
                trial_value = data.sse(trial);
                if (std::isfinite(trial_value) && trial_value < current) {
                    p = pack(unpack(trial).normalized());
                    accepted = true;
                    lambda = std::max(lambda * 0.1, 1e-15);
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No descent step exists at working precision.
            status = grad <= std::sqrt(cfg.grad_tol) ? FitStatus::converged : FitStatus::not_converged;
            break;
        }
        const double rel_change = (current - trial_value) / current;
        current = trial_value;
        // A stalled sse only counts as convergence near a stationary point; heavy
        // damping can shrink steps long before the gradient is small.
        if (rel_change < cfg.rel_sse_tol && grad <= std::sqrt(cfg.grad_tol)) {
            status = FitStatus::converged;
            ++iter;
            break;
        }
    }

    LpplParams solution = unpack(p).normalized();
    if (!(solution.tc > data.t2())) {
        fit.failure_reason = "tc drifted to window end";
        return fit;
    }
    if (auto reslaved = data.slave(solution.nonlinear()); reslaved && reslaved->sse <= current) {
        solution = LpplParams::combine(reslaved->params, solution.nonlinear());
        current = reslaved->sse;
    }
    fit.params = solution;
    fit.sse = current;
    fit.status = status;
    fit.iterations = iter;
    fit.passes_filter = passes_lppl_filter(fit);
    if (status == FitStatus::not_converged) {
        fit.failure_reason = "iteration limit reached";
    }
    return fit;
}

bool passes_lppl_filter(const LpplParams& params, const WindowSpec& window) {
    return params.tc > static_cast<double>(window.t2) && params.B < 0.0 && params.m > 0.0 && params.m < 1.0;
}

bool passes_lppl_filter(const LpplFit& fit) {
    return passes_lppl_filter(fit.params, fit.window);
}

std::uint64_t repeat_seed(std::uint64_t base_seed, std::size_t r) {
    return derive_seed(base_seed, "taboo-repeat", r);
}

LpplFit fit_window(const PriceSeries& series, const WindowSpec& window, const SearchSpace& space,
                   const TabooConfig& cfg, std::size_t n_repeats, const RefineConfig& refine_cfg) {
    if (n_repeats == 0) {
        throw std::invalid_argument("fit_window: n_repeats must be >= 1");
    }
    std::optional<LpplFit> best;
    for (std::size_t r = 0; r < n_repeats; ++r) {
        TabooConfig run = cfg;
        run.seed = repeat_seed(cfg.seed, r);
        for (const TabooCandidate& cand : taboo_candidates(series, window, space, run)) {
            LpplFit fit = refine(series, window, cand.params, refine_cfg);
            if (fit.status == FitStatus::unfittable) {
                continue;
            }
            fit.rng_seed = run.seed;
            const bool better = !best || fit.sse < best->sse ||
                                (fit.sse == best->sse && fit.rng_seed < best->rng_seed);
            if (better) {
                best = std::move(fit);
            }
        }
    }
    if (!best) {
        LpplFit failed;
        failed.window = window;
        failed.n_points = window.n_points();
        failed.rng_seed = cfg.seed;
        failed.failure_reason = "all repeats failed";
        return failed;
    }
    return *best;
}

}  // namespace lppl

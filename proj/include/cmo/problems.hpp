#ifndef CMO_PROBLEMS_HPP
#define CMO_PROBLEMS_HPP

#include "cmo/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cmo {

/// A constrained multi-objective minimization problem.
struct Problem {
    std::string id;
    std::size_t num_objectives = 2;
    Bounds bounds;
    Evaluator evaluator;
    /// Returns n objective vectors on the true constrained front.
    std::function<std::vector<Vector>(std::size_t)> front_sampler;
    double delta = default_equality_tolerance;

    std::size_t dimension() const noexcept { return bounds.size(); }
};

struct ReferenceFront {
    std::vector<Vector> points;
    std::string problem_id;
    std::size_t samples = 0;
};

inline Solution evaluate(const Problem& problem, std::span<const double> decisions,
                         EvaluationCounter& counter) {
    if (!problem.bounds.contains(decisions)) {
        throw std::invalid_argument("evaluate: decision vector outside bounds of " + problem.id);
    }
    counter.charge();
    Evaluation e = problem.evaluator(decisions);
    Solution s;
    s.decisions.assign(decisions.begin(), decisions.end());
    s.cv = constraint_violation(e.ineq, e.eq, problem.delta);
    s.objectives = std::move(e.objectives);
    s.ineq = std::move(e.ineq);
    s.eq = std::move(e.eq);
    for (double f : s.objectives) {
        if (!std::isfinite(f)) {
            throw std::runtime_error("evaluate: non-finite objective from " + problem.id);
        }
    }
    return s;
}

/// Evaluates as many candidates as the budget allows, in order.
inline std::vector<Solution> evaluate_batch(const Problem& problem, std::span<const Vector> batch,
                                            EvaluationCounter& counter) {
    std::vector<Solution> out;
    out.reserve(std::min(batch.size(), counter.remaining()));
    for (const auto& x : batch) {
        if (counter.exhausted()) {
            break;
        }
        out.push_back(evaluate(problem, x, counter));
    }
    return out;
}

namespace detail {

/// Bisection on a bracketing interval; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    if (flo * f(hi) > 0.0) {
        throw std::invalid_argument("bisect: interval does not bracket a root");
    }
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double tail_sum_of_squares(std::span<const double> x) {
    double g = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        g += x[i] * x[i];
    }
    return g;
}

inline std::vector<Vector> sample_line(std::size_t n, double offset) {
    std::vector<Vector> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        pts.push_back({t, offset - t});
    }
    return pts;
}

inline std::vector<Vector> sample_convex_curve(std::size_t n) {
    std::vector<Vector> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        pts.push_back({t, 1.0 - std::sqrt(t)});
    }
    return pts;
}

/// Arc length of (s^2, 1 - s) from 0 to s.
inline double curve_arc_length(double s) {
    const double q = std::sqrt(1.0 + 4.0 * s * s);
    return 0.5 * s * q + 0.25 * std::asinh(2.0 * s);
}

} // namespace detail

/// Interval of f1 on which the constraint f1 + f2 >= 0.8 cuts the curve 1 - sqrt(f1).
/// Located numerically by bisection of 1 + t - sqrt(t) - 0.8 either side of its minimum at 0.25.
inline std::pair<double, double> partial_front_cut() {
    const auto gap = [](double t) { return 1.0 + t - std::sqrt(t) - 0.8; };
    return {detail::bisect(gap, 0.0, 0.25), detail::bisect(gap, 0.25, 1.0)};
}

/// Samples the piecewise front of the partial-overlap problem at equal arc-length spacing:
/// curve arc, cut segment on f1 + f2 = 0.8, curve arc.
inline std::vector<Vector> sample_partial_front(std::size_t n) {
    const auto [ta, tb] = partial_front_cut();
    const double sa = std::sqrt(ta);
    const double sb = std::sqrt(tb);
    const double left = detail::curve_arc_length(sa);
    const double mid = std::sqrt(2.0) * (tb - ta);
    const double right = detail::curve_arc_length(1.0) - detail::curve_arc_length(sb);
    const double total = left + mid + right;

    const auto invert_arc = [](double target, double lo, double hi) {
        return detail::bisect([&](double s) { return detail::curve_arc_length(s) - target; }, lo, hi);
    };

    std::vector<Vector> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double len = n == 1 ? 0.0 : total * static_cast<double>(i) / static_cast<double>(n - 1);
        if (len <= left) {
            const double s = len <= 0.0 ? 0.0 : invert_arc(len, 0.0, sa);
            pts.push_back({s * s, 1.0 - s});
        } else if (len <= left + mid) {
            const double t = ta + (len - left) / std::sqrt(2.0);
            pts.push_back({t, 0.8 - t});
        } else if (i + 1 == n) {
            pts.push_back({1.0, 0.0});
        } else {
            const double target = detail::curve_arc_length(sb) + (len - left - mid);
            const double s = invert_arc(target, sb, 1.0);
            pts.push_back({s * s, 1.0 - s});
        }
    }
    return pts;
}

inline constexpr std::string_view problem_ids[] = {"P1-overlap", "P2-partial", "P3-separated"};
inline constexpr std::size_t default_dimension = 10;

/// Builds one of the synthetic two-objective problems on [0,1]^D, with g(x) = sum_{i>=2} x_i^2.
///  - P1-overlap:   f = (x1, 1 - sqrt(x1) + g), g - 0.5 <= 0. Constrained front = unconstrained front.
///  - P2-partial:   same objectives, 0.8 - f1 - f2 <= 0. Fronts share two arcs.
///  - P3-separated: f = (x1, 1 - x1 + g), 0.5 - g <= 0. Constrained front lies above the unconstrained one.
inline Problem make_problem(std::string_view id, std::size_t dimension = default_dimension) {
    if (dimension < 2) {
        throw std::invalid_argument("make_problem: dimension must be at least 2");
    }
    Problem p;
    p.id = std::string(id);
    p.num_objectives = 2;
    p.bounds = Bounds::unit(dimension);
    if (id == "P1-overlap") {
        p.evaluator = [](std::span<const double> x) {
            const double g = detail::tail_sum_of_squares(x);
            return Evaluation{{x[0], 1.0 - std::sqrt(x[0]) + g}, {g - 0.5}, {}};
        };
        p.front_sampler = detail::sample_convex_curve;
    } else if (id == "P2-partial") {
        p.evaluator = [](std::span<const double> x) {
            const double g = detail::tail_sum_of_squares(x);
            const double f1 = x[0];
            const double f2 = 1.0 - std::sqrt(x[0]) + g;
            return Evaluation{{f1, f2}, {0.8 - f1 - f2}, {}};
        };
        p.front_sampler = sample_partial_front;
    } else if (id == "P3-separated") {
        p.evaluator = [](std::span<const double> x) {
            const double g = detail::tail_sum_of_squares(x);
            return Evaluation{{x[0], 1.0 - x[0] + g}, {0.5 - g}, {}};
        };
        p.front_sampler = [](std::size_t n) { return detail::sample_line(n, 1.5); };
    } else {
        throw std::invalid_argument("make_problem: unknown problem id '" + std::string(id) + "'");
    }
    return p;
}

inline ReferenceFront reference_front(const Problem& problem, std::size_t n) {
    if (n < 2) {
        throw std::invalid_argument("reference_front: need at least two points");
    }
    ReferenceFront rf;
    rf.points = problem.front_sampler(n);
    std::sort(rf.points.begin(), rf.points.end());
    rf.problem_id = problem.id;
    rf.samples = n;
    return rf;
}

} // namespace cmo

#endif

#ifndef CMO_CORE_HPP
#define CMO_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cmo {

using Vector = std::vector<double>;

inline constexpr double default_equality_tolerance = 1e-4;
inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Box constraints of the decision space.
class Bounds {
public:
    Bounds() = default;

    Bounds(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.size() != upper_.size()) {
            throw std::invalid_argument("Bounds: lower/upper length mismatch");
        }
        for (std::size_t i = 0; i < lower_.size(); ++i) {
            if (!(lower_[i] < upper_[i])) {
                throw std::invalid_argument("Bounds: lower[" + std::to_string(i) +
                                            "] must be strictly below upper");
            }
        }
    }

    static Bounds unit(std::size_t dim) { return {Vector(dim, 0.0), Vector(dim, 1.0)}; }

    std::size_t size() const noexcept { return lower_.size(); }
    const Vector& lower() const noexcept { return lower_; }
    const Vector& upper() const noexcept { return upper_; }

    bool contains(std::span<const double> v) const {
        if (v.size() != size()) {
            return false;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] >= lower_[i] && v[i] <= upper_[i])) {
                return false;
            }
        }
        return true;
    }

private:
    Vector lower_;
    Vector upper_;
};

/// Sum of positive inequality values plus equality deviations beyond `delta`.
/// Each equality term is floored at zero so the result is never negative.
inline double constraint_violation(std::span<const double> ineq, std::span<const double> eq,
                                   double delta = default_equality_tolerance) {
    if (!(delta > 0.0)) {
        throw std::invalid_argument("constraint_violation: delta must be positive");
    }
    double cv = 0.0;
    for (std::size_t j = 0; j < ineq.size(); ++j) {
        if (!std::isfinite(ineq[j])) {
            throw std::invalid_argument("constraint_violation: non-finite inequality value at index " +
                                        std::to_string(j));
        }
        cv += std::max(0.0, ineq[j]);
    }
    for (std::size_t k = 0; k < eq.size(); ++k) {
        if (!std::isfinite(eq[k])) {
            throw std::invalid_argument("constraint_violation: non-finite equality value at index " +
                                        std::to_string(k));
        }
        cv += std::max(0.0, std::abs(eq[k]) - delta);
    }
    return cv;
}

/// Minimization Pareto dominance on objective vectors.
inline bool pareto_dominates(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("pareto_dominates: objective vectors differ in length");
    }
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) {
            return false;
        }
        if (a[i] < b[i]) {
            strictly = true;
        }
    }
    return strictly;
}

inline Vector clamp_to_bounds(Vector v, const Bounds& b) {
    if (v.size() != b.size()) {
        throw std::invalid_argument("clamp_to_bounds: dimension mismatch");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = std::min(b.upper()[i], std::max(b.lower()[i], v[i]));
    }
    return v;
}

struct Solution {
    Vector decisions;
    Vector objectives;
    Vector ineq;
    Vector eq;
    double cv = 0.0;

    bool feasible() const noexcept { return cv == 0.0; }
};

/// An ordered multiset of solutions with cached ideal, nadir and mean objective points.
class Population {
public:
    Population() = default;

    explicit Population(std::vector<Solution> members) : members_(std::move(members)) { refresh(); }

    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    const Solution& operator[](std::size_t i) const { return members_[i]; }
    std::span<const Solution> members() const noexcept { return members_; }
    auto begin() const noexcept { return members_.begin(); }
    auto end() const noexcept { return members_.end(); }

    const Vector& ideal() const noexcept { return ideal_; }
    const Vector& nadir() const noexcept { return nadir_; }
    const Vector& average() const noexcept { return average_; }

    /// Fraction of members with zero constraint violation; 0 for an empty population.
    double feasible_ratio() const noexcept {
        if (members_.empty()) {
            return 0.0;
        }
        const auto n = std::count_if(members_.begin(), members_.end(),
                                     [](const Solution& s) { return s.feasible(); });
        return static_cast<double>(n) / static_cast<double>(members_.size());
    }

private:
    void refresh() {
        ideal_.clear();
        nadir_.clear();
        average_.clear();
        if (members_.empty()) {
            return;
        }
        const std::size_t m = members_.front().objectives.size();
        ideal_.assign(m, infinity);
        nadir_.assign(m, -infinity);
        average_.assign(m, 0.0);
        for (const auto& s : members_) {
            if (s.objectives.size() != m) {
                throw std::invalid_argument("Population: members disagree on objective count");
            }
            for (std::size_t i = 0; i < m; ++i) {
                ideal_[i] = std::min(ideal_[i], s.objectives[i]);
                nadir_[i] = std::max(nadir_[i], s.objectives[i]);
                average_[i] += s.objectives[i];
            }
        }
        for (auto& a : average_) {
            a /= static_cast<double>(members_.size());
        }
        // The running mean can drift past the extremes by an ulp when all members agree.
        for (std::size_t i = 0; i < m; ++i) {
            average_[i] = std::clamp(average_[i], ideal_[i], nadir_[i]);
        }
    }

    std::vector<Solution> members_;
    Vector ideal_;
    Vector nadir_;
    Vector average_;
};

/// Raw evaluator output before the violation is aggregated.
struct Evaluation {
    Vector objectives;
    Vector ineq;
    Vector eq;
};

using Evaluator = std::function<Evaluation(std::span<const double>)>;

class BudgetExhausted : public std::runtime_error {
public:
    BudgetExhausted() : std::runtime_error("evaluation budget exhausted") {}
};

/// Counts objective-function evaluations against a fixed budget.
class EvaluationCounter {
public:
    explicit EvaluationCounter(std::size_t budget = std::numeric_limits<std::size_t>::max())
        : budget_(budget) {}

    std::size_t count() const noexcept { return count_; }
    std::size_t budget() const noexcept { return budget_; }
    std::size_t remaining() const noexcept { return budget_ - count_; }
    bool exhausted() const noexcept { return count_ >= budget_; }

    void charge() {
        if (exhausted()) {
            throw BudgetExhausted();
        }
        ++count_;
    }

private:
    std::size_t budget_;
    std::size_t count_ = 0;
};

} // namespace cmo

#endif

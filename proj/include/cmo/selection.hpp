#ifndef CMO_SELECTION_HPP
#define CMO_SELECTION_HPP

#include "cmo/core.hpp"
#include "cmo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace cmo {

/// Violation left after relaxing by epsilon; an infinite epsilon ignores constraints.
inline double relaxed_violation(double cv, double epsilon) noexcept {
    if (std::isinf(epsilon)) {
        return 0.0;
    }
    return std::max(0.0, cv - epsilon);
}

/// Epsilon-relaxed constraint dominance. `less` means `a` is better.
/// Smaller relaxed violation wins; equal relaxed violations fall back to Pareto dominance.
inline std::partial_ordering epsilon_cdp_compare(const Solution& a, const Solution& b, double epsilon) {
    const double ca = relaxed_violation(a.cv, epsilon);
    const double cb = relaxed_violation(b.cv, epsilon);
    if (ca < cb) {
        return std::partial_ordering::less;
    }
    if (cb < ca) {
        return std::partial_ordering::greater;
    }
    if (pareto_dominates(a.objectives, b.objectives)) {
        return std::partial_ordering::less;
    }
    if (pareto_dominates(b.objectives, a.objectives)) {
        return std::partial_ordering::greater;
    }
    if (a.objectives == b.objectives) {
        return std::partial_ordering::equivalent;
    }
    return std::partial_ordering::unordered;
}

/// Nondomination fronts under the epsilon-CDP relation, each front in ascending index order.
inline std::vector<std::vector<std::size_t>> nondominated_fronts(std::span<const Solution> pop,
                                                                 double epsilon) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dominators(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto c = epsilon_cdp_compare(pop[i], pop[j], epsilon);
            if (c == std::partial_ordering::less) {
                dominated[i].push_back(j);
                ++dominators[j];
            } else if (c == std::partial_ordering::greater) {
                dominated[j].push_back(i);
                ++dominators[i];
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (dominators[i] == 0) {
            current.push_back(i);
        }
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current) {
            for (std::size_t j : dominated[i]) {
                if (--dominators[j] == 0) {
                    next.push_back(j);
                }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

/// Cuboid crowding distance inside one front; boundary members get +inf.
inline std::vector<double> crowding_distance(std::span<const Solution> pop,
                                             std::span<const std::size_t> front) {
    const std::size_t k = front.size();
    std::vector<double> dist(k, 0.0);
    if (k == 0) {
        return dist;
    }
    const std::size_t m = pop[front[0]].objectives.size();
    std::vector<std::size_t> order(k);
    for (std::size_t obj = 0; obj < m; ++obj) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pop[front[a]].objectives[obj] < pop[front[b]].objectives[obj];
        });
        const double lo = pop[front[order.front()]].objectives[obj];
        const double hi = pop[front[order.back()]].objectives[obj];
        dist[order.front()] = infinity;
        dist[order.back()] = infinity;
        const double range = hi - lo;
        if (range <= 0.0) {
            continue;
        }
        for (std::size_t r = 1; r + 1 < k; ++r) {
            const double gap = pop[front[order[r + 1]]].objectives[obj] - pop[front[order[r - 1]]].objectives[obj];
            dist[order[r]] += gap / range;
        }
    }
    return dist;
}

/// Rank and crowding of every member under one epsilon.
struct EpsilonCdpOrder {
    double epsilon = 0.0;
    std::vector<std::size_t> ranks;
    std::vector<double> crowding;

    /// Lower rank first, then larger crowding distance.
    bool better(std::size_t a, std::size_t b) const {
        if (ranks[a] != ranks[b]) {
            return ranks[a] < ranks[b];
        }
        return crowding[a] > crowding[b];
    }

    /// Member indices from best to worst; ties keep index order.
    std::vector<std::size_t> sorted() const {
        std::vector<std::size_t> idx(ranks.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [this](std::size_t a, std::size_t b) { return better(a, b); });
        return idx;
    }
};

inline EpsilonCdpOrder epsilon_cdp_order(std::span<const Solution> pop, double epsilon) {
    EpsilonCdpOrder order;
    order.epsilon = epsilon;
    order.ranks.assign(pop.size(), 0);
    order.crowding.assign(pop.size(), 0.0);
    const auto fronts = nondominated_fronts(pop, epsilon);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        const auto dist = crowding_distance(pop, fronts[r]);
        for (std::size_t k = 0; k < fronts[r].size(); ++k) {
            order.ranks[fronts[r][k]] = r;
            order.crowding[fronts[r][k]] = dist[k];
        }
    }
    return order;
}

/// Keeps the best min(n, |union|) members: whole fronts in order, the split front
/// truncated by descending crowding distance.
inline Population environmental_select(std::span<const Solution> candidates, std::size_t n, double epsilon) {
    if (candidates.empty()) {
        throw std::invalid_argument("environmental_select: empty candidate set");
    }
    if (candidates.size() <= n) {
        return Population(std::vector<Solution>(candidates.begin(), candidates.end()));
    }
    const auto idx = epsilon_cdp_order(candidates, epsilon).sorted();
    std::vector<Solution> kept;
    kept.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        kept.push_back(candidates[idx[k]]);
    }
    return Population(std::move(kept));
}

struct ReferenceVectorSet {
    std::vector<Vector> directions;
    /// Subregion radius; set by the selection that assigns members to directions.
    double h = 0.0;
};

namespace detail {

inline double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

inline void lattice_fill(std::size_t remaining, std::size_t h, std::size_t dims_left, Vector& cur,
                         std::vector<Vector>& out) {
    if (dims_left == 1) {
        cur.push_back(static_cast<double>(remaining) / static_cast<double>(h));
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (std::size_t v = remaining + 1; v-- > 0;) {
        cur.push_back(static_cast<double>(v) / static_cast<double>(h));
        lattice_fill(remaining - v, h, dims_left - 1, cur, out);
        cur.pop_back();
    }
}

inline void normalize_unit(Vector& v) {
    double norm = 0.0;
    for (double x : v) {
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) {
        x /= norm;
    }
}

} // namespace detail

/// Simplex-lattice (Das-Dennis) directions with the largest H whose lattice fits in `target`,
/// scaled to unit length. Shortfalls are padded with seeded uniform simplex samples.
inline ReferenceVectorSet das_dennis_vectors(std::size_t m, std::size_t target, std::uint64_t seed = 0x5eed) {
    if (m < 2 || target < 2) {
        throw std::invalid_argument("das_dennis_vectors: need M >= 2 and target >= 2");
    }
    std::size_t h = 1;
    while (detail::binomial(h + 1 + m - 1, m - 1) <= static_cast<double>(target)) {
        ++h;
    }
    ReferenceVectorSet set;
    Vector cur;
    detail::lattice_fill(h, h, m, cur, set.directions);
    if (set.directions.size() > target) {
        set.directions.resize(target);
    }
    Rng rng(seed);
    while (set.directions.size() < target) {
        Vector w(m);
        for (double& x : w) {
            x = -std::log(1.0 - rng.uniform());
        }
        const bool duplicate = std::any_of(set.directions.begin(), set.directions.end(),
                                           [&](const Vector& d) { return d == w; });
        if (!duplicate) {
            set.directions.push_back(std::move(w));
        }
    }
    for (auto& w : set.directions) {
        detail::normalize_unit(w);
    }
    return set;
}

/// Angle between a (nonnegative) normalized objective point and a unit direction.
/// A point at the origin is treated as lying on every direction.
inline double angular_distance(std::span<const double> point, std::span<const double> unit_direction) {
    double dot = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        dot += point[i] * unit_direction[i];
        norm += point[i] * point[i];
    }
    if (norm == 0.0) {
        return 0.0;
    }
    return std::acos(std::clamp(dot / std::sqrt(norm), -1.0, 1.0));
}

/// Subregion selection for the auxiliary population.
///
/// Objectives of the union are normalized by the bounds of its Pareto-nondominated subset.
/// Each direction claims the members closer than the radius h (the smallest angle any
/// nondominated member makes with any direction), or failing that its nearest members.
/// Within a claim a feasible member of least cv + angle wins, else the member of least angle.
/// One pick per direction, so a member may be picked more than once. A small auxiliary
/// population is topped up to 25 candidates from the unpicked remainder, and the best
/// `target` candidates under epsilon-CDP rank/crowding are returned.
inline Population angle_subregion_select(std::span<const Solution> pop_aux, std::span<const Solution> offspring,
                                         std::size_t target, double epsilon) {
    std::vector<Solution> all(pop_aux.begin(), pop_aux.end());
    all.insert(all.end(), offspring.begin(), offspring.end());
    if (all.empty()) {
        throw std::invalid_argument("angle_subregion_select: empty candidate set");
    }
    const std::size_t m = all.front().objectives.size();

    const auto pareto = nondominated_fronts(all, infinity).front();
    Vector zmin(m, infinity);
    Vector zmax(m, -infinity);
    for (std::size_t i : pareto) {
        for (std::size_t k = 0; k < m; ++k) {
            zmin[k] = std::min(zmin[k], all[i].objectives[k]);
            zmax[k] = std::max(zmax[k], all[i].objectives[k]);
        }
    }
    std::vector<Vector> normalized(all.size(), Vector(m));
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            const double range = zmax[k] - zmin[k];
            normalized[i][k] = (all[i].objectives[k] - zmin[k]) / (range > 0.0 ? range : 1.0);
        }
    }

    auto refs = das_dennis_vectors(m, target);
    std::vector<Vector> angle(all.size(), Vector(refs.directions.size()));
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t w = 0; w < refs.directions.size(); ++w) {
            angle[i][w] = angular_distance(normalized[i], refs.directions[w]);
        }
    }
    refs.h = infinity;
    for (std::size_t i : pareto) {
        refs.h = std::min(refs.h, *std::min_element(angle[i].begin(), angle[i].end()));
    }

    std::vector<std::size_t> picks;
    picks.reserve(refs.directions.size());
    std::vector<bool> picked(all.size(), false);
    for (std::size_t w = 0; w < refs.directions.size(); ++w) {
        std::vector<std::size_t> claim;
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (angle[i][w] < refs.h) {
                claim.push_back(i);
            }
        }
        if (claim.empty()) {
            double best = infinity;
            for (std::size_t i = 0; i < all.size(); ++i) {
                best = std::min(best, angle[i][w]);
            }
            for (std::size_t i = 0; i < all.size(); ++i) {
                if (angle[i][w] == best) {
                    claim.push_back(i);
                }
            }
        }
        std::size_t choice = claim.front();
        bool any_feasible = false;
        double best_score = infinity;
        for (std::size_t i : claim) {
            if (!all[i].feasible()) {
                continue;
            }
            const double score = all[i].cv + angle[i][w];
            if (!any_feasible || score < best_score) {
                any_feasible = true;
                best_score = score;
                choice = i;
            }
        }
        if (!any_feasible) {
            for (std::size_t i : claim) {
                if (angle[i][w] < angle[choice][w]) {
                    choice = i;
                }
            }
        }
        picks.push_back(choice);
        picked[choice] = true;
    }

    std::vector<Solution> pool;
    pool.reserve(picks.size() + 25);
    for (std::size_t i : picks) {
        pool.push_back(all[i]);
    }
    constexpr std::size_t min_aux = 25;
    if (pop_aux.size() < min_aux) {
        std::size_t extra = min_aux - pop_aux.size();
        for (std::size_t i = 0; i < all.size() && extra > 0; ++i) {
            if (!picked[i]) {
                pool.push_back(all[i]);
                --extra;
            }
        }
    }
    return environmental_select(pool, target, epsilon);
}

} // namespace cmo

#endif

#ifndef CMO_VARIATION_HPP
#define CMO_VARIATION_HPP

#include "cmo/core.hpp"
#include "cmo/rng.hpp"
#include "cmo/selection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace cmo {

struct OperatorParams {
    std::vector<double> f_set{0.6, 0.8, 1.0};
    std::vector<double> cr_set_de{0.1, 0.2, 1.0};
    std::vector<double> cr_set_transfer{0.1, 0.2, 0.3};
    double eta_c = 20.0;
    double pc = 1.0;
    /// Per-variable mutation probability; negative means 1/D.
    double pm = -1.0;
    double eta_m_stage1 = 20.0;
    double eta_m_stage2 = 1.0;
    double p_best_fraction = 0.1;

    void validate() const {
        if (f_set.empty() || cr_set_de.empty() || cr_set_transfer.empty()) {
            throw std::invalid_argument("OperatorParams: parameter sets must be nonempty");
        }
        if (pc < 0.0 || pc > 1.0) {
            throw std::invalid_argument("OperatorParams: pc must lie in [0,1]");
        }
        if (pm > 1.0) {
            throw std::invalid_argument("OperatorParams: pm must not exceed 1");
        }
        if (!(p_best_fraction > 0.0 && p_best_fraction <= 1.0)) {
            throw std::invalid_argument("OperatorParams: p_best_fraction must lie in (0,1]");
        }
    }

    double mutation_probability(std::size_t dim) const { return pm < 0.0 ? 1.0 / static_cast<double>(dim) : pm; }
};

// ---------------------------------------------------------------------------
// Mating pools

/// Binary tournaments between two distinct members; the epsilon-CDP order decides,
/// exact ties go to a coin flip.
inline std::vector<Solution> tournament_pool(std::span<const Solution> pop, std::size_t k, double epsilon, Rng& rng) {
    if (pop.empty()) {
        throw std::invalid_argument("tournament_pool: empty population");
    }
    std::vector<Solution> pool;
    pool.reserve(k);
    if (pop.size() == 1) {
        pool.assign(k, pop.front());
        return pool;
    }
    const auto order = epsilon_cdp_order(pop, epsilon);
    for (std::size_t s = 0; s < k; ++s) {
        const std::size_t a = rng.below(pop.size());
        std::size_t b = rng.below(pop.size() - 1);
        if (b >= a) {
            ++b;
        }
        std::size_t winner;
        if (order.better(a, b)) {
            winner = a;
        } else if (order.better(b, a)) {
            winner = b;
        } else {
            winner = rng.coin() ? a : b;
        }
        pool.push_back(pop[winner]);
    }
    return pool;
}

inline std::vector<Solution> random_pool(std::span<const Solution> pop, std::size_t k, Rng& rng) {
    if (pop.empty()) {
        throw std::invalid_argument("random_pool: empty population");
    }
    std::vector<Solution> pool;
    pool.reserve(k);
    for (std::size_t s = 0; s < k; ++s) {
        pool.push_back(pop[rng.below(pop.size())]);
    }
    return pool;
}

// ---------------------------------------------------------------------------
// GA: simulated binary crossover + polynomial mutation

inline void sbx_pair(std::span<const double> p1, std::span<const double> p2, double eta_c, double pc, Rng& rng,
                     Vector& c1, Vector& c2) {
    const std::size_t dim = p1.size();
    c1.assign(dim, 0.0);
    c2.assign(dim, 0.0);
    const bool cross = rng.uniform() < pc;
    for (std::size_t d = 0; d < dim; ++d) {
        const double mu = rng.uniform();
        double beta = mu <= 0.5 ? std::pow(2.0 * mu, 1.0 / (eta_c + 1.0))
                                : std::pow(2.0 - 2.0 * mu, -1.0 / (eta_c + 1.0));
        if (rng.coin()) {
            beta = -beta;
        }
        if (rng.uniform() < 0.5 || !cross) {
            beta = 1.0;
        }
        const double mean = 0.5 * (p1[d] + p2[d]);
        const double half = 0.5 * (p1[d] - p2[d]);
        c1[d] = mean + beta * half;
        c2[d] = mean - beta * half;
    }
}

inline void polynomial_mutation(Vector& x, const Bounds& b, double pm, double eta_m, Rng& rng) {
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (!(rng.uniform() < pm)) {
            continue;
        }
        const double lo = b.lower()[d];
        const double hi = b.upper()[d];
        const double span = hi - lo;
        const double y = std::clamp(x[d], lo, hi);
        const double mu = rng.uniform();
        const double power = 1.0 / (eta_m + 1.0);
        double delta;
        if (mu <= 0.5) {
            const double xy = 1.0 - (y - lo) / span;
            delta = std::pow(2.0 * mu + (1.0 - 2.0 * mu) * std::pow(xy, eta_m + 1.0), power) - 1.0;
        } else {
            const double xy = 1.0 - (hi - y) / span;
            delta = 1.0 - std::pow(2.0 * (1.0 - mu) + 2.0 * (mu - 0.5) * std::pow(xy, eta_m + 1.0), power);
        }
        x[d] = std::clamp(y + delta * span, lo, hi);
    }
}

/// SBX on consecutive pairs, then polynomial mutation; one child per pool slot.
/// The mutation index is the stage-1 or stage-2 value from `params`.
inline std::vector<Vector> ga_offspring(std::span<const Solution> pool, const OperatorParams& params, int stage,
                                        const Bounds& bounds, Rng& rng) {
    std::vector<Vector> out;
    if (pool.empty()) {
        return out;
    }
    const double eta_m = stage == 1 ? params.eta_m_stage1 : params.eta_m_stage2;
    const double pm = params.mutation_probability(bounds.size());
    out.reserve(pool.size() + 1);
    Vector c1;
    Vector c2;
    for (std::size_t i = 0; i < pool.size(); i += 2) {
        const auto& p1 = pool[i].decisions;
        const auto& p2 = i + 1 < pool.size() ? pool[i + 1].decisions : pool.back().decisions;
        sbx_pair(p1, p2, params.eta_c, params.pc, rng, c1, c2);
        for (Vector* c : {&c1, &c2}) {
            *c = clamp_to_bounds(std::move(*c), bounds);
            polynomial_mutation(*c, bounds, pm, eta_m, rng);
            out.push_back(std::move(*c));
        }
    }
    out.resize(pool.size());
    return out;
}

// ---------------------------------------------------------------------------
// Differential evolution

namespace detail {

/// Three distinct indices in [0, n), none equal to `exclude`.
inline std::array<std::size_t, 3> distinct_triple(std::size_t n, std::size_t exclude, Rng& rng) {
    std::array<std::size_t, 3> r{};
    for (std::size_t k = 0; k < 3; ++k) {
        std::size_t c;
        do {
            c = rng.below(n);
        } while (c == exclude || std::find(r.begin(), r.begin() + static_cast<long>(k), c) != r.begin() + static_cast<long>(k));
        r[k] = c;
    }
    return r;
}

inline double draw(const std::vector<double>& set, Rng& rng) { return set[rng.below(set.size())]; }

inline void require_donors(std::size_t n, const char* who) {
    if (n < 4) {
        throw std::invalid_argument(std::string(who) + ": need at least 4 individuals");
    }
}

} // namespace detail

/// x1 + F * (x2 - x3)
inline Vector rand_1_mutant(std::span<const double> x1, std::span<const double> x2, std::span<const double> x3,
                            double f) {
    Vector v(x1.size());
    for (std::size_t d = 0; d < v.size(); ++d) {
        v[d] = x1[d] + f * (x2[d] - x3[d]);
    }
    return v;
}

/// x1 + R .* x1 + F * (x2 - x3)
inline Vector current_to_rand_mutant(std::span<const double> x1, std::span<const double> x2,
                                     std::span<const double> x3, std::span<const double> r, double f) {
    Vector v(x1.size());
    for (std::size_t d = 0; d < v.size(); ++d) {
        v[d] = x1[d] + r[d] * x1[d] + f * (x2[d] - x3[d]);
    }
    return v;
}

/// x1 + F * (pbest - x1) + F * (x2 - x3)
inline Vector current_to_pbest_mutant(std::span<const double> x1, std::span<const double> pbest,
                                      std::span<const double> x2, std::span<const double> x3, double f) {
    Vector v(x1.size());
    for (std::size_t d = 0; d < v.size(); ++d) {
        v[d] = x1[d] + f * (pbest[d] - x1[d]) + f * (x2[d] - x3[d]);
    }
    return v;
}

/// Takes the mutant coordinate when rand < CR or at the forced index, else the target's.
inline Vector binomial_crossover(std::span<const double> target, std::span<const double> mutant, double cr,
                                 std::size_t forced, Rng& rng) {
    Vector u(target.begin(), target.end());
    for (std::size_t d = 0; d < u.size(); ++d) {
        if (rng.uniform() < cr || d == forced) {
            u[d] = mutant[d];
        }
    }
    return u;
}

/// DE/rand/1/bin with F and CR drawn per individual.
inline std::vector<Vector> de_rand_1(std::span<const Solution> pop, const OperatorParams& params,
                                     const Bounds& bounds, Rng& rng) {
    detail::require_donors(pop.size(), "de_rand_1");
    std::vector<Vector> out;
    out.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto r = detail::distinct_triple(pop.size(), i, rng);
        const double f = detail::draw(params.f_set, rng);
        const double cr = detail::draw(params.cr_set_de, rng);
        const auto v = rand_1_mutant(pop[r[0]].decisions, pop[r[1]].decisions, pop[r[2]].decisions, f);
        const std::size_t forced = rng.below(bounds.size());
        out.push_back(clamp_to_bounds(binomial_crossover(pop[i].decisions, v, cr, forced, rng), bounds));
    }
    return out;
}

/// DE/current-to-rand/1 as used here: base scaled by a fresh uniform vector, no crossover.
inline std::vector<Vector> de_current_to_rand(std::span<const Solution> pop, const OperatorParams& params,
                                              const Bounds& bounds, Rng& rng) {
    detail::require_donors(pop.size(), "de_current_to_rand");
    std::vector<Vector> out;
    out.reserve(pop.size());
    Vector r_vec(bounds.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto r = detail::distinct_triple(pop.size(), i, rng);
        const double f = detail::draw(params.f_set, rng);
        for (double& x : r_vec) {
            x = rng.uniform();
        }
        out.push_back(clamp_to_bounds(
            current_to_rand_mutant(pop[r[0]].decisions, pop[r[1]].decisions, pop[r[2]].decisions, r_vec, f), bounds));
    }
    return out;
}

/// DE/current-to-pbest/1 on the auxiliary pool; pbest comes from the top share of
/// `pop_main` under the feasibility-first order.
inline std::vector<Vector> de_current_to_pbest(std::span<const Solution> pop_aux, std::span<const Solution> pop_main,
                                               const OperatorParams& params, const Bounds& bounds, Rng& rng) {
    detail::require_donors(pop_aux.size(), "de_current_to_pbest");
    if (pop_main.empty()) {
        throw std::invalid_argument("de_current_to_pbest: empty main population");
    }
    const auto ranked = epsilon_cdp_order(pop_main, 0.0).sorted();
    const auto top = static_cast<std::size_t>(
        std::ceil(params.p_best_fraction * static_cast<double>(pop_main.size()) - 1e-12));
    const std::size_t pool = std::clamp<std::size_t>(top, 1, pop_main.size());
    std::vector<Vector> out;
    out.reserve(pop_aux.size());
    for (std::size_t i = 0; i < pop_aux.size(); ++i) {
        const auto r = detail::distinct_triple(pop_aux.size(), i, rng);
        const double f = detail::draw(params.f_set, rng);
        const auto& pbest = pop_main[ranked[rng.below(pool)]].decisions;
        out.push_back(clamp_to_bounds(
            current_to_pbest_mutant(pop_aux[r[0]].decisions, pbest, pop_aux[r[1]].decisions, pop_aux[r[2]].decisions, f),
            bounds));
    }
    return out;
}

/// DE/transfer/1: coordinate-wise mix of a random main member and each auxiliary pool member.
/// Main coordinates are taken when rand < CR or at the forced index.
inline std::vector<Vector> de_transfer(std::span<const Solution> pop_main, std::span<const Solution> pop_aux,
                                       const OperatorParams& params, Rng& rng) {
    if (pop_main.empty() || pop_aux.empty()) {
        throw std::invalid_argument("de_transfer: empty population");
    }
    std::vector<Vector> out;
    out.reserve(pop_aux.size());
    for (std::size_t i = 0; i < pop_aux.size(); ++i) {
        const auto& main = pop_main[rng.below(pop_main.size())].decisions;
        const auto& aux = pop_aux[i].decisions;
        const double cr = detail::draw(params.cr_set_transfer, rng);
        const std::size_t forced = rng.below(aux.size());
        out.push_back(binomial_crossover(aux, main, cr, forced, rng));
    }
    return out;
}

} // namespace cmo

#endif

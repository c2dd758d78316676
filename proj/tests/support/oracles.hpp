// Independent reference implementations used by the unit and acceptance tests.
// Written for clarity over speed; they share no code with the library beyond the
// Solution type and the RNG.
#pragma once

#include "cmo/core.hpp"
#include "cmo/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

using cmo::Solution;
using cmo::Vector;

/// Solution tagged by decisions[0] so selections can be compared by identity.
inline Solution tagged(double tag, Vector objectives, double cv = 0.0) {
    Solution s;
    s.decisions = {tag};
    s.objectives = std::move(objectives);
    s.cv = cv;
    return s;
}

inline bool dominates(const Vector& a, const Vector& b) {
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) {
            return false;
        }
        strictly = strictly || a[i] < b[i];
    }
    return strictly;
}

inline double relaxed(double cv, double eps) {
    if (std::isinf(eps)) {
        return 0.0;
    }
    return cv > eps ? cv - eps : 0.0;
}

/// a beats b under epsilon-relaxed constrained dominance.
inline bool beats(const Solution& a, const Solution& b, double eps) {
    const double ra = relaxed(a.cv, eps);
    const double rb = relaxed(b.cv, eps);
    if (ra != rb) {
        return ra < rb;
    }
    return dominates(a.objectives, b.objectives);
}

/// Rank of each member by repeated peeling: a member is in the current layer when no
/// remaining member beats it.
inline std::vector<int> peel_ranks(const std::vector<Solution>& pop, double eps) {
    const std::size_t n = pop.size();
    std::vector<int> rank(n, -1);
    std::size_t assigned = 0;
    for (int layer = 0; assigned < n; ++layer) {
        std::vector<std::size_t> current;
        for (std::size_t i = 0; i < n; ++i) {
            if (rank[i] != -1) {
                continue;
            }
            bool beaten = false;
            for (std::size_t j = 0; j < n && !beaten; ++j) {
                beaten = j != i && rank[j] == -1 && beats(pop[j], pop[i], eps);
            }
            if (!beaten) {
                current.push_back(i);
            }
        }
        for (auto i : current) {
            rank[i] = layer;
        }
        assigned += current.size();
    }
    return rank;
}

/// Crowding distance of each member inside its layer. Ties in an objective are ordered
/// by index; boundary members get infinity.
inline std::vector<double> layer_crowding(const std::vector<Solution>& pop, const std::vector<int>& rank) {
    const std::size_t n = pop.size();
    std::vector<double> dist(n, 0.0);
    const int layers = n ? *std::max_element(rank.begin(), rank.end()) + 1 : 0;
    const std::size_t m = n ? pop[0].objectives.size() : 0;
    for (int r = 0; r < layers; ++r) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < n; ++i) {
            if (rank[i] == r) {
                members.push_back(i);
            }
        }
        for (std::size_t k = 0; k < m; ++k) {
            auto order = members;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (pop[a].objectives[k] != pop[b].objectives[k]) {
                    return pop[a].objectives[k] < pop[b].objectives[k];
                }
                return a < b;
            });
            const double lo = pop[order.front()].objectives[k];
            const double hi = pop[order.back()].objectives[k];
            dist[order.front()] = std::numeric_limits<double>::infinity();
            dist[order.back()] = std::numeric_limits<double>::infinity();
            if (hi - lo <= 0.0) {
                continue;
            }
            for (std::size_t p = 1; p + 1 < order.size(); ++p) {
                dist[order[p]] += (pop[order[p + 1]].objectives[k] - pop[order[p - 1]].objectives[k]) / (hi - lo);
            }
        }
    }
    return dist;
}

/// NSGA-II survivor selection: fill whole layers, truncate the split layer by descending
/// crowding (ties by index). Returns the chosen indices in ascending order.
inline std::vector<std::size_t> nsga2_select(const std::vector<Solution>& pop, std::size_t n, double eps) {
    const auto rank = peel_ranks(pop, eps);
    const auto crowd = layer_crowding(pop, rank);
    std::vector<std::size_t> chosen;
    for (int r = 0; chosen.size() < std::min(n, pop.size()); ++r) {
        std::vector<std::size_t> layer;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (rank[i] == r) {
                layer.push_back(i);
            }
        }
        if (chosen.size() + layer.size() > n) {
            std::sort(layer.begin(), layer.end(), [&](std::size_t a, std::size_t b) {
                if (crowd[a] != crowd[b]) {
                    return crowd[a] > crowd[b];
                }
                return a < b;
            });
            layer.resize(n - chosen.size());
        }
        chosen.insert(chosen.end(), layer.begin(), layer.end());
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

/// Straight-line execution of the subregion selection step list for two objectives:
/// nondominated set S of the union, min/max normalization over S, N_s lattice directions,
/// radius h = smallest angle between S and the directions, one pick per direction,
/// top-up to 25 from the unpicked remainder, then NSGA-II truncation under eps.
/// Returns the tags of the selected members, sorted.
inline std::vector<double> subregion_select_2d(const std::vector<Solution>& aux, const std::vector<Solution>& off,
                                               std::size_t ns, double eps) {
    std::vector<Solution> a = aux;
    a.insert(a.end(), off.begin(), off.end());

    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < a.size(); ++j) {
            dominated = dominated || dominates(a[j].objectives, a[i].objectives);
        }
        if (!dominated) {
            s.push_back(i);
        }
    }
    double zmin[2] = {1e300, 1e300};
    double zmax[2] = {-1e300, -1e300};
    for (auto i : s) {
        for (int k = 0; k < 2; ++k) {
            zmin[k] = std::min(zmin[k], a[i].objectives[k]);
            zmax[k] = std::max(zmax[k], a[i].objectives[k]);
        }
    }
    const auto norm = [&](const Solution& x, int k) {
        const double range = zmax[k] - zmin[k];
        return (x.objectives[k] - zmin[k]) / (range > 0 ? range : 1.0);
    };

    // Lattice with H = ns - 1 points per edge, first component descending.
    const double H = static_cast<double>(ns - 1);
    std::vector<std::array<double, 2>> w;
    for (std::size_t i = 0; i < ns; ++i) {
        double w0 = (H - static_cast<double>(i)) / H;
        double w1 = static_cast<double>(i) / H;
        const double len = std::sqrt(w0 * w0 + w1 * w1);
        w.push_back({w0 / len, w1 / len});
    }
    const auto angle = [&](const Solution& x, std::size_t d) {
        const double p0 = norm(x, 0);
        const double p1 = norm(x, 1);
        const double len2 = p0 * p0 + p1 * p1;
        if (len2 == 0.0) {
            return 0.0;
        }
        double c = (p0 * w[d][0] + p1 * w[d][1]) / std::sqrt(len2);
        c = std::max(-1.0, std::min(1.0, c));
        return std::acos(c);
    };

    double h = 1e300;
    for (auto i : s) {
        for (std::size_t d = 0; d < ns; ++d) {
            h = std::min(h, angle(a[i], d));
        }
    }

    std::vector<std::size_t> p1;
    std::vector<bool> taken(a.size(), false);
    for (std::size_t d = 0; d < ns; ++d) {
        std::vector<std::size_t> a1;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (angle(a[i], d) < h) {
                a1.push_back(i);
            }
        }
        if (a1.empty()) {
            double best = 1e300;
            for (std::size_t i = 0; i < a.size(); ++i) {
                best = std::min(best, angle(a[i], d));
            }
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (angle(a[i], d) == best) {
                    a1.push_back(i);
                }
            }
        }
        std::vector<std::size_t> fa;
        for (auto i : a1) {
            if (a[i].cv == 0.0) {
                fa.push_back(i);
            }
        }
        std::size_t pick;
        if (fa.empty()) {
            pick = a1[0];
            for (auto i : a1) {
                if (angle(a[i], d) < angle(a[pick], d)) {
                    pick = i;
                }
            }
        } else {
            pick = fa[0];
            for (auto i : fa) {
                if (a[i].cv + angle(a[i], d) < a[pick].cv + angle(a[pick], d)) {
                    pick = i;
                }
            }
        }
        p1.push_back(pick);
        taken[pick] = true;
    }

    std::vector<Solution> p;
    for (auto i : p1) {
        p.push_back(a[i]);
    }
    if (aux.size() < 25) {
        std::size_t room = 25 - aux.size();
        for (std::size_t i = 0; i < a.size() && room > 0; ++i) {
            if (!taken[i]) {
                p.push_back(a[i]);
                --room;
            }
        }
    }
    std::vector<double> tags;
    for (auto i : nsga2_select(p, ns, eps)) {
        tags.push_back(p[i].decisions[0]);
    }
    std::sort(tags.begin(), tags.end());
    return tags;
}

struct MonteCarloEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

/// Hypervolume by uniform sampling of the box spanned by the front's ideal point and ref.
inline MonteCarloEstimate hypervolume_mc(const std::vector<Vector>& front, const Vector& ref, std::size_t samples,
                                         cmo::Rng& rng) {
    const std::size_t m = ref.size();
    Vector lo(m, 1e300);
    for (const auto& p : front) {
        for (std::size_t k = 0; k < m; ++k) {
            lo[k] = std::min(lo[k], p[k]);
        }
    }
    double box = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
        box *= ref[k] - lo[k];
    }
    std::size_t hits = 0;
    Vector x(m);
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t k = 0; k < m; ++k) {
            x[k] = rng.uniform(lo[k], ref[k]);
        }
        for (const auto& p : front) {
            bool covered = true;
            for (std::size_t k = 0; k < m && covered; ++k) {
                covered = p[k] <= x[k];
            }
            if (covered) {
                ++hits;
                break;
            }
        }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    return {box * frac, box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

/// Random mutually nondominated front: points on a perturbed simplex-like surface, filtered.
inline std::vector<Vector> random_front(std::size_t m, std::size_t n, cmo::Rng& rng) {
    std::vector<Vector> pts;
    while (pts.size() < n) {
        Vector p(m);
        double sum = 0.0;
        for (auto& x : p) {
            x = rng.uniform(0.05, 1.0);
            sum += x;
        }
        for (auto& x : p) {
            x = x / sum * rng.uniform(0.8, 1.0);
        }
        bool ok = true;
        for (const auto& q : pts) {
            ok = ok && !dominates(q, p) && !dominates(p, q);
        }
        if (ok) {
            pts.push_back(p);
        }
    }
    return pts;
}

} // namespace oracle

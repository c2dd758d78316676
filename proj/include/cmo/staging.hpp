#ifndef CMO_STAGING_HPP
#define CMO_STAGING_HPP

#include "cmo/core.hpp"
#include "cmo/selection.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>

namespace cmo {

/// Relationship between the unconstrained and constrained fronts.
enum class FrontRelation : int { overlap = 1, partial = 2, separated = 3, unclear = 4 };

inline int to_int(FrontRelation t) noexcept { return static_cast<int>(t); }

inline FrontRelation relation_from_int(int k) {
    if (k < 1 || k > 4) {
        throw std::invalid_argument("relation type must be 1..4");
    }
    return static_cast<FrontRelation>(k);
}

/// Ideal, nadir and average objective points of the auxiliary population, one entry per
/// generation, keeping the last gap+1 generations.
class PointHistory {
public:
    struct Entry {
        Vector ideal;
        Vector nadir;
        Vector average;
    };

    explicit PointHistory(std::size_t gap = 10, double guard = 1e-7) : gap_(gap), guard_(guard) {
        if (gap_ == 0) {
            throw std::invalid_argument("PointHistory: gap must be positive");
        }
    }

    void push(Entry e) {
        entries_.push_back(std::move(e));
        while (entries_.size() > gap_ + 1) {
            entries_.pop_front();
        }
    }

    void push(const Population& pop) { push(Entry{pop.ideal(), pop.nadir(), pop.average()}); }

    std::size_t gap() const noexcept { return gap_; }
    double guard() const noexcept { return guard_; }
    bool ready() const noexcept { return entries_.size() == gap_ + 1; }
    const Entry& newest() const { return entries_.back(); }
    const Entry& lagged() const { return entries_.front(); }

private:
    std::size_t gap_;
    double guard_;
    std::deque<Entry> entries_;
};

namespace detail {

inline double relative_shift(const Vector& now, const Vector& before, double guard) {
    double r = 0.0;
    for (std::size_t i = 0; i < now.size(); ++i) {
        r = std::max(r, std::abs(now[i] - before[i]) / std::max(std::abs(before[i]), guard));
    }
    return r;
}

} // namespace detail

/// Largest relative shift of the ideal, nadir or average point over the history gap.
/// Empty until gap+1 generations have been recorded.
inline std::optional<double> rs_metric(const PointHistory& history) {
    if (!history.ready()) {
        return std::nullopt;
    }
    const auto& now = history.newest();
    const auto& before = history.lagged();
    const double rz = detail::relative_shift(now.ideal, before.ideal, history.guard());
    const double rn = detail::relative_shift(now.nadir, before.nadir, history.guard());
    const double ra = detail::relative_shift(now.average, before.average, history.guard());
    return std::max({rz, rn, ra});
}

/// Stage-transition test. The relaxed form accepts looser stability as generations pass;
/// the strict form keeps only the tightest branch and the generation cap.
inline bool should_switch(double rs, std::size_t generation, bool relaxed = true) {
    if (generation > 250) {
        return true;
    }
    if (rs < 0.001 && generation > 10) {
        return true;
    }
    if (!relaxed) {
        return false;
    }
    return (rs < 0.02 && generation > 100) || (rs < 0.05 && generation > 150);
}

struct ClassifierThresholds {
    double overlap = 0.9;
};

/// Feasible share of the auxiliary population's Pareto set: >= overlap -> 1, 0 -> 3, else 2.
inline FrontRelation classify_relationship(const Population& pop_main, const Population& pop_aux,
                                           ClassifierThresholds thresholds = {}) {
    if (pop_main.empty() || pop_aux.empty()) {
        throw std::invalid_argument("classify_relationship: empty population");
    }
    const auto front = nondominated_fronts(pop_aux.members(), infinity).front();
    const auto feasible = std::count_if(front.begin(), front.end(), [&](std::size_t i) { return pop_aux[i].feasible(); });
    const double phi = static_cast<double>(feasible) / static_cast<double>(front.size());
    if (phi >= thresholds.overlap) {
        return FrontRelation::overlap;
    }
    if (feasible == 0) {
        return FrontRelation::separated;
    }
    return FrontRelation::partial;
}

/// Current relation type plus the count of disagreeing reclassifications.
struct TypeTracker {
    FrontRelation type = FrontRelation::overlap;
    std::size_t cnt = 0;
};

/// Counts a disagreement and adopts the new type once more than three have accumulated.
/// With `reset_on_update` the counter restarts after each adoption.
inline TypeTracker track_type(TypeTracker tracker, FrontRelation ntype, bool reset_on_update = false) {
    if (ntype != tracker.type) {
        ++tracker.cnt;
        if (tracker.cnt > 3) {
            tracker.type = ntype;
            if (reset_on_update) {
                tracker.cnt = 0;
            }
        }
    }
    return tracker;
}

} // namespace cmo

#endif

#ifndef CMO_SCHEDULE_HPP
#define CMO_SCHEDULE_HPP

#include "cmo/staging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace cmo {

struct EpsilonSettings {
    double eps0 = 0.2;
    double curvature = 15.0;
    double floor_value = 1e-8;
    double separated_period = 200.0;
    double default_period = 150.0;
};

/// Stage-2 epsilon schedule anchored at the stage-switch evaluation count.
class EpsilonSchedule {
public:
    EpsilonSchedule(double switch_fe, double max_fe, EpsilonSettings settings = {})
        : settings_(settings), switch_fe_(switch_fe), max_fe_(max_fe) {
        if (!(max_fe > switch_fe)) {
            throw std::invalid_argument("EpsilonSchedule: maxFE must exceed the switch point");
        }
        const double remaining = max_fe - switch_fe;
        t1_ = switch_fe + 0.2 * remaining;
        t2_ = std::min(t1_ + 0.3 * remaining, max_fe);
        k_ = std::log(0.005 * settings_.eps0 / settings_.floor_value);
    }

    double switch_fe() const noexcept { return switch_fe_; }
    double max_fe() const noexcept { return max_fe_; }
    double t1() const noexcept { return t1_; }
    double t2() const noexcept { return t2_; }
    double k() const noexcept { return k_; }
    const EpsilonSettings& settings() const noexcept { return settings_; }

    /// eps0 * exp(-20 (FE - switch) / (maxFE - switch))
    double initial(double fe) const {
        return settings_.eps0 * std::exp(-20.0 * (fe - switch_fe_) / (max_fe_ - switch_fe_));
    }

    /// Three-phase schedule: slow logarithmic decline to 0.9 eps0 by t1, an oscillating
    /// linear descent to 0.005 eps0 by t2 (lower and slower for separated fronts), then
    /// exponential decay to the floor at maxFE.
    double final(double fe, FrontRelation type) const {
        const double e0 = settings_.eps0;
        if (fe <= t1_) {
            const double a = settings_.curvature;
            return e0 * (0.9 + 0.1 * std::log(1.0 + a * (1.0 - fe / t1_)) / std::log(1.0 + a));
        }
        if (fe <= t2_) {
            const double t = phase2_position(fe);
            constexpr double two_pi = 2.0 * std::numbers::pi;
            if (type == FrontRelation::separated) {
                const double amp = 0.005 * e0 * std::exp(-8.0 * t);
                return phase2_baseline(fe, type) + amp * std::sin(two_pi * fe / settings_.separated_period);
            }
            const double amp = 0.04 * e0 * std::exp(-5.0 * t);
            return phase2_baseline(fe, type) + amp * std::sin(two_pi * fe / settings_.default_period);
        }
        return 0.005 * e0 * std::exp(-k_ * (fe - t2_) / (max_fe_ - t2_));
    }

    /// Linear part of the middle phase, without the oscillation.
    double phase2_baseline(double fe, FrontRelation type) const {
        const double e0 = settings_.eps0;
        const double t = phase2_position(fe);
        const double start = type == FrontRelation::separated ? 0.05 : 0.9;
        return start * e0 - (start - 0.005) * e0 * t;
    }

private:
    double phase2_position(double fe) const { return t2_ > t1_ ? (fe - t1_) / (t2_ - t1_) : 1.0; }

    EpsilonSettings settings_;
    double switch_fe_;
    double max_fe_;
    double t1_ = 0.0;
    double t2_ = 0.0;
    double k_ = 0.0;
};

/// Offspring intensity factors for the main and auxiliary populations.
struct DraState {
    double f1 = 1.0;
    double f2 = 1.0;
};

inline constexpr double dra_floor = 0.25 + 1e-6;

/// Resource allocation between populations from the feasible ratios of each.
/// `progress` only ever increases the total budget S; negative values count as zero.
inline DraState dra_allocate(DraState prev, FrontRelation type, double progress, double fr1, double fr2,
                             std::size_t cnt) {
    if (fr1 < 0.0 || fr1 > 1.0 || fr2 < 0.0 || fr2 > 1.0) {
        throw std::invalid_argument("dra_allocate: feasible ratios must lie in [0,1]");
    }
    const double denom = prev.f1 + prev.f2 + 1.0;
    const double corr = (fr2 / denom) * std::max(0.0, progress);
    const double s = 2.0 + corr;
    const double r1 = fr1 / denom;
    const double r2 = fr2 / denom;
    DraState next;
    if (type == FrontRelation::separated && cnt > 3) {
        next.f2 = 0.25 + r2 * (s - 1.25) / 3.0;
        next.f1 = (s - 3.0 * next.f2) / 2.0;
    } else if (type == FrontRelation::separated) {
        next.f2 = 0.25 + r2 * (s - 1.0) / 3.0;
        next.f1 = s - 3.0 * next.f2;
    } else {
        next.f1 = 0.25 + r1 * (s - 1.0) / 2.0;
        next.f2 = 0.25 + r2 * (s - 1.0) / 2.0;
    }
    next.f1 = std::max(next.f1, dra_floor);
    next.f2 = std::max(next.f2, dra_floor);
    return next;
}

/// Equal per-operator factors satisfying f1*count1 + f2*count2 = 2.
inline DraState no_dra_factors(std::size_t count1, std::size_t count2) {
    if (count1 < 1 || count2 < 1) {
        throw std::invalid_argument("no_dra_factors: operator counts must be positive");
    }
    const double f = 2.0 / static_cast<double>(count1 + count2);
    return {f, f};
}

/// Auxiliary population size: ceil(max(25, (1 - fr2) N)).
inline std::size_t aux_size(double fr2, std::size_t n) {
    if (fr2 < 0.0 || fr2 > 1.0) {
        throw std::invalid_argument("aux_size: feasible ratio must lie in [0,1]");
    }
    if (n < 25) {
        throw std::invalid_argument("aux_size: population size must be at least 25");
    }
    return static_cast<std::size_t>(std::ceil(std::max(25.0, (1.0 - fr2) * static_cast<double>(n)) - 1e-9));
}

} // namespace cmo

#endif

#ifndef CMO_METRICS_HPP
#define CMO_METRICS_HPP

#include "cmo/core.hpp"
#include "cmo/problems.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace cmo {

namespace detail {

/// Points strictly better than `ref` in every objective.
inline std::vector<Vector> inside_reference(std::span<const Vector> front, std::span<const double> ref) {
    std::vector<Vector> kept;
    for (const auto& p : front) {
        if (p.size() != ref.size()) {
            throw std::invalid_argument("hypervolume: point dimension differs from reference");
        }
        bool inside = true;
        for (std::size_t i = 0; i < p.size(); ++i) {
            inside = inside && p[i] < ref[i];
        }
        if (inside) {
            kept.push_back(p);
        }
    }
    return kept;
}

/// Sweep over points sorted by the first objective.
inline double hv2d_sorted(std::span<const Vector> sorted, double r0, double r1) {
    double hv = 0.0;
    double level = r1;
    for (const auto& p : sorted) {
        if (p[1] < level) {
            hv += (r0 - p[0]) * (level - p[1]);
            level = p[1];
        }
    }
    return hv;
}

} // namespace detail

/// Exact hypervolume for two or three objectives. Points that do not strictly dominate
/// the reference point are discarded.
inline double hypervolume(std::span<const Vector> front, std::span<const double> ref) {
    const std::size_t m = ref.size();
    if (m != 2 && m != 3) {
        throw std::invalid_argument("hypervolume: only 2 or 3 objectives are supported");
    }
    auto pts = detail::inside_reference(front, ref);
    if (pts.empty()) {
        return 0.0;
    }
    if (m == 2) {
        std::sort(pts.begin(), pts.end());
        return detail::hv2d_sorted(pts, ref[0], ref[1]);
    }
    // Slice along the third objective: between consecutive f3 levels the dominated
    // cross-section is the 2D hypervolume of every point at or below the slab.
    std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) { return a[2] < b[2]; });
    double hv = 0.0;
    std::vector<Vector> active;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        active.insert(std::upper_bound(active.begin(), active.end(), pts[i]), pts[i]);
        const double top = i + 1 < pts.size() ? pts[i + 1][2] : ref[2];
        const double depth = top - pts[i][2];
        if (depth > 0.0) {
            hv += depth * detail::hv2d_sorted(active, ref[0], ref[1]);
        }
    }
    return hv;
}

/// Mean distance from each reference point to its nearest front point; +inf for an empty front.
inline double igd(std::span<const Vector> front, std::span<const Vector> reference) {
    if (reference.empty()) {
        throw std::invalid_argument("igd: empty reference set");
    }
    if (front.empty()) {
        return infinity;
    }
    double total = 0.0;
    for (const auto& r : reference) {
        double best = infinity;
        for (const auto& p : front) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) {
                const double diff = p[i] - r[i];
                d2 += diff * diff;
            }
            best = std::min(best, d2);
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(reference.size());
}

/// Hypervolume normalization: objectives rescaled by the reference front's ideal and nadir,
/// measured against a reference point of `hv_reference` in every normalized objective.
struct MetricConfig {
    double hv_reference = 1.1;
    std::size_t reference_points = 1000;
    Vector ideal;
    Vector nadir;

    static MetricConfig for_front(const ReferenceFront& rf, double hv_reference = 1.1) {
        MetricConfig mc;
        mc.hv_reference = hv_reference;
        mc.reference_points = rf.points.size();
        const std::size_t m = rf.points.front().size();
        mc.ideal.assign(m, infinity);
        mc.nadir.assign(m, -infinity);
        for (const auto& p : rf.points) {
            for (std::size_t i = 0; i < m; ++i) {
                mc.ideal[i] = std::min(mc.ideal[i], p[i]);
                mc.nadir[i] = std::max(mc.nadir[i], p[i]);
            }
        }
        return mc;
    }

    Vector normalize(std::span<const double> f) const {
        Vector out(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double range = nadir[i] - ideal[i];
            out[i] = (f[i] - ideal[i]) / (range > 0.0 ? range : 1.0);
        }
        return out;
    }

    double normalized_hypervolume(std::span<const Vector> front) const {
        std::vector<Vector> scaled;
        scaled.reserve(front.size());
        for (const auto& p : front) {
            scaled.push_back(normalize(p));
        }
        const Vector ref(ideal.size(), hv_reference);
        return hypervolume(scaled, ref);
    }
};

} // namespace cmo

#endif

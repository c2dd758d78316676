#ifndef CMO_STATS_HPP
#define CMO_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace cmo::stats {

enum class Verdict { better, worse, equal };

inline constexpr std::string_view symbol(Verdict v) {
    switch (v) {
    case Verdict::better:
        return "+";
    case Verdict::worse:
        return "-";
    default:
        return "=";
    }
}

/// Whether smaller sample values are preferable.
enum class Sense { minimize, maximize };

struct TestReport {
    double statistic = 0.0;
    double p_value = 1.0;
    Verdict verdict = Verdict::equal;
    bool exact = false;
};

struct SignedRankReport : TestReport {
    double r_plus = 0.0;
    double r_minus = 0.0;
    std::size_t n = 0;
};

/// Average ranks (1-based) with ties sharing their mean rank.
inline std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) {
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[idx[k]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

/// Sum over tie groups of t^3 - t.
inline double tie_term(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) {
            ++j;
        }
        const double t = static_cast<double>(j - i);
        sum += t * t * t - t;
        i = j;
    }
    return sum;
}

/// Two-sided normal tail with continuity correction.
inline double normal_two_sided(double deviation, double variance) {
    if (variance <= 0.0) {
        return 1.0;
    }
    const double z = std::max(0.0, std::abs(deviation) - 0.5) / std::sqrt(variance);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

inline constexpr std::size_t ranksum_exact_limit = 16;
inline constexpr std::size_t signed_rank_exact_limit = 12;

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test of `a` against `b`.
/// Exact permutation p-value for small pooled samples, otherwise the tie- and
/// continuity-corrected normal approximation. `statistic` is the U of `a`.
inline TestReport ranksum_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05,
                               Sense sense = Sense::minimize, bool allow_exact = true) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("ranksum_test: each sample needs at least two values");
    }
    const std::size_t n1 = a.size();
    const std::size_t n = a.size() + b.size();
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = midranks(pooled);
    const double w = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(n1), 0.0);
    const double expected = static_cast<double>(n1) * static_cast<double>(n + 1) / 2.0;
    const double observed = std::abs(w - expected);

    TestReport rep;
    rep.statistic = w - static_cast<double>(n1 * (n1 + 1)) / 2.0;
    const bool constant = std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); });
    if (constant) {
        rep.p_value = 1.0;
    } else if (allow_exact && n <= ranksum_exact_limit) {
        // Enumerate every assignment of n1 pooled ranks to the first sample.
        std::uint64_t hits = 0;
        std::uint64_t total = 0;
        const auto recurse = [&](auto&& self, std::size_t start, std::size_t left, double sum) -> void {
            if (left == 0) {
                ++total;
                if (std::abs(sum - expected) >= observed - 1e-9) {
                    ++hits;
                }
                return;
            }
            for (std::size_t i = start; i + left <= n; ++i) {
                self(self, i + 1, left - 1, sum + ranks[i]);
            }
        };
        recurse(recurse, 0, n1, 0.0);
        rep.p_value = static_cast<double>(hits) / static_cast<double>(total);
        rep.exact = true;
    } else {
        const double n1d = static_cast<double>(n1);
        const double n2d = static_cast<double>(b.size());
        const double nd = static_cast<double>(n);
        const double var = n1d * n2d / 12.0 * ((nd + 1.0) - tie_term(pooled) / (nd * (nd - 1.0)));
        rep.p_value = normal_two_sided(w - expected, var);
    }
    if (rep.p_value >= alpha) {
        rep.verdict = Verdict::equal;
    } else {
        const bool a_lower = w < expected;
        rep.verdict = (a_lower == (sense == Sense::minimize)) ? Verdict::better : Verdict::worse;
    }
    return rep;
}

/// Multi-problem Wilcoxon signed-rank test over paired differences. Positive deltas
/// favour the first method. Zero deltas are dropped; exact null distribution for up to
/// 12 remaining deltas, otherwise normal approximation with tie and continuity correction.
inline SignedRankReport signed_rank_multiproblem(std::span<const double> deltas, double alpha = 0.05,
                                                 bool allow_exact = true) {
    std::vector<double> nz;
    for (double d : deltas) {
        if (!std::isfinite(d)) {
            throw std::invalid_argument("signed_rank_multiproblem: non-finite delta");
        }
        if (d != 0.0) {
            nz.push_back(d);
        }
    }
    SignedRankReport rep;
    if (nz.empty()) {
        rep.p_value = 1.0;
        return rep;
    }
    if (nz.size() < 5) {
        throw std::invalid_argument("signed_rank_multiproblem: need at least 5 nonzero deltas");
    }
    const std::size_t n = nz.size();
    std::vector<double> mags(n);
    std::transform(nz.begin(), nz.end(), mags.begin(), [](double d) { return std::abs(d); });
    const auto ranks = midranks(mags);
    for (std::size_t i = 0; i < n; ++i) {
        (nz[i] > 0.0 ? rep.r_plus : rep.r_minus) += ranks[i];
    }
    rep.n = n;
    rep.statistic = rep.r_plus;
    const double nd = static_cast<double>(n);
    const double expected = nd * (nd + 1.0) / 4.0;
    const double observed = std::abs(rep.r_plus - expected);
    if (allow_exact && n <= signed_rank_exact_limit) {
        std::uint64_t hits = 0;
        const std::uint64_t total = std::uint64_t{1} << n;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            double t = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (mask & (std::uint64_t{1} << i)) {
                    t += ranks[i];
                }
            }
            if (std::abs(t - expected) >= observed - 1e-9) {
                ++hits;
            }
        }
        rep.p_value = static_cast<double>(hits) / static_cast<double>(total);
        rep.exact = true;
    } else {
        const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term(mags) / 48.0;
        rep.p_value = normal_two_sided(rep.r_plus - expected, var);
    }
    if (rep.p_value >= alpha) {
        rep.verdict = Verdict::equal;
    } else {
        rep.verdict = rep.r_plus > rep.r_minus ? Verdict::better : Verdict::worse;
    }
    return rep;
}

} // namespace cmo::stats

#endif

#include "cmo/stats.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace cmo::stats;
using Catch::Approx;

TEST_CASE("midranks", "[stats]") {
    const std::vector<double> v{3, 1, 3, 2};
    CHECK(midranks(v) == std::vector<double>{3.5, 1, 3.5, 2});
    CHECK(tie_term(v) == 6.0);
}

TEST_CASE("rank-sum exact cases", "[stats]") {
    const std::vector<double> a{1, 2, 3}, b{10, 11, 12};
    const auto r = ranksum_test(a, b);
    CHECK(r.exact);
    CHECK(r.p_value == 0.1);
    CHECK(r.statistic == 0.0);
    CHECK(r.verdict == Verdict::equal);

    const std::vector<double> c{1, 2, 3, 4, 5}, d{6, 7, 8, 9, 10};
    const auto s = ranksum_test(c, d);
    CHECK(s.p_value == Approx(2.0 / 252.0));
    CHECK(s.verdict == Verdict::better);
    CHECK(ranksum_test(c, d, 0.05, Sense::maximize).verdict == Verdict::worse);
    CHECK(ranksum_test(d, c).verdict == Verdict::worse);

    const std::vector<double> flat{2, 2, 2};
    CHECK(ranksum_test(flat, flat).p_value == 1.0);
}

TEST_CASE("rank-sum normal approximation", "[stats]") {
    std::vector<double> a, b;
    for (int i = 0; i < 30; ++i) {
        a.push_back(i);
        b.push_back(i + 10.5);
    }
    const auto r = ranksum_test(a, b);
    CHECK_FALSE(r.exact);
    const double u = r.statistic;
    const double mean = 30.0 * 30.0 / 2.0;
    const double var = 30.0 * 30.0 * 61.0 / 12.0;
    CHECK(r.p_value == Approx(std::erfc((std::abs(u - mean) - 0.5) / std::sqrt(var) / std::sqrt(2.0))));
    CHECK(r.verdict == Verdict::better);
}

TEST_CASE("exact and approximate rank-sum agree in the middle", "[stats]") {
    const std::vector<double> a{1.1, 2.5, 3.3, 7.7, 9.1, 4.2, 6.6, 0.3};
    const std::vector<double> b{2.2, 5.5, 8.8, 9.9, 10.1, 3.9, 7.1, 6.0};
    const auto ex = ranksum_test(a, b, 0.05, Sense::minimize, true);
    const auto ap = ranksum_test(a, b, 0.05, Sense::minimize, false);
    CHECK(ex.exact);
    CHECK_FALSE(ap.exact);
    CHECK(ex.p_value == Approx(ap.p_value).margin(0.03));
}

TEST_CASE("signed-rank", "[stats]") {
    std::vector<double> deltas;
    for (int k = 1; k <= 61; ++k) {
        const bool negative = k <= 13 || k == 18;
        deltas.push_back(negative ? -k : k);
    }
    const auto r = signed_rank_multiproblem(deltas);
    CHECK(r.r_plus == 1782);
    CHECK(r.r_minus == 109);
    CHECK(r.p_value > 1e-9);
    CHECK(r.p_value < 4e-9);
    CHECK(r.verdict == Verdict::better);

    // exact: all eight positive gives 2 / 256
    const std::vector<double> pos{1, 2, 3, 4, 5, 6, 7, 8};
    const auto e = signed_rank_multiproblem(pos);
    CHECK(e.exact);
    CHECK(e.p_value == Approx(2.0 / 256.0));

    const std::vector<double> zeros(10, 0.0);
    CHECK(signed_rank_multiproblem(zeros).p_value == 1.0);
    const std::vector<double> few{1, -2, 0, 0};
    CHECK_THROWS_AS(signed_rank_multiproblem(few), std::invalid_argument);
}

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any fails.
#include "cmo/cmo.hpp"
#include "cmo/harness/experiment.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace cmo;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double selection_time_limit = 5.0;
constexpr double hv_time_limit = 30.0;
constexpr double hv_sigma = 3.0;
constexpr std::size_t hv_samples = 1000000;
constexpr double anchor_rel_tol = 1e-12;
constexpr double p1_igd_limit = 0.01;
constexpr double p1_time_limit = 120.0;
constexpr double p3_igd_limit = 0.02;
constexpr int p3_type3_min = 8;
constexpr double signed_rank_p_lo = 1e-9;
constexpr double signed_rank_p_hi = 4e-9;
constexpr std::size_t dra_fuzz_calls = 100000;
constexpr std::size_t seeds = 10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool rel_close(double got, double want) { return std::abs(got - want) <= anchor_rel_tol * std::abs(want); }

std::vector<double> tags(const Population& p) {
    std::vector<double> t;
    for (const auto& s : p) {
        t.push_back(s.decisions[0]);
    }
    std::sort(t.begin(), t.end());
    return t;
}

Outcome selection_oracle() {
    const auto t0 = Clock::now();
    Rng rng(101);
    int mismatches = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng.below(12);
        std::vector<Solution> u;
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid so that ties and duplicates occur
            const Vector f{double(rng.below(5)), double(rng.below(5))};
            u.push_back(oracle::tagged(double(i), f, rng.coin() ? 0.0 : rng.uniform()));
        }
        const std::size_t k = 1 + rng.below(n);
        std::vector<double> want;
        for (auto i : oracle::nsga2_select(u, k, infinity)) {
            want.push_back(double(i));
        }
        mismatches += tags(environmental_select(u, k, infinity)) != want;
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < selection_time_limit,
            std::to_string(mismatches) + "/200 mismatches, " + fmt(secs) + " s"};
}

Outcome subregion_oracle() {
    Rng rng(202);
    int mismatches = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<Solution> aux, off;
        for (std::size_t i = 0; i < 20; ++i) {
            const double cv = rng.uniform() < 0.3 ? rng.uniform(0.0, 0.5) : 0.0;
            auto s = oracle::tagged(double(i), {rng.uniform(), rng.uniform()}, cv);
            (i < 10 ? aux : off).push_back(s);
        }
        const double eps = t % 3 == 0 ? infinity : t % 3 == 1 ? 0.0 : 0.2;
        mismatches += tags(angle_subregion_select(aux, off, 5, eps)) != oracle::subregion_select_2d(aux, off, 5, eps);
    }
    return {mismatches == 0, std::to_string(mismatches) + "/100 mismatches"};
}

Outcome hypervolume_oracle() {
    const auto t0 = Clock::now();
    Rng rng(303);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t m = t < 10 ? 2 : 3;
        const auto front = oracle::random_front(m, 5 + rng.below(11), rng);
        const Vector ref(m, 1.1);
        const auto mc = oracle::hypervolume_mc(front, ref, hv_samples, rng);
        worst = std::max(worst, std::abs(hypervolume(front, ref) - mc.value) / mc.standard_error);
    }
    const double secs = seconds_since(t0);
    return {worst <= hv_sigma && secs < hv_time_limit, "worst deviation " + fmt(worst) + " SE, " + fmt(secs) + " s"};
}

Outcome schedule_anchors() {
    Rng rng(404);
    int bad = 0;
    for (int t = 0; t < 50; ++t) {
        const double sw = std::floor(rng.uniform(200, 50000));
        const double mx = sw + std::floor(rng.uniform(1000, 300000));
        const EpsilonSchedule s(sw, mx);
        for (auto type : {FrontRelation::overlap, FrontRelation::partial, FrontRelation::separated,
                          FrontRelation::unclear}) {
            bad += !rel_close(s.final(s.t1(), type), 0.18);
            bad += !rel_close(s.phase2_baseline(s.t2(), type), 1e-3);
            bad += !rel_close(s.final(mx, type), 1e-8);
        }
    }
    return {bad == 0, std::to_string(bad) + " anchor violations over 50 pairs"};
}

Outcome switch_guarantee() {
    int bad = 0;
    Rng rng(505);
    for (int t = 0; t < 10000; ++t) {
        const double rs = t < 4 ? std::vector<double>{0.0, 1e300, infinity, 0.02}[t] : rng.uniform(0, 1e6);
        bad += !should_switch(rs, 251) || !should_switch(rs, 251, false);
    }

    // Freeze the auxiliary population mid stage one and count generations to the switch.
    const auto p = make_problem("P3-separated");
    AlgorithmConfig cfg;
    Optimizer opt(p, cfg, 1);
    for (int g = 0; g < 20; ++g) {
        opt.step();
    }
    if (opt.state().flag != 0) {
        return {false, "switched before the freeze point"};
    }
    const Population frozen = opt.state().pop_aux;
    const std::size_t freeze_gen = opt.state().generation;
    PointHistory h = opt.state().history;
    std::size_t fired_at = 0;
    while (opt.state().flag == 0 && !opt.finished()) {
        const std::size_t g = opt.state().generation;
        opt.step();
        if (opt.state().flag != 0) {
            fired_at = g;
            break;
        }
        auto& s = opt.mutable_state();
        s.pop_aux = frozen;
        h.push(frozen);
        s.history = h;
    }
    const std::size_t lag = fired_at - freeze_gen;
    const bool ok = bad == 0 && fired_at > 0 && lag <= cfg.history_gap + 2;
    return {ok, "cap violations " + std::to_string(bad) + ", switch " + std::to_string(lag) +
                    " generations after freezing (limit " + std::to_string(cfg.history_gap + 2) + ")"};
}

struct Batch {
    std::vector<RunResult> runs;
    double seconds = 0.0;
    double median_igd() const {
        std::vector<double> v;
        for (const auto& r : runs) {
            v.push_back(r.final_igd);
        }
        return harness::median(v);
    }
};

Batch run_batch(const std::string& id, const std::string& variant) {
    const auto t0 = Clock::now();
    const auto p = make_problem(id);
    const auto cfg = apply_ablation(AlgorithmConfig{}, variant);
    Batch b;
    for (std::uint64_t s = 1; s <= seeds; ++s) {
        b.runs.push_back(run(p, cfg, s));
    }
    b.seconds = seconds_since(t0);
    return b;
}

Outcome stats_checks() {
    const std::vector<double> a{1, 2, 3}, b{10, 11, 12};
    const auto rs = stats::ranksum_test(a, b);
    std::vector<double> deltas;
    for (int k = 1; k <= 61; ++k) {
        deltas.push_back((k <= 13 || k == 18) ? -k : k);
    }
    const auto sr = stats::signed_rank_multiproblem(deltas);
    const bool ok = rs.exact && rs.p_value == 0.1 && sr.r_plus == 1782 && sr.r_minus == 109 &&
                    sr.p_value >= signed_rank_p_lo && sr.p_value <= signed_rank_p_hi;
    return {ok, "rank-sum p " + fmt(rs.p_value) + ", R+ " + fmt(sr.r_plus) + " R- " + fmt(sr.r_minus) + " p " +
                    fmt(sr.p_value)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto root = fs::temp_directory_path() / "cmo-acceptance-bench";
    fs::remove_all(root);
    std::vector<fs::path> dirs{root / "a", root / "b"};
    for (const auto& d : dirs) {
        auto cfg = harness::bench_config();
        cfg.output = d.string();
        const auto rep = harness::run_experiment(cfg);
        if (rep.failures) {
            return {false, "bench run reported failures"};
        }
    }
    std::size_t compared = 0, differing = 0;
    differing += slurp(dirs[0] / "summary.csv") != slurp(dirs[1] / "summary.csv");
    ++compared;
    for (const auto& e : fs::directory_iterator(dirs[0] / "logs")) {
        const auto other = dirs[1] / "logs" / e.path().filename();
        differing += !fs::exists(other) || slurp(e.path()) != slurp(other);
        ++compared;
    }
    fs::remove_all(root);
    return {differing == 0 && compared == 31,
            std::to_string(differing) + " of " + std::to_string(compared) + " files differ"};
}

Outcome dra_fuzz() {
    Rng rng(1111);
    const FrontRelation types[] = {FrontRelation::overlap, FrontRelation::partial, FrontRelation::separated,
                                   FrontRelation::unclear};
    double lowest = infinity;
    std::size_t mismatched = 0;
    for (std::size_t i = 0; i < dra_fuzz_calls; ++i) {
        const DraState prev{rng.uniform(dra_floor, 4.0), rng.uniform(dra_floor, 4.0)};
        const auto type = types[rng.below(4)];
        const double fr1 = rng.coin() ? rng.uniform() : double(rng.below(2));
        const double fr2 = rng.coin() ? rng.uniform() : double(rng.below(2));
        const std::size_t cnt = rng.below(8);
        const double ll = rng.uniform(-10.0, 10.0);
        const auto out = dra_allocate(prev, type, ll, fr1, fr2, cnt);
        lowest = std::min({lowest, out.f1, out.f2});
        if (ll < 0.0) {
            const auto zero = dra_allocate(prev, type, 0.0, fr1, fr2, cnt);
            mismatched += out.f1 != zero.f1 || out.f2 != zero.f2;
        }
    }
    return {lowest >= dra_floor && mismatched == 0,
            "lowest factor " + fmt(lowest) + ", negative-progress mismatches " + std::to_string(mismatched)};
}

} // namespace

int main() {
    int failures = 0;
    const auto report = [&](int id, const std::string& title, const Outcome& o) {
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << title << " -- " << o.detail << std::endl;
        failures += !o.pass;
    };
    const auto guarded = [](const std::function<Outcome()>& f) {
        try {
            return f();
        } catch (const std::exception& e) {
            return Outcome{false, std::string("exception: ") + e.what()};
        }
    };

    report(1, "selection matches brute-force NSGA-II", guarded(selection_oracle));
    report(2, "subregion selection matches literal oracle", guarded(subregion_oracle));
    report(3, "hypervolume agrees with Monte Carlo", guarded(hypervolume_oracle));
    report(4, "epsilon schedule anchors", guarded(schedule_anchors));
    report(5, "stage switch guarantee", guarded(switch_guarantee));

    const auto p1 = run_batch("P1-overlap", "full");
    report(6, "P1-overlap convergence", {p1.median_igd() <= p1_igd_limit && p1.seconds <= p1_time_limit,
                                         "median IGD " + fmt(p1.median_igd()) + " (limit " + fmt(p1_igd_limit) +
                                             "), " + fmt(p1.seconds) + " s"});

    const auto p3 = run_batch("P3-separated", "full");
    int type3 = 0;
    for (const auto& r : p3.runs) {
        type3 += r.type_at_switch == FrontRelation::separated;
    }
    report(7, "P3-separated convergence and classification",
           {p3.median_igd() <= p3_igd_limit && type3 >= p3_type3_min,
            "median IGD " + fmt(p3.median_igd()) + " (limit " + fmt(p3_igd_limit) + "), separated at switch " +
                std::to_string(type3) + "/10"});

    const auto wo3p = run_batch("P3-separated", "Wo3P");
    report(8, "Wo3P no better than full on P3-separated",
           {wo3p.median_igd() >= p3.median_igd(),
            "Wo3P median IGD " + fmt(wo3p.median_igd()) + " vs full " + fmt(p3.median_igd())});

    report(9, "rank-sum and signed-rank p-values", guarded(stats_checks));
    report(10, "bench output is byte-identical across invocations", guarded(determinism));
    report(11, "resource allocation floor", guarded(dra_fuzz));

    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}

#ifndef CMO_ENGINE_HPP
#define CMO_ENGINE_HPP

#include "cmo/core.hpp"
#include "cmo/metrics.hpp"
#include "cmo/problems.hpp"
#include "cmo/rng.hpp"
#include "cmo/schedule.hpp"
#include "cmo/selection.hpp"
#include "cmo/staging.hpp"
#include "cmo/variation.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cmo {

// ---------------------------------------------------------------------------
// Configuration and ablations

struct AlgorithmConfig {
    std::size_t population = 100;
    std::size_t max_fe = 50000;
    OperatorParams operators;
    EpsilonSettings epsilon;
    std::size_t history_gap = 10;
    double history_guard = 1e-7;
    ClassifierThresholds classifier;
    bool reset_cnt_on_update = false;
    /// Stage-2 auxiliary size; 0 selects the feasible-ratio rule.
    std::size_t fixed_aux_size = 0;
    /// Progress signal fed to the allocation rule.
    double dra_progress = 0.0;
    std::size_t reference_points = 1000;
    double hv_reference = 1.1;

    // Ablation switches, all on for the full algorithm.
    bool relaxed_switch = true;
    bool stage1_share_aux_offspring = true;
    bool opposition = true;
    bool three_phase = true;
    bool final_epsilon = true;
    bool dra = true;
    std::optional<FrontRelation> forced_plan;

    void validate() const {
        operators.validate();
        if (population < 5) {
            throw std::invalid_argument("AlgorithmConfig: population must be at least 5");
        }
        if (max_fe < 2 * population) {
            throw std::invalid_argument("AlgorithmConfig: maxFE must cover two initial populations");
        }
        if (history_gap == 0) {
            throw std::invalid_argument("AlgorithmConfig: history gap must be positive");
        }
        if (!(epsilon.eps0 > 0.0)) {
            throw std::invalid_argument("AlgorithmConfig: eps0 must be positive");
        }
    }
};

inline constexpr std::string_view variant_names[] = {"full",    "WoRR",    "WoS1C",   "WoOP",    "Wo3P", "Eps1",
                                                     "HOps-T1", "HOps-T2", "HOps-T3", "HOps-T4", "WoDRA"};

inline bool is_variant(std::string_view name) {
    for (auto v : variant_names) {
        if (v == name) {
            return true;
        }
    }
    return false;
}

/// Returns `config` with one ablation applied. "full" is the identity.
inline AlgorithmConfig apply_ablation(AlgorithmConfig config, std::string_view variant) {
    if (variant == "full") {
    } else if (variant == "WoRR") {
        config.relaxed_switch = false;
    } else if (variant == "WoS1C") {
        config.stage1_share_aux_offspring = false;
    } else if (variant == "WoOP") {
        config.opposition = false;
    } else if (variant == "Wo3P") {
        config.three_phase = false;
    } else if (variant == "Eps1") {
        config.final_epsilon = false;
    } else if (variant == "WoDRA") {
        config.dra = false;
    } else if (variant.size() == 7 && variant.substr(0, 6) == "HOps-T" && variant[6] >= '1' && variant[6] <= '4') {
        config.forced_plan = relation_from_int(variant[6] - '0');
    } else {
        throw std::invalid_argument("apply_ablation: unknown variant '" + std::string(variant) + "'");
    }
    return config;
}

// ---------------------------------------------------------------------------
// Hybrid operator plans

enum class OperatorKind { ga, de, de_rand, de_pbest, de_transfer };
enum class PoolKind { tournament, random };

inline std::string_view name(OperatorKind k) {
    switch (k) {
    case OperatorKind::ga:
        return "GA";
    case OperatorKind::de:
        return "DE";
    case OperatorKind::de_rand:
        return "DE_rand";
    case OperatorKind::de_pbest:
        return "DE_pbest";
    default:
        return "DE_transfer";
    }
}

struct HopsPlan {
    struct Slot {
        OperatorKind op;
        PoolKind pool;
    };
    std::vector<Slot> main;
    std::vector<Slot> aux;
};

/// Operator and mating-pool plan for each relation type. "DE" is DE/rand/1/bin and
/// "DE_rand" is DE/current-to-rand/1.
inline HopsPlan hops_plan(FrontRelation type) {
    using O = OperatorKind;
    constexpr auto T = PoolKind::tournament;
    constexpr auto R = PoolKind::random;
    switch (type) {
    case FrontRelation::overlap:
        return {{{O::de, T}, {O::ga, T}}, {{O::de_transfer, T}, {O::de_pbest, T}}};
    case FrontRelation::partial:
        return {{{O::ga, T}, {O::de, R}}, {{O::de_transfer, T}, {O::de_pbest, R}}};
    case FrontRelation::separated:
        return {{{O::de_rand, T}}, {{O::de_rand, T}, {O::de_pbest, R}, {O::de, R}}};
    default:
        return {{{O::ga, T}, {O::de, R}}, {{O::de_transfer, T}, {O::de_rand, R}, {O::de_pbest, R}}};
    }
}

struct HopsOffspring {
    std::vector<Vector> main;
    std::vector<Vector> aux;
    /// Operators that produced nothing (pool rounded to zero or too small for DE).
    std::vector<std::string> skipped;
};

/// Builds a pool per plan slot (round(f1 N) from the main population, round(f2 N) from the
/// auxiliary one) and applies the slot's operator, one child per pool slot. Main tournaments
/// use the feasibility-first order, auxiliary ones ignore constraints.
inline HopsOffspring hops_generate(const Population& pop_main, const Population& pop_aux, FrontRelation effective_type,
                                   double f1, double f2, std::size_t n, const OperatorParams& params,
                                   const Bounds& bounds, Rng& rng) {
    const HopsPlan plan = hops_plan(effective_type);
    HopsOffspring out;
    const auto run_list = [&](const std::vector<HopsPlan::Slot>& slots, const Population& source, double eps,
                              std::size_t k, std::vector<Vector>& sink, const char* label) {
        for (const auto& slot : slots) {
            if (k == 0) {
                out.skipped.push_back(std::string(label) + ":" + std::string(name(slot.op)));
                continue;
            }
            const auto pool = slot.pool == PoolKind::tournament ? tournament_pool(source.members(), k, eps, rng)
                                                                : random_pool(source.members(), k, rng);
            const bool needs_donors = slot.op == OperatorKind::de || slot.op == OperatorKind::de_rand ||
                                      slot.op == OperatorKind::de_pbest;
            if (needs_donors && pool.size() < 4) {
                out.skipped.push_back(std::string(label) + ":" + std::string(name(slot.op)));
                continue;
            }
            std::vector<Vector> children;
            switch (slot.op) {
            case OperatorKind::ga:
                children = ga_offspring(pool, params, 2, bounds, rng);
                break;
            case OperatorKind::de:
                children = de_rand_1(pool, params, bounds, rng);
                break;
            case OperatorKind::de_rand:
                children = de_current_to_rand(pool, params, bounds, rng);
                break;
            case OperatorKind::de_pbest:
                children = de_current_to_pbest(pool, pop_main.members(), params, bounds, rng);
                break;
            case OperatorKind::de_transfer:
                children = de_transfer(pop_main.members(), pool, params, rng);
                break;
            }
            sink.insert(sink.end(), std::make_move_iterator(children.begin()), std::make_move_iterator(children.end()));
        }
    };
    const auto count = [n](double f) { return static_cast<std::size_t>(std::lround(f * static_cast<double>(n))); };
    run_list(plan.main, pop_main, 0.0, count(f1), out.main, "main");
    run_list(plan.aux, pop_aux, infinity, count(f2), out.aux, "aux");
    return out;
}

/// Opposite points of the auxiliary population through a tanh-scaled bound midpoint.
inline std::vector<Vector> opposition_offspring(const Population& pop_aux, const Bounds& bounds) {
    if (pop_aux.empty()) {
        throw std::invalid_argument("opposition_offspring: empty population");
    }
    const double tc = std::tanh(std::log(static_cast<double>(pop_aux.size())) * 0.8);
    std::vector<Vector> out;
    out.reserve(pop_aux.size());
    for (const auto& s : pop_aux) {
        Vector v(s.decisions.size());
        for (std::size_t d = 0; d < v.size(); ++d) {
            v[d] = (bounds.lower()[d] + bounds.upper()[d]) * tc - s.decisions[d];
        }
        out.push_back(clamp_to_bounds(std::move(v), bounds));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run state and the optimizer loop

enum class AuxPhase { stage1, exploration, subregion, exploitation };

inline std::string_view name(AuxPhase p) {
    switch (p) {
    case AuxPhase::stage1:
        return "stage1";
    case AuxPhase::exploration:
        return "exploration";
    case AuxPhase::subregion:
        return "subregion";
    default:
        return "exploitation";
    }
}

struct GenerationRecord {
    std::size_t generation = 0;
    std::size_t fe = 0;
    int stage = 1;
    double epsilon = 0.0;
    int type = 0;
    std::size_t cnt = 0;
    double f1 = 1.0;
    double f2 = 1.0;
    std::size_t aux_size = 0;
    double fr_main = 0.0;
    double fr_aux = 0.0;
    double rs = 1.0;
    std::size_t off3 = 0;
    int plan = 0;
    AuxPhase phase = AuxPhase::stage1;
    double igd = infinity;
    double hv = 0.0;
};

struct RunState {
    RunState(std::size_t budget, std::size_t gap, double guard, std::uint64_t seed)
        : counter(budget), history(gap, guard), rng(seed) {}

    Population pop_main;
    Population pop_aux;
    EvaluationCounter counter;
    std::size_t generation = 1;
    int flag = 0;
    std::optional<std::size_t> switch_fe;
    std::optional<EpsilonSchedule> schedule;
    double epsilon = 0.2;
    double rs = 1.0;
    TypeTracker tracker;
    std::optional<FrontRelation> type_at_switch;
    DraState dra;
    PointHistory history;
    Rng rng;
};

struct RunResult {
    std::vector<Solution> final_front;
    std::vector<GenerationRecord> log;
    double final_igd = infinity;
    double final_hv = 0.0;
    std::size_t evaluations = 0;
    std::optional<std::size_t> switch_fe;
    std::optional<FrontRelation> type_at_switch;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
};

/// Feasible members of `pop` that no other feasible member Pareto-dominates.
inline std::vector<Solution> feasible_nondominated(std::span<const Solution> pop) {
    std::vector<Solution> feasible;
    for (const auto& s : pop) {
        if (s.feasible()) {
            feasible.push_back(s);
        }
    }
    std::vector<Solution> out;
    for (std::size_t i = 0; i < feasible.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < feasible.size() && !dominated; ++j) {
            dominated = j != i && pareto_dominates(feasible[j].objectives, feasible[i].objectives);
        }
        if (!dominated) {
            out.push_back(feasible[i]);
        }
    }
    return out;
}

/// Dual-population two-stage optimizer. Construction initializes and evaluates both
/// populations; each call to step() advances one generation.
class Optimizer {
public:
    Optimizer(const Problem& problem, AlgorithmConfig config, std::uint64_t seed,
              std::optional<ReferenceFront> reference = std::nullopt)
        : problem_(problem), config_(std::move(config)),
          state_(config_.max_fe, config_.history_gap, config_.history_guard, seed) {
        config_.validate();
        if (reference) {
            metrics_ = MetricConfig::for_front(*reference, config_.hv_reference);
            reference_ = std::move(*reference);
        }
        state_.epsilon = config_.epsilon.eps0;
        state_.pop_main = random_population();
        state_.pop_aux = random_population();
        state_.history.push(state_.pop_aux);
        record(GenerationRecord{}, 0);
    }

    const RunState& state() const noexcept { return state_; }
    /// Mutable access for tests that force particular states.
    RunState& mutable_state() noexcept { return state_; }
    const AlgorithmConfig& config() const noexcept { return config_; }
    const Problem& problem() const noexcept { return problem_; }
    const std::vector<GenerationRecord>& log() const noexcept { return log_; }
    bool finished() const noexcept { return state_.counter.exhausted(); }

    /// Stage-transition check; on firing, records the switch point, classifies the
    /// relation once and builds the epsilon schedule.
    void try_switch() {
        if (state_.flag != 0) {
            throw std::logic_error("try_switch: already in stage 2");
        }
        state_.rs = rs_metric(state_.history).value_or(1.0);
        if (!should_switch(state_.rs, state_.generation, config_.relaxed_switch)) {
            return;
        }
        state_.flag = 1;
        state_.switch_fe = state_.counter.count();
        state_.tracker = TypeTracker{classify_relationship(state_.pop_main, state_.pop_aux, config_.classifier), 0};
        state_.type_at_switch = state_.tracker.type;
        if (config_.max_fe > *state_.switch_fe) {
            state_.schedule.emplace(static_cast<double>(*state_.switch_fe), static_cast<double>(config_.max_fe),
                                    config_.epsilon);
        }
    }

    void stage1_step() {
        const std::size_t n = config_.population;
        const auto& bounds = problem_.bounds;
        auto& rng = state_.rng;
        const auto pool1 = random_pool(state_.pop_main.members(), n, rng);
        const auto dec1 = ga_offspring(pool1, config_.operators, 1, bounds, rng);
        const auto pool2 = random_pool(state_.pop_aux.members(), n, rng);
        const auto dec2 = ga_offspring(pool2, config_.operators, 1, bounds, rng);
        const auto off1 = evaluate_batch(problem_, dec1, state_.counter);
        const auto off2 = evaluate_batch(problem_, dec2, state_.counter);

        std::vector<Solution> main_union(state_.pop_main.begin(), state_.pop_main.end());
        main_union.insert(main_union.end(), off1.begin(), off1.end());
        if (config_.stage1_share_aux_offspring) {
            main_union.insert(main_union.end(), off2.begin(), off2.end());
        }
        std::vector<Solution> aux_union(state_.pop_aux.begin(), state_.pop_aux.end());
        aux_union.insert(aux_union.end(), off2.begin(), off2.end());

        state_.pop_main = environmental_select(main_union, n, 0.0);
        state_.pop_aux = environmental_select(aux_union, n, infinity);
        state_.history.push(state_.pop_aux);
        ++state_.generation;

        GenerationRecord rec;
        rec.stage = 1;
        record(rec, 0);
    }

    /// Epsilon in force for the next stage-2 generation.
    double current_epsilon() const {
        if (!state_.schedule) {
            return 0.0;
        }
        const double fe = static_cast<double>(state_.counter.count());
        return config_.final_epsilon ? state_.schedule->final(fe, state_.tracker.type) : state_.schedule->initial(fe);
    }

    FrontRelation effective_type() const {
        if (config_.forced_plan) {
            return *config_.forced_plan;
        }
        return state_.tracker.cnt > 3 ? FrontRelation::unclear : state_.tracker.type;
    }

    void stage2_step() {
        if (state_.flag != 1) {
            throw std::logic_error("stage2_step: stage 1 still active");
        }
        const std::size_t n = config_.population;
        const auto& bounds = problem_.bounds;
        const double fr_main = state_.pop_main.feasible_ratio();
        const double fr_aux = state_.pop_aux.feasible_ratio();
        const std::size_t ns = config_.fixed_aux_size > 0 ? config_.fixed_aux_size
                               : n >= 25                  ? aux_size(fr_aux, n)
                                                          : n;
        const double eps = current_epsilon();
        state_.epsilon = eps;

        std::vector<Vector> dec3;
        if (config_.opposition && (fr_main == 1.0 || fr_main == 0.0) && fr_aux == 0.0 && eps > 0.0005) {
            dec3 = opposition_offspring(state_.pop_aux, bounds);
        }

        const FrontRelation plan_type = effective_type();
        if (config_.dra) {
            state_.dra =
                dra_allocate(state_.dra, state_.tracker.type, config_.dra_progress, fr_main, fr_aux, state_.tracker.cnt);
        } else {
            const auto plan = hops_plan(plan_type);
            state_.dra = no_dra_factors(plan.main.size(), plan.aux.size());
        }
        auto hops = hops_generate(state_.pop_main, state_.pop_aux, plan_type, state_.dra.f1, state_.dra.f2, n,
                                  config_.operators, bounds, state_.rng);

        std::vector<Solution> offspring = evaluate_batch(problem_, hops.main, state_.counter);
        for (const auto* batch : {&hops.aux, &dec3}) {
            auto evaluated = evaluate_batch(problem_, *batch, state_.counter);
            offspring.insert(offspring.end(), std::make_move_iterator(evaluated.begin()),
                             std::make_move_iterator(evaluated.end()));
        }

        std::vector<Solution> main_union(state_.pop_main.begin(), state_.pop_main.end());
        main_union.insert(main_union.end(), offspring.begin(), offspring.end());
        std::vector<Solution> aux_union(state_.pop_aux.begin(), state_.pop_aux.end());
        aux_union.insert(aux_union.end(), offspring.begin(), offspring.end());
        state_.pop_main = environmental_select(main_union, n, 0.0);

        const auto type = state_.tracker.type;
        AuxPhase phase;
        if (!config_.three_phase) {
            phase = AuxPhase::subregion;
        } else if (eps >= 0.195) {
            phase = AuxPhase::exploration;
        } else if (eps <= 0.005 || type == FrontRelation::overlap || type == FrontRelation::partial) {
            phase = AuxPhase::exploitation;
        } else {
            phase = AuxPhase::subregion;
        }
        switch (phase) {
        case AuxPhase::exploration: {
            state_.pop_aux = environmental_select(aux_union, ns, infinity);
            const auto ntype = classify_relationship(state_.pop_main, state_.pop_aux, config_.classifier);
            state_.tracker = track_type(state_.tracker, ntype, config_.reset_cnt_on_update);
            break;
        }
        case AuxPhase::exploitation:
            state_.pop_aux = environmental_select(aux_union, ns, type == FrontRelation::overlap ? 0.0 : eps);
            break;
        default:
            state_.pop_aux = angle_subregion_select(state_.pop_aux.members(), offspring, ns, eps);
            break;
        }
        ++state_.generation;

        GenerationRecord rec;
        rec.stage = 2;
        rec.phase = phase;
        rec.plan = to_int(plan_type);
        rec.fr_main = fr_main;
        rec.fr_aux = fr_aux;
        record(rec, dec3.size());
    }

    /// One generation of the two-stage loop. Returns false once the budget is spent.
    bool step() {
        if (finished()) {
            return false;
        }
        if (state_.flag == 0) {
            try_switch();
            stage1_step();
        } else {
            stage2_step();
        }
        return true;
    }

    RunResult result() const {
        RunResult r;
        r.final_front = feasible_nondominated(state_.pop_main.members());
        r.log = log_;
        r.final_igd = log_.back().igd;
        r.final_hv = log_.back().hv;
        r.evaluations = state_.counter.count();
        r.switch_fe = state_.switch_fe;
        r.type_at_switch = state_.type_at_switch;
        r.seed = state_.rng.seed();
        return r;
    }

private:
    Population random_population() {
        const auto& b = problem_.bounds;
        std::vector<Vector> decs(config_.population, Vector(b.size()));
        for (auto& x : decs) {
            for (std::size_t d = 0; d < x.size(); ++d) {
                x[d] = state_.rng.uniform(b.lower()[d], b.upper()[d]);
            }
        }
        return Population(evaluate_batch(problem_, decs, state_.counter));
    }

    void record(GenerationRecord rec, std::size_t off3) {
        rec.generation = log_.size();
        rec.fe = state_.counter.count();
        rec.epsilon = state_.epsilon;
        if (rec.stage == 1) {
            rec.fr_main = state_.pop_main.feasible_ratio();
            rec.fr_aux = state_.pop_aux.feasible_ratio();
        }
        rec.type = state_.flag == 0 ? 0 : to_int(state_.tracker.type);
        rec.cnt = state_.tracker.cnt;
        rec.f1 = state_.dra.f1;
        rec.f2 = state_.dra.f2;
        rec.aux_size = state_.pop_aux.size();
        rec.rs = state_.rs;
        rec.off3 = off3;
        if (metrics_) {
            const auto front = feasible_nondominated(state_.pop_main.members());
            std::vector<Vector> objs;
            objs.reserve(front.size());
            for (const auto& s : front) {
                objs.push_back(s.objectives);
            }
            rec.igd = igd(objs, reference_.points);
            rec.hv = metrics_->normalized_hypervolume(objs);
        } else {
            rec.igd = std::numeric_limits<double>::quiet_NaN();
            rec.hv = std::numeric_limits<double>::quiet_NaN();
        }
        log_.push_back(rec);
    }

    const Problem& problem_;
    AlgorithmConfig config_;
    RunState state_;
    std::optional<MetricConfig> metrics_;
    ReferenceFront reference_;
    std::vector<GenerationRecord> log_;
};

/// Full run: initialize, stage 1 until the switch fires, stage 2 until the budget is spent.
inline RunResult run(const Problem& problem, const AlgorithmConfig& config, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    Optimizer opt(problem, config, seed, reference_front(problem, config.reference_points));
    while (opt.step()) {
    }
    RunResult r = opt.result();
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace cmo

#endif

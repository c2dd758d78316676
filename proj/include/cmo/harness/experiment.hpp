#ifndef CMO_HARNESS_EXPERIMENT_HPP
#define CMO_HARNESS_EXPERIMENT_HPP

#include "cmo/engine.hpp"
#include "cmo/harness/config.hpp"
#include "cmo/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace cmo::harness {

namespace fs = std::filesystem;

inline constexpr std::string_view tool_version = "1.0.0";

struct Cell {
    ProblemSpec problem;
    std::string variant;
    std::uint64_t seed = 0;

    std::string stem() const { return problem.id + "__" + variant + "__s" + std::to_string(seed); }
};

struct CellOutcome {
    Cell cell;
    std::optional<RunResult> result;
    std::string error;
};

struct ExperimentReport {
    std::vector<CellOutcome> cells;
    std::size_t failures = 0;
    fs::path output;

    int exit_code() const { return failures == 0 ? 0 : 2; }
};

/// Problem-major, then variant, then seed.
inline std::vector<Cell> grid(const ExperimentConfig& cfg) {
    std::vector<Cell> cells;
    for (const auto& p : cfg.problems) {
        for (const auto& v : cfg.variants) {
            for (auto s : cfg.seeds) {
                cells.push_back({p, v, s});
            }
        }
    }
    return cells;
}

inline nlohmann::json to_json(const GenerationRecord& r) {
    const auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"generation", r.generation},
            {"fe", r.fe},
            {"stage", r.stage},
            {"epsilon", finite_or_null(r.epsilon)},
            {"type", r.type},
            {"plan", r.plan},
            {"phase", std::string(name(r.phase))},
            {"cnt", r.cnt},
            {"f1", r.f1},
            {"f2", r.f2},
            {"aux_size", r.aux_size},
            {"fr_main", r.fr_main},
            {"fr_aux", r.fr_aux},
            {"rs", r.rs},
            {"off3", r.off3},
            {"igd", finite_or_null(r.igd)},
            {"hv", r.hv}};
}

inline std::string summary_header() {
    return "problem,variant,seed,final_hv,final_igd,evaluations,switch_fe,type_at_switch,front_size\n";
}

inline std::string summary_row(const Cell& c, const RunResult& r) {
    std::ostringstream os;
    os << c.problem.id << ',' << c.variant << ',' << c.seed << ',' << format_double(r.final_hv) << ','
       << format_double(r.final_igd) << ',' << r.evaluations << ','
       << (r.switch_fe ? std::to_string(*r.switch_fe) : std::string("none")) << ','
       << (r.type_at_switch ? to_int(*r.type_at_switch) : 0) << ',' << r.final_front.size() << '\n';
    return os.str();
}

namespace detail {

inline void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out << content;
}

inline std::string front_csv(const RunResult& r, std::size_t dim, std::size_t m) {
    std::ostringstream os;
    for (std::size_t d = 0; d < dim; ++d) {
        os << 'x' << d + 1 << ',';
    }
    for (std::size_t i = 0; i < m; ++i) {
        os << 'f' << i + 1 << ',';
    }
    os << "cv\n";
    for (const auto& s : r.final_front) {
        for (double x : s.decisions) {
            os << format_double(x) << ',';
        }
        for (double f : s.objectives) {
            os << format_double(f) << ',';
        }
        os << format_double(s.cv) << '\n';
    }
    return os.str();
}

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace detail

/// Runs the (problem x variant x seed) grid on a worker pool and writes, under the
/// output directory: logs/<cell>.jsonl, fronts/<cell>.csv, summary.csv, timing.csv,
/// failures.csv (when any cell failed) and metadata.json. Only metadata.json and
/// timing.csv depend on the clock.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr) {
    cfg.validate();
    const auto cells = grid(cfg);
    std::vector<CellOutcome> outcomes(cells.size());
    std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, cells.size());

    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    const auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            CellOutcome& out = outcomes[i];
            out.cell = cells[i];
            try {
                const Problem problem = make_problem(cells[i].problem.id, cells[i].problem.dimension);
                const auto config = apply_ablation(cfg.algorithm_for(cells[i].problem), cells[i].variant);
                out.result = run(problem, config, cells[i].seed);
            } catch (const std::exception& e) {
                out.error = e.what();
            }
            if (progress) {
                std::lock_guard lock(progress_mutex);
                *progress << cells[i].stem() << (out.result ? " ok" : " FAILED: " + out.error) << '\n';
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < workers; ++t) {
        pool.emplace_back(work);
    }
    work();
    for (auto& t : pool) {
        t.join();
    }

    // Single collector: everything is written in grid order after the pool drains.
    ExperimentReport report;
    report.output = cfg.output;
    fs::create_directories(report.output / "logs");
    fs::create_directories(report.output / "fronts");
    std::string summary = summary_header();
    std::string timing = "problem,variant,seed,wall_seconds\n";
    std::string failures = "problem,variant,seed,error\n";
    for (auto& o : outcomes) {
        if (!o.result) {
            ++report.failures;
            failures += o.cell.problem.id + ',' + o.cell.variant + ',' + std::to_string(o.cell.seed) + ",\"" +
                        o.error + "\"\n";
            continue;
        }
        const auto& r = *o.result;
        summary += summary_row(o.cell, r);
        timing += o.cell.problem.id + ',' + o.cell.variant + ',' + std::to_string(o.cell.seed) + ',' +
                  format_double(r.wall_seconds) + '\n';
        std::string log;
        for (const auto& rec : r.log) {
            log += to_json(rec).dump() + '\n';
        }
        detail::write_file(report.output / "logs" / (o.cell.stem() + ".jsonl"), log);
        const std::size_t m = r.final_front.empty() ? 2 : r.final_front.front().objectives.size();
        detail::write_file(report.output / "fronts" / (o.cell.stem() + ".csv"),
                           detail::front_csv(r, o.cell.problem.dimension, m));
    }
    detail::write_file(report.output / "summary.csv", summary);
    detail::write_file(report.output / "timing.csv", timing);
    if (report.failures > 0) {
        detail::write_file(report.output / "failures.csv", failures);
    } else {
        fs::remove(report.output / "failures.csv");
    }
    const nlohmann::json meta = {{"tool", "cmo"},
                                 {"tool_version", std::string(tool_version)},
                                 {"generator", std::string(Rng::generator_name)},
                                 {"fingerprint", hex64(cfg.fingerprint())},
                                 {"config", cfg.echo()},
                                 {"cells", cells.size()},
                                 {"failures", report.failures},
                                 {"created_utc", detail::utc_timestamp()}};
    detail::write_file(report.output / "metadata.json", meta.dump(2) + '\n');
    report.cells = std::move(outcomes);
    return report;
}

/// Built-in grid: the three synthetic problems, full algorithm, seeds 1..10.
inline ExperimentConfig bench_config() {
    ExperimentConfig cfg;
    for (auto id : problem_ids) {
        cfg.problems.push_back({std::string(id), default_dimension, 50000});
    }
    cfg.seeds = seed_range(1, 10);
    cfg.output = "bench-results";
    return cfg;
}

// ---------------------------------------------------------------------------
// Summary parsing

struct SummaryRow {
    std::string problem;
    std::string variant;
    std::uint64_t seed = 0;
    double hv = 0.0;
    double igd = 0.0;
};

inline double parse_double(const std::string& s) {
    if (s == "inf") {
        return infinity;
    }
    if (s == "-inf") {
        return -infinity;
    }
    if (s == "nan") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    double d = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), d);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("not a number: '" + s + "'");
    }
    return d;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    return out;
}

inline std::vector<SummaryRow> read_summary(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::string line;
    std::getline(in, line);
    const auto header = split_csv_line(line);
    const auto column = [&](std::string_view name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw std::runtime_error(path.string() + ": missing column '" + std::string(name) + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto cp = column("problem"), cv = column("variant"), cs = column("seed"), ch = column("final_hv"),
               ci = column("final_igd");
    std::vector<SummaryRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": wrong field count");
        }
        rows.push_back({f[cp], f[cv], std::stoull(f[cs]), parse_double(f[ch]), parse_double(f[ci])});
    }
    return rows;
}

inline double median(std::vector<double> v) {
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// Plot data

struct PlotReport {
    std::vector<fs::path> files;
    std::vector<std::string> warnings;
};

/// Writes plot/<problem>__<variant>__igd.csv (per-generation medians across seeds) and
/// plot/<problem>__<variant>__front.csv (final fronts of every seed) under `dir`.
inline PlotReport emit_plot_data(const fs::path& dir) {
    PlotReport rep;
    const auto summary_path = dir / "summary.csv";
    if (!fs::exists(summary_path)) {
        rep.warnings.push_back("no summary.csv in '" + dir.string() + "'; nothing emitted");
        return rep;
    }
    std::map<std::pair<std::string, std::string>, std::vector<std::uint64_t>> groups;
    for (const auto& row : read_summary(summary_path)) {
        groups[{row.problem, row.variant}].push_back(row.seed);
    }
    if (groups.empty()) {
        rep.warnings.push_back("summary.csv has no rows; nothing emitted");
        return rep;
    }
    fs::create_directories(dir / "plot");
    for (const auto& [key, seeds] : groups) {
        const auto& [problem, variant] = key;
        std::vector<std::vector<double>> igd_by_gen;
        std::vector<std::vector<double>> fe_by_gen;
        std::string scatter = "seed,f1,f2\n";
        for (auto seed : seeds) {
            const std::string stem = problem + "__" + variant + "__s" + std::to_string(seed);
            std::ifstream log(dir / "logs" / (stem + ".jsonl"));
            if (!log) {
                rep.warnings.push_back("missing log for " + stem);
            } else {
                std::string line;
                for (std::size_t g = 0; std::getline(log, line); ++g) {
                    const auto rec = nlohmann::json::parse(line);
                    if (igd_by_gen.size() <= g) {
                        igd_by_gen.resize(g + 1);
                        fe_by_gen.resize(g + 1);
                    }
                    igd_by_gen[g].push_back(rec["igd"].is_null() ? infinity : rec["igd"].get<double>());
                    fe_by_gen[g].push_back(rec["fe"].get<double>());
                }
            }
            std::ifstream front(dir / "fronts" / (stem + ".csv"));
            if (!front) {
                rep.warnings.push_back("missing front for " + stem);
                continue;
            }
            std::string line;
            std::getline(front, line);
            const auto header = split_csv_line(line);
            const auto f1 = static_cast<std::size_t>(std::find(header.begin(), header.end(), "f1") - header.begin());
            while (std::getline(front, line)) {
                const auto f = split_csv_line(line);
                scatter += std::to_string(seed) + ',' + f.at(f1) + ',' + f.at(f1 + 1) + '\n';
            }
        }
        const std::string base = problem + "__" + variant;
        if (!igd_by_gen.empty()) {
            std::string series = "generation,fe_median,igd_median,runs\n";
            for (std::size_t g = 0; g < igd_by_gen.size(); ++g) {
                series += std::to_string(g) + ',' + format_double(median(fe_by_gen[g])) + ',' +
                          format_double(median(igd_by_gen[g])) + ',' + std::to_string(igd_by_gen[g].size()) + '\n';
            }
            const auto path = dir / "plot" / (base + "__igd.csv");
            detail::write_file(path, series);
            rep.files.push_back(path);
        }
        const auto path = dir / "plot" / (base + "__front.csv");
        detail::write_file(path, scatter);
        rep.files.push_back(path);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Statistical comparison table

struct ComparisonRow {
    std::string problem;
    std::string variant;
    double mean_igd = 0.0;
    double median_igd = 0.0;
    stats::TestReport igd_test;
    stats::TestReport hv_test;
};

struct ComparisonReport {
    std::string baseline;
    std::vector<ComparisonRow> rows;
    /// Per variant: multi-problem signed-rank on mean IGD (positive favours the baseline).
    std::map<std::string, std::optional<stats::SignedRankReport>> overall;
    std::map<std::string, std::string> notes;
};

/// Compares every variant against `baseline` per problem with rank-sum tests on IGD
/// and HV. Verdicts are from the variant's point of view.
inline ComparisonReport compare_variants(const std::vector<SummaryRow>& rows, const std::string& baseline = "full",
                                         double alpha = 0.05) {
    std::map<std::string, std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>> data;
    std::vector<std::string> problem_order, variant_order;
    for (const auto& r : rows) {
        if (std::find(problem_order.begin(), problem_order.end(), r.problem) == problem_order.end()) {
            problem_order.push_back(r.problem);
        }
        if (std::find(variant_order.begin(), variant_order.end(), r.variant) == variant_order.end()) {
            variant_order.push_back(r.variant);
        }
        data[r.problem][r.variant].first.push_back(r.igd);
        data[r.problem][r.variant].second.push_back(r.hv);
    }
    ComparisonReport rep;
    rep.baseline = baseline;
    if (std::find(variant_order.begin(), variant_order.end(), baseline) == variant_order.end()) {
        throw std::runtime_error("baseline variant '" + baseline + "' not present in summary");
    }
    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) {
            s += x;
        }
        return s / static_cast<double>(v.size());
    };
    for (const auto& variant : variant_order) {
        if (variant == baseline) {
            continue;
        }
        std::vector<double> deltas;
        for (const auto& problem : problem_order) {
            const auto& cells = data[problem];
            const auto b = cells.find(baseline);
            const auto v = cells.find(variant);
            if (b == cells.end() || v == cells.end()) {
                continue;
            }
            ComparisonRow row;
            row.problem = problem;
            row.variant = variant;
            row.mean_igd = mean(v->second.first);
            row.median_igd = median(v->second.first);
            row.igd_test = stats::ranksum_test(v->second.first, b->second.first, alpha, stats::Sense::minimize);
            row.hv_test = stats::ranksum_test(v->second.second, b->second.second, alpha, stats::Sense::maximize);
            deltas.push_back(row.mean_igd - mean(b->second.first));
            rep.rows.push_back(row);
        }
        try {
            rep.overall[variant] = stats::signed_rank_multiproblem(deltas, alpha);
        } catch (const std::invalid_argument& e) {
            rep.overall[variant] = std::nullopt;
            rep.notes[variant] = e.what();
        }
    }
    return rep;
}

inline void print_comparison(const ComparisonReport& rep, std::ostream& os) {
    os << "baseline: " << rep.baseline << '\n';
    os << "problem,variant,mean_igd,median_igd,igd_p,igd_verdict,hv_p,hv_verdict\n";
    for (const auto& r : rep.rows) {
        os << r.problem << ',' << r.variant << ',' << format_double(r.mean_igd) << ',' << format_double(r.median_igd)
           << ',' << format_double(r.igd_test.p_value) << ',' << stats::symbol(r.igd_test.verdict) << ','
           << format_double(r.hv_test.p_value) << ',' << stats::symbol(r.hv_test.verdict) << '\n';
    }
    for (const auto& [variant, sr] : rep.overall) {
        std::map<std::string, int> tally{{"+", 0}, {"-", 0}, {"=", 0}};
        for (const auto& r : rep.rows) {
            if (r.variant == variant) {
                ++tally[std::string(stats::symbol(r.igd_test.verdict))];
            }
        }
        os << variant << " +/-/= " << tally["+"] << '/' << tally["-"] << '/' << tally["="];
        if (sr) {
            os << "  R+=" << format_double(sr->r_plus) << " R-=" << format_double(sr->r_minus)
               << " p=" << format_double(sr->p_value);
        } else {
            os << "  signed-rank n/a (" << rep.notes.at(variant) << ')';
        }
        os << '\n';
    }
}

} // namespace cmo::harness

#endif

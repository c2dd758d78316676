#include "cmo/harness/config.hpp"
#include "cmo/harness/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

int finish(const cmo::harness::ExperimentReport& rep) {
    std::cout << "wrote " << rep.output.string() << " (" << rep.cells.size() - rep.failures << " runs";
    if (rep.failures) {
        std::cout << ", " << rep.failures << " failed, see failures.csv";
    }
    std::cout << ")\n";
    return rep.exit_code();
}

} // namespace

int main(int argc, char** argv) {
    using namespace cmo::harness;
    CLI::App app{"Constrained multi-objective evolutionary engine"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::size_t threads = 0;
    std::size_t seeds = 10;
    std::size_t max_fe = 50000;
    std::vector<std::string> variants;
    std::vector<std::string> problems;
    std::string summary_path;
    std::string baseline = "full";
    std::string results_dir;
    bool quiet = false;

    auto* run_cmd = app.add_subcommand("run", "Run the grid described by a config file");
    run_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("-o,--out", out, "Output directory (overrides the config)");
    run_cmd->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");
    run_cmd->add_flag("-q,--quiet", quiet, "No per-run progress");

    auto* bench_cmd = app.add_subcommand("bench", "Run the built-in grid (all problems, full algorithm)");
    bench_cmd->add_option("-o,--out", out, "Output directory")->default_val("bench-results");
    bench_cmd->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");
    bench_cmd->add_option("-s,--seeds", seeds, "Seeds 1..n")->default_val(10)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--max-fe", max_fe, "Evaluation budget per run")->default_val(50000);
    bench_cmd->add_flag("-q,--quiet", quiet, "No per-run progress");

    auto* ablate_cmd = app.add_subcommand("ablate", "Run the full algorithm against ablation variants");
    ablate_cmd->add_option("variants", variants, "Variants, e.g. WoOP Wo3P HOps-T3")->required();
    ablate_cmd->add_option("-p,--problem", problems, "Problems (default: all)");
    ablate_cmd->add_option("-o,--out", out, "Output directory")->default_val("ablation-results");
    ablate_cmd->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");
    ablate_cmd->add_option("-s,--seeds", seeds, "Seeds 1..n")->default_val(10)->check(CLI::PositiveNumber);
    ablate_cmd->add_option("--max-fe", max_fe, "Evaluation budget per run")->default_val(50000);
    ablate_cmd->add_flag("-q,--quiet", quiet, "No per-run progress");

    auto* stats_cmd = app.add_subcommand("stats", "Rank-sum and signed-rank comparison from a summary");
    stats_cmd->add_option("summary", summary_path, "summary.csv")->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("-b,--baseline", baseline, "Baseline variant")->default_val("full");

    auto* plot_cmd = app.add_subcommand("plotdata", "Emit median IGD series and front scatter files");
    plot_cmd->add_option("dir", results_dir, "Results directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        std::ostream* progress = quiet ? nullptr : &std::cerr;
        if (*run_cmd) {
            auto cfg = load_config(config_path);
            if (!out.empty()) {
                cfg.output = out;
            }
            if (threads) {
                cfg.threads = threads;
            }
            std::cout << cfg.echo() << '\n';
            return finish(run_experiment(cfg, progress));
        }
        if (*bench_cmd || *ablate_cmd) {
            auto cfg = bench_config();
            cfg.output = out;
            cfg.threads = threads;
            cfg.seeds = seed_range(1, seeds);
            for (auto& p : cfg.problems) {
                p.max_fe = max_fe;
            }
            cfg.algorithm.max_fe = max_fe;
            if (*ablate_cmd) {
                for (const auto& v : variants) {
                    if (!cmo::is_variant(v)) {
                        std::cerr << "unknown variant '" << v << "'\n";
                        return 1;
                    }
                }
                cfg.variants = {"full"};
                for (const auto& v : variants) {
                    if (v != "full") {
                        cfg.variants.push_back(v);
                    }
                }
                if (!problems.empty()) {
                    std::vector<ProblemSpec> chosen;
                    for (const auto& id : problems) {
                        chosen.push_back({id, cmo::default_dimension, max_fe});
                    }
                    cfg.problems = chosen;
                }
            }
            return finish(run_experiment(cfg, progress));
        }
        if (*stats_cmd) {
            print_comparison(compare_variants(read_summary(summary_path), baseline), std::cout);
            return 0;
        }
        if (*plot_cmd) {
            const auto rep = emit_plot_data(results_dir);
            for (const auto& w : rep.warnings) {
                std::cerr << "warning: " << w << '\n';
            }
            for (const auto& f : rep.files) {
                std::cout << f.string() << '\n';
            }
            return rep.warnings.empty() ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

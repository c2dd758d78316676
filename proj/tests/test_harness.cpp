#include "cmo/harness/config.hpp"
#include "cmo/harness/experiment.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cmo::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) {
        ++n;
    }
    return n;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("cmo-harness-" + name);
    fs::remove_all(dir);
    return dir;
}

std::string parse_message(std::string_view text) {
    try {
        parse_config(text);
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("config defaults", "[harness]") {
    const auto cfg = parse_config("problem = \"P1-overlap\"\n");
    REQUIRE(cfg.problems.size() == 1);
    CHECK(cfg.problems[0].dimension == 10);
    CHECK(cfg.problems[0].max_fe == 50000);
    CHECK(cfg.algorithm.population == 100);
    CHECK(cfg.seeds.size() == 30);
    CHECK(cfg.seeds.front() == 1);
    CHECK(cfg.seeds.back() == 30);
    CHECK(cfg.variants == std::vector<std::string>{"full"});
    CHECK(cfg.output == "results");
}

TEST_CASE("config values and tables", "[harness]") {
    const auto cfg = parse_config(R"(# grid
problem = ["P1-overlap", "P3-separated"]
variants = ["full", "Wo3P"]
seeds = [4, 5,
         6]   # trailing comment
N = 50
maxFE = 8000
eps0 = 0.3
cnt_reset = true
f_set = [0.5, 1.0]
output = "out dir"

[problem.P3-separated]
maxFE = 9000
dimension = 6
)");
    CHECK(cfg.problems[0].max_fe == 8000);
    CHECK(cfg.problems[1].max_fe == 9000);
    CHECK(cfg.problems[1].dimension == 6);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{4, 5, 6});
    CHECK(cfg.algorithm.population == 50);
    CHECK(cfg.algorithm.epsilon.eps0 == 0.3);
    CHECK(cfg.algorithm.reset_cnt_on_update);
    CHECK(cfg.algorithm.operators.f_set == std::vector<double>{0.5, 1.0});
    CHECK(cfg.output == "out dir");
    CHECK(grid(cfg).size() == 12);
    CHECK(grid(cfg)[0].stem() == "P1-overlap__full__s4");

    // echo round-trips to the same config
    const auto again = parse_config(cfg.echo());
    CHECK(again.echo() == cfg.echo());
    CHECK(again.fingerprint() == cfg.fingerprint());
}

TEST_CASE("config errors", "[harness]") {
    CHECK(parse_message("problem = \"P1-overlap\"\nseeds = [1, 2, 2]\n").find("distinct") != std::string::npos);
    const auto typo = parse_message("problem = \"P1-overlap\"\nepslion0 = 0.1\n");
    CHECK(typo.find("line 2, column 1") != std::string::npos);
    CHECK(typo.find("did you mean 'eps0'?") != std::string::npos);
    CHECK(parse_message("problem = \"P1-overlap\"\nN = [1,\n").find("line 3") != std::string::npos);
    CHECK(parse_message("problem = \"P1-overlap\"\nN = 12x\n").find("line 2, column 5") != std::string::npos);
    CHECK(parse_message("problem = \"P1-overlap\"\nN = 5\nN = 6\n").find("line 3") != std::string::npos);
    CHECK(parse_message("N = 5\n").find("problem") != std::string::npos);
    CHECK(parse_message("problem = \"P9\"\n").find("unknown problem") != std::string::npos);
    CHECK(parse_message("problem = \"P1-overlap\"\nvariants = [\"Wo4P\"]\n").find("unknown variant") !=
          std::string::npos);
    CHECK(parse_message("problem = \"P1-overlap\"\n[problem.P2-partial]\nmaxFE = 1000\n").find("line 2") !=
          std::string::npos);
    CHECK(parse_message("problem = \"P1-overlap\"\nmaxFE = 100\n").find("maxFE") != std::string::npos);
    CHECK(parse_message("problem = \"P1-overlap\"\nname = \"unterminated\n").find("line 2") != std::string::npos);
}

TEST_CASE("experiment outputs", "[harness]") {
    auto cfg = parse_config("problem = \"P1-overlap\"\nseeds = [1, 2, 3]\nmaxFE = 3000\nreference_points = 100\n");
    cfg.output = scratch("grid").string();
    cfg.threads = 2;
    const auto rep = run_experiment(cfg);
    CHECK(rep.failures == 0);
    CHECK(rep.exit_code() == 0);
    const fs::path out = cfg.output;
    std::size_t logs = 0;
    for (const auto& e : fs::directory_iterator(out / "logs")) {
        logs += e.path().extension() == ".jsonl";
    }
    CHECK(logs == 3);
    CHECK(line_count(out / "summary.csv") == 4);
    CHECK(slurp(out / "summary.csv").rfind(summary_header(), 0) == 0);
    CHECK(fs::exists(out / "metadata.json"));
    CHECK(fs::exists(out / "fronts" / "P1-overlap__full__s2.csv"));
    CHECK_FALSE(fs::exists(out / "failures.csv"));

    const auto meta = nlohmann::json::parse(slurp(out / "metadata.json"));
    CHECK(meta["fingerprint"] == hex64(cfg.fingerprint()));
    CHECK(meta["cells"] == 3);

    const auto first_summary = slurp(out / "summary.csv");
    const auto first_log = slurp(out / "logs" / "P1-overlap__full__s3.jsonl");
    cfg.threads = 1;
    run_experiment(cfg);
    CHECK(slurp(out / "summary.csv") == first_summary);
    CHECK(slurp(out / "logs" / "P1-overlap__full__s3.jsonl") == first_log);

    const auto rows = read_summary(out / "summary.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].seed == 2);

    const auto plot = emit_plot_data(out);
    CHECK(plot.warnings.empty());
    REQUIRE(plot.files.size() == 2);
    const auto series = out / "plot" / "P1-overlap__full__igd.csv";
    REQUIRE(fs::exists(series));
    std::size_t generations = 0;
    for (auto seed : {1, 2, 3}) {
        generations = std::max(generations,
                               line_count(out / "logs" / ("P1-overlap__full__s" + std::to_string(seed) + ".jsonl")));
    }
    CHECK(line_count(series) == generations + 1);

    // the median column at generation 0 is the median of the three initial IGDs
    std::vector<double> initial;
    for (auto seed : {1, 2, 3}) {
        std::ifstream log(out / "logs" / ("P1-overlap__full__s" + std::to_string(seed) + ".jsonl"));
        std::string line;
        std::getline(log, line);
        const auto igd = nlohmann::json::parse(line)["igd"];
        initial.push_back(igd.is_null() ? cmo::infinity : igd.get<double>()); // no feasible member yet
    }
    std::sort(initial.begin(), initial.end());
    std::ifstream s(series);
    std::string header, row0;
    std::getline(s, header);
    std::getline(s, row0);
    const auto fields = split_csv_line(row0);
    CHECK(fields.at(0) == "0");
    CHECK(fields.at(1) == "200");
    CHECK(parse_double(fields.at(2)) == initial[1]);
    CHECK(fields.at(3) == "3");
    fs::remove_all(out);
}

TEST_CASE("failed cells are reported", "[harness]") {
    ExperimentConfig cfg;
    cfg.problems = {{"P2-partial", 10, 1000}};
    cfg.seeds = {1};
    cfg.algorithm.reference_points = 1; // the reference front needs two points
    cfg.output = scratch("fail").string();
    cfg.threads = 1;
    const auto rep = run_experiment(cfg);
    CHECK(rep.failures == 1);
    CHECK(rep.exit_code() == 2);
    CHECK(fs::exists(fs::path(cfg.output) / "failures.csv"));
    CHECK(line_count(fs::path(cfg.output) / "summary.csv") == 1);
    fs::remove_all(cfg.output);
}

TEST_CASE("plot data from an empty directory", "[harness]") {
    const auto dir = scratch("empty");
    fs::create_directories(dir);
    const auto rep = emit_plot_data(dir);
    CHECK(rep.files.empty());
    REQUIRE(rep.warnings.size() == 1);
    CHECK(rep.warnings[0].find("summary.csv") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("variant comparison", "[harness]") {
    std::vector<SummaryRow> rows;
    for (const char* p : {"A", "B"}) {
        for (std::uint64_t s = 1; s <= 6; ++s) {
            rows.push_back({p, "full", s, 0.8 + 0.001 * s, 0.01 + 0.0001 * s});
            rows.push_back({p, "WoOP", s, 0.7 + 0.001 * s, 0.02 + 0.0001 * s});
        }
    }
    const auto rep = compare_variants(rows);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].igd_test.verdict == cmo::stats::Verdict::worse);
    CHECK(rep.rows[0].hv_test.verdict == cmo::stats::Verdict::worse);
    CHECK_FALSE(rep.overall.at("WoOP").has_value());
    CHECK(rep.notes.count("WoOP") == 1);
    std::ostringstream os;
    print_comparison(rep, os);
    CHECK(os.str().find("WoOP +/-/= 0/2/0") != std::string::npos);
    CHECK_THROWS(compare_variants(rows, "Wo3P"));
}

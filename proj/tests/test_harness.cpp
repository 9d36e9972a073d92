#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "randpol/errors.hpp"
#include "randpol/harness/config.hpp"
#include "randpol/harness/csv.hpp"
#include "randpol/harness/experiment.hpp"
#include "randpol/harness/svg.hpp"

using namespace randpol;
using namespace randpol::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("randpol_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

ExperimentConfig tiny_experiment(const fs::path& out) {
    ExperimentConfig cfg = parse_config(R"(
env = synthetic_1d
n_q = 40
n_pi = 30
m = 2
j_q = 10
j_pi = 6
k = 2
heldout = 30
eval_grid = 6
eval_episodes = 10
gap_grid = 11
seeds = 3,1,2
)");
    cfg.out_dir = out;
    return cfg;
}

ConfigError::Kind error_kind(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.kind();
    }
    FAIL("expected a configuration error");
    return ConfigError::Kind::parse;
}

}  // namespace

TEST_CASE("gamma out of range names the field") {
    try {
        parse_config("env = synthetic_1d\ngamma = 1.2\n");
        FAIL("expected a validation error");
    } catch (const ConfigError& e) {
        CHECK(e.kind() == ConfigError::Kind::validation);
        CHECK(e.field() == "gamma");
        CHECK(std::string(e.what()).find("gamma") != std::string::npos);
    }
}

TEST_CASE("configuration errors are distinguished") {
    CHECK(error_kind("env = synthetic_1d\nbogus = 3\n") == ConfigError::Kind::parse);
    CHECK(error_kind("n_q = 10\nn_q = 11\n") == ConfigError::Kind::parse);
    CHECK(error_kind("n_q\n") == ConfigError::Kind::parse);
    CHECK(error_kind("n_q = ten\n") == ConfigError::Kind::parse);
    CHECK(error_kind("n_q = 0\n") == ConfigError::Kind::validation);
    CHECK(error_kind("env = pendulum\n") == ConfigError::Kind::validation);
    try {
        load_config("/nonexistent/randpol.cfg");
        FAIL("expected a missing-file error");
    } catch (const ConfigError& e) {
        CHECK(e.kind() == ConfigError::Kind::missing_file);
    }
}

TEST_CASE("minimal configuration takes the documented defaults") {
    const ExperimentConfig cfg = parse_config("env = synthetic_1d  # only key\n");
    CHECK(cfg.env.name == "synthetic_1d");
    CHECK_FALSE(cfg.env.gamma.has_value());
    CHECK(cfg.randpol.n_q == 100);
    CHECK(cfg.randpol.n_pi == 100);
    CHECK(cfg.randpol.m == 10);
    CHECK(cfg.randpol.j_q == 20);
    CHECK(cfg.randpol.j_pi == 20);
    CHECK(cfg.randpol.k_iterations == 50);
    CHECK(cfg.randpol.features == FeatureMode::resample);
    CHECK(cfg.randpol.initial_q == InitialQ::zero);
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
    CHECK(cfg.randpol.threads == 1);
    CHECK_FALSE(cfg.timing);
    CHECK(make_env(cfg.env).gamma == 0.7);

    // every documented default appears verbatim in the resolved text
    const std::string text = resolved_config_text(cfg);
    for (const auto& k : config_keys()) {
        CHECK(text.find(k.key + " = " + k.default_value + "\n") != std::string::npos);
        CHECK_FALSE(k.description.empty());
    }
}

TEST_CASE("resolved configuration round-trips") {
    ExperimentConfig cfg = parse_config(R"(
env = linear_quadratic
gamma = 0.85
dt = 0.05
n_q = 123
bandwidth_q = 0.7
c_bound = 42.5
features = fixed
initial_q = random
sample_state_box = -1.5:1.5,-1:1
eval = off
seeds = 9,4
svg = no
)");
    const std::string text = resolved_config_text(cfg);
    const ExperimentConfig again = parse_config(text);
    CHECK(resolved_config_text(again) == text);
    CHECK(again.env.gamma == 0.85);
    CHECK(again.randpol.bandwidth_q == 0.7);
    CHECK(again.randpol.sampling.state_box->lower[0] == -1.5);
    CHECK(again.randpol.features == FeatureMode::fixed);
    CHECK(again.seeds == std::vector<std::uint64_t>{9, 4});
}

TEST_CASE("seed lists") {
    CHECK(parse_seed_list("1, 2,3") == std::vector<std::uint64_t>{1, 2, 3});
    CHECK_THROWS_AS(parse_seed_list("1,,2"), ConfigError);
    CHECK_THROWS_AS(parse_seed_list("-4"), ConfigError);
    CHECK_THROWS_AS(parse_seed_list("1,1"), ConfigError);
}

TEST_CASE("numbers are written without locale and read back exactly") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-2.5e-7) == "-2.5e-07");
    CHECK(format_number(std::nan("")) == "nan");
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.normal() * std::pow(10.0, rng.uniform(-20.0, 20.0));
        CHECK(*parse_number(format_number(v)) == v);
    }
    CHECK_FALSE(parse_number("1,5").has_value());
}

TEST_CASE("per-seed csv layout") {
    CHECK(seed_csv({}, false) == std::string(kSeedCsvHeader) + "\n");
    IterationDiagnostics d;
    d.iteration = 1;
    d.critic_objective = 0.5;
    d.bellman_residual = 0.25;
    d.improvement_gap = 0.0;
    d.perf_error_sup = std::nan("");
    d.wall_ms = 12.0;
    CHECK(seed_csv({d}, false) == std::string(kSeedCsvHeader) + "\n1,0.5,0.25,0,nan,\n");
    CHECK(seed_csv({d}, true) == std::string(kSeedCsvHeader) + "\n1,0.5,0.25,0,nan,12\n");
}

TEST_CASE("aggregate csv statistics") {
    IterationDiagnostics a;
    a.iteration = 1;
    a.perf_error_sup = 1.0;
    a.critic_objective = 2.0;
    IterationDiagnostics b = a;
    b.perf_error_sup = 3.0;
    b.critic_objective = std::nan("");
    const CsvTable t = parse_csv(aggregate_csv({{a}, {b}}, false));
    REQUIRE(t.rows.size() == 1);
    CHECK(t.header[0] == "schema_version");
    CHECK(t.rows[0][t.column("schema_version")] == std::to_string(kCsvSchemaVersion));
    CHECK(t.rows[0][t.column("seeds")] == "2");
    CHECK(t.rows[0][t.column("perf_error_sup_mean")] == "2");
    CHECK(t.rows[0][t.column("perf_error_sup_min")] == "1");
    CHECK(t.rows[0][t.column("perf_error_sup_max")] == "3");
    CHECK(t.rows[0][t.column("critic_objective_mean")] == "2");
    CHECK(t.rows[0][t.column("wall_ms_mean")].empty());

    const MetricSeries s = read_aggregate_metric(t, "perf_error_sup");
    CHECK(s.mean == std::vector<double>{2.0});

    CsvTable stale = t;
    stale.rows[0][0] = "0";
    CHECK_THROWS_AS(read_aggregate_metric(stale, "perf_error_sup"), InvalidArgument);
}

TEST_CASE("svg line chart") {
    const std::string svg =
        line_chart({{"a", {0, 1, 2, 3}, {1.0, 0.5, std::nan(""), 0.1}, "#000000", 2.0, false}}, {"t", "x", "y"});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    // the NaN splits the series into two pieces
    std::size_t lines = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1))
        ++lines;
    CHECK(lines == 2);
    const auto ticks = nice_ticks(0.0, 1.0, 6);
    CHECK(ticks.front() <= 0.0);
    CHECK(ticks.back() >= 1.0);
}

TEST_CASE("zero iterations give header-only seed files") {
    ExperimentConfig cfg = tiny_experiment(scratch_dir("k0"));
    cfg.randpol.k_iterations = 0;
    cfg.seeds = {5};
    const ExperimentOutcome out = run_experiment(cfg);
    CHECK(out.ok());
    CHECK(slurp(cfg.out_dir / "seed_5.csv") == std::string(kSeedCsvHeader) + "\n");
    fs::remove_all(cfg.out_dir);
}

TEST_CASE("experiment outputs are byte-identical across thread counts") {
    ExperimentConfig one = tiny_experiment(scratch_dir("t1"));
    one.randpol.threads = 1;
    ExperimentConfig four = tiny_experiment(scratch_dir("t4"));
    four.randpol.threads = 4;
    REQUIRE(run_experiment(one).ok());
    REQUIRE(run_experiment(four).ok());
    for (const char* f : {"seed_1.csv", "seed_2.csv", "seed_3.csv", "aggregate.csv", "perf_error_sup.svg"})
        CHECK(slurp(one.out_dir / f) == slurp(four.out_dir / f));
    CHECK(fs::exists(one.out_dir / "manifest.json"));
    CHECK_FALSE(fs::exists(one.out_dir / "FAILED"));

    const std::string manifest = slurp(one.out_dir / "manifest.json");
    CHECK(manifest.find(code_version()) != std::string::npos);
    CHECK(manifest.find("\"seed\": 2") != std::string::npos);

    // the emitted configuration reproduces the run
    ExperimentConfig again = load_config(one.out_dir / "resolved_config.txt");
    again.out_dir = scratch_dir("again");
    REQUIRE(run_experiment(again).ok());
    CHECK(slurp(again.out_dir / "aggregate.csv") == slurp(one.out_dir / "aggregate.csv"));
    for (const auto& d : {one.out_dir, four.out_dir, again.out_dir}) fs::remove_all(d);
}

TEST_CASE("failing seeds leave a marker and partial outputs") {
    ExperimentConfig cfg = tiny_experiment(scratch_dir("fail"));
    cfg.seeds = {1, 2};
    EnvModel env = make_env(cfg.env);
    env.reward = [](const Vec&, const Vec&) -> double { throw std::runtime_error("reward exploded"); };
    const ExperimentOutcome out = run_experiment(cfg, env);
    CHECK_FALSE(out.ok());
    CHECK(fs::exists(cfg.out_dir / "FAILED"));
    CHECK(slurp(cfg.out_dir / "FAILED").find("reward exploded") != std::string::npos);
    CHECK(fs::exists(cfg.out_dir / "resolved_config.txt"));
    CHECK(fs::exists(cfg.out_dir / "manifest.json"));
    fs::remove_all(cfg.out_dir);
}

TEST_CASE("theory report rendering") {
    theory::TheoryInputs in;
    const theory::TheoryReport r = theory::theory_report(in);
    const std::string csv = theory_csv(r);
    CHECK(csv.rfind("quantity,value\n", 0) == 0);
    CHECK(csv.find("\nk_star,3\n") != std::string::npos);
    CHECK(csv.find("\nstationary_1,0.25\n") != std::string::npos);
    CHECK(csv.find("\ndelta_prime," + format_number(*r.delta_prime) + "\n") != std::string::npos);
    CHECK(theory_table(r).find("k_star") != std::string::npos);
}

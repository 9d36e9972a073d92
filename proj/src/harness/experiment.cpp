#include "randpol/harness/experiment.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "randpol/errors.hpp"
#include "randpol/harness/svg.hpp"
#include "randpol/parallel.hpp"

#ifndef RANDPOL_VERSION
#define RANDPOL_VERSION "0.0.0"
#endif
#ifndef RANDPOL_GIT_REVISION
#define RANDPOL_GIT_REVISION "unknown"
#endif

namespace randpol::harness {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string manifest(const ExperimentOutcome& outcome, const EnvModel& env) {
    nlohmann::ordered_json m;
    m["tool"] = "randpol";
    m["code_version"] = code_version();
    m["csv_schema"] = kCsvSchemaVersion;
    m["seed_csv_header"] = std::string(kSeedCsvHeader);
    m["env"] = env.name;
    m["gamma"] = env.gamma;
    m["resolved_config"] = "resolved_config.txt";
    m["aggregate"] = "aggregate.csv";
    nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
    for (const auto& s : outcome.seeds) {
        nlohmann::ordered_json e;
        e["seed"] = s.seed;
        e["csv"] = seed_csv_name(s.seed);
        e["status"] = s.ok ? "ok" : "failed";
        if (!s.ok) e["error"] = s.error;
        e["iterations"] = s.diagnostics.size();
        seeds.push_back(std::move(e));
    }
    m["seeds"] = std::move(seeds);
    m["status"] = outcome.ok() ? "ok" : "failed";
    return m.dump(2) + "\n";
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : "undefined"; }

std::vector<std::pair<std::string, std::string>> theory_rows(const theory::TheoryReport& r) {
    const auto& in = r.inputs;
    std::vector<std::pair<std::string, std::string>> rows{
        {"epsilon", format_number(in.epsilon)},
        {"delta", format_number(in.delta)},
        {"gamma", format_number(in.gamma)},
        {"q_max", format_number(in.q_max)},
        {"c_mu", format_number(in.c_mu)},
        {"q", format_number(in.q_good)},
        {"c_bound", format_number(in.c_bound)},
        {"c_prime", format_number(in.c_prime)},
        {"l_u", format_number(in.l_u)},
        {"j_q", std::to_string(in.j_q)},
        {"j_pi", std::to_string(in.j_pi)},
        {"n_for_m", std::to_string(in.n_for_m)},
        {"k_star_raw", format_number(r.k_star_raw)},
        {"k_star", std::to_string(r.k_star)},
        {"delta_prime", optional_number(r.delta_prime)},
        {"j_q0", format_number(r.bounds.j_q0)},
        {"j_pi0", format_number(r.bounds.j_pi0)},
        {"m0", format_number(r.bounds.m0)},
        {"n_q0", format_number(r.bounds.n_q0)},
        {"n_pi0", format_number(r.bounds.n_pi0)},
        {"min_iterations", std::to_string(r.min_iterations)},
    };
    for (std::size_t i = 0; i < r.stationary.probabilities.size(); ++i)
        rows.emplace_back("stationary_" + std::to_string(i + 1), format_number(r.stationary.probabilities[i]));
    rows.emplace_back("mixing_time_bound", optional_number(r.mixing_time_bound));
    rows.emplace_back("propagation_k", std::to_string(r.propagation_k));
    rows.emplace_back("propagation_bound", format_number(r.propagation_bound));
    return rows;
}

}  // namespace

bool ExperimentOutcome::ok() const {
    return std::all_of(seeds.begin(), seeds.end(), [](const SeedOutcome& s) { return s.ok; });
}

std::string code_version() { return std::string(RANDPOL_VERSION) + "+" + RANDPOL_GIT_REVISION; }

std::string seed_csv_name(std::uint64_t seed) { return "seed_" + std::to_string(seed) + ".csv"; }

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    return run_experiment(cfg, make_env(cfg.env));
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const EnvModel& env) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    fs::remove(cfg.out_dir / "FAILED");
    write_file(cfg.out_dir / "resolved_config.txt", resolved_config_text(cfg));

    std::vector<std::uint64_t> seeds = cfg.seeds;
    std::sort(seeds.begin(), seeds.end());
    ExperimentOutcome outcome{cfg.out_dir, std::vector<SeedOutcome>(seeds.size())};

    const int n = static_cast<int>(seeds.size());
    const int workers = std::min(cfg.randpol.threads, n);
    const int inner = std::max(1, cfg.randpol.threads / n);
    parallel_for(seeds.size(), workers, [&](std::size_t i) {
        SeedOutcome& out = outcome.seeds[i];
        out.seed = seeds[i];
        RandpolConfig rc = cfg.randpol;
        rc.seed = seeds[i];
        rc.threads = inner;
        try {
            RunResult res = run(env, rc);
            out.diagnostics = std::move(res.diagnostics);
            out.ok = true;
            write_file(cfg.out_dir / seed_csv_name(out.seed), seed_csv(out.diagnostics, cfg.timing));
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
        }
    });

    std::vector<std::vector<IterationDiagnostics>> finished;
    for (const auto& s : outcome.seeds)
        if (s.ok) finished.push_back(s.diagnostics);
    const std::string aggregate = aggregate_csv(finished, cfg.timing);
    write_file(cfg.out_dir / "aggregate.csv", aggregate);
    if (cfg.svg) write_file(cfg.out_dir / "perf_error_sup.svg", aggregate_chart(parse_csv(aggregate)));
    write_file(cfg.out_dir / "manifest.json", manifest(outcome, env));
    if (!outcome.ok()) {
        std::string marker;
        for (const auto& s : outcome.seeds)
            if (!s.ok) marker += "seed " + std::to_string(s.seed) + ": " + s.error + "\n";
        write_file(cfg.out_dir / "FAILED", marker);
    }
    return outcome;
}

std::string aggregate_chart(const CsvTable& aggregate, const std::string& metric) {
    const MetricSeries s = read_aggregate_metric(aggregate, metric);
    ChartOptions opt;
    opt.title = metric + " vs iteration";
    opt.x_label = "iteration";
    opt.y_label = metric;
    return line_chart({{"mean", s.iteration, s.mean, "#1f77b4", 2.0, false},
                       {"min", s.iteration, s.min, "#7f7f7f", 1.0, true},
                       {"max", s.iteration, s.max, "#d62728", 1.0, true}},
                      opt);
}

std::string theory_table(const theory::TheoryReport& report) {
    const auto rows = theory_rows(report);
    std::size_t width = 0;
    for (const auto& [k, v] : rows) width = std::max(width, k.size());
    std::string out;
    for (const auto& [k, v] : rows) out += k + std::string(width - k.size() + 2, ' ') + v + "\n";
    return out;
}

std::string theory_csv(const theory::TheoryReport& report) {
    std::string out = "quantity,value\n";
    for (const auto& [k, v] : theory_rows(report)) out += k + "," + v + "\n";
    return out;
}

}  // namespace randpol::harness

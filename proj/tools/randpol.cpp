#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "randpol/errors.hpp"
#include "randpol/harness/config.hpp"
#include "randpol/harness/experiment.hpp"
#include "randpol/theory.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kRuntime = 3;

using namespace randpol;

int cmd_run(const std::string& config_path, const std::string& out, const std::string& seeds) {
    harness::ExperimentConfig cfg = harness::load_config(config_path);
    if (!out.empty()) cfg.out_dir = out;
    if (!seeds.empty()) cfg.seeds = harness::parse_seed_list(seeds, "--seeds");
    cfg.validate();
    const harness::ExperimentOutcome res = harness::run_experiment(cfg);
    for (const auto& s : res.seeds) {
        if (s.ok) {
            std::cout << "seed " << s.seed << ": " << s.diagnostics.size() << " iterations";
            if (!s.diagnostics.empty())
                std::cout << ", final perf_error_sup " << harness::format_number(s.diagnostics.back().perf_error_sup);
            std::cout << "\n";
        } else {
            std::cerr << "seed " << s.seed << " failed: " << s.error << "\n";
        }
    }
    std::cout << "wrote " << res.out_dir.string() << "\n";
    return res.ok() ? kOk : kRuntime;
}

int cmd_theory(const theory::TheoryInputs& inputs, bool csv) {
    const theory::TheoryReport report = theory::theory_report(inputs);
    std::cout << (csv ? harness::theory_csv(report) : harness::theory_table(report));
    return kOk;
}

int cmd_plot(const std::string& in, const std::string& out, const std::string& metric) {
    std::ifstream f(in, std::ios::binary);
    if (!f) throw harness::ConfigError(harness::ConfigError::Kind::missing_file, "--in", "cannot open '" + in + "'");
    std::ostringstream buf;
    buf << f.rdbuf();
    const std::string svg = harness::aggregate_chart(harness::parse_csv(buf.str()), metric);
    std::ofstream o(out, std::ios::binary | std::ios::trunc);
    if (!o) throw std::runtime_error("cannot write '" + out + "'");
    o << svg;
    return o ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"randpol: randomized-feature policy iteration for continuous MDPs"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a seeded experiment from a config file");
    std::string config_path;
    std::string out;
    std::string seeds;
    run->add_option("--config", config_path, "config file (key = value lines)")->required();
    run->add_option("--out", out, "output directory (overrides 'out')");
    run->add_option("--seeds", seeds, "comma-separated seeds (overrides 'seeds')");

    auto* th = app.add_subcommand("theory", "print the theory calculators' outputs");
    theory::TheoryInputs inputs;
    bool csv = false;
    th->add_option("--epsilon", inputs.epsilon)->required();
    th->add_option("--delta", inputs.delta)->required();
    th->add_option("--gamma", inputs.gamma)->required();
    th->add_option("--qmax", inputs.q_max)->required();
    th->add_option("--cmu", inputs.c_mu)->required();
    th->add_option("--q", inputs.q_good)->required();
    th->add_option("--c-bound", inputs.c_bound, "critic weight bound C")->capture_default_str();
    th->add_option("--c-prime", inputs.c_prime, "actor weight bound C'")->capture_default_str();
    th->add_option("--lu", inputs.l_u, "Lipschitz constant L_U")->capture_default_str();
    th->add_option("--jq", inputs.j_q, "critic features J_Q")->capture_default_str();
    th->add_option("--jpi", inputs.j_pi, "actor features J_pi")->capture_default_str();
    th->add_option("--n", inputs.n_for_m, "N in the M^0 bound")->capture_default_str();
    th->add_flag("--csv", csv, "emit CSV instead of a table");

    auto* plot = app.add_subcommand("plot", "render an aggregate CSV as an SVG line chart");
    std::string plot_in;
    std::string plot_out;
    std::string metric = "perf_error_sup";
    plot->add_option("--in", plot_in, "aggregate.csv")->required();
    plot->add_option("--out", plot_out, "output .svg")->required();
    plot->add_option("--metric", metric, "metric column prefix")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*run) return cmd_run(config_path, out, seeds);
        if (*th) return cmd_theory(inputs, csv);
        if (*plot) return cmd_plot(plot_in, plot_out, metric);
    } catch (const harness::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return kRuntime;
    }
    return kOk;
}

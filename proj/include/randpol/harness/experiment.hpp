#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "randpol/harness/config.hpp"
#include "randpol/harness/csv.hpp"
#include "randpol/theory.hpp"

namespace randpol::harness {

struct SeedOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    std::vector<IterationDiagnostics> diagnostics;
};

struct ExperimentOutcome {
    std::filesystem::path out_dir;
    /// Sorted by seed.
    std::vector<SeedOutcome> seeds;

    bool ok() const;
};

/// Version string baked in at build time ("<version>+<git revision>").
std::string code_version();

std::string seed_csv_name(std::uint64_t seed);

/// Runs every seed (in parallel when threads > 1) and writes into cfg.out_dir:
///   resolved_config.txt, seed_<s>.csv, aggregate.csv, manifest.json,
///   perf_error_sup.svg (if enabled) and FAILED when any seed failed.
/// Files of seeds that finished are kept on failure.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

/// Same, with an explicitly built environment.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const EnvModel& env);

/// perf_error_sup mean with min/max envelope from an aggregate CSV.
std::string aggregate_chart(const CsvTable& aggregate, const std::string& metric = "perf_error_sup");

std::string theory_table(const theory::TheoryReport& report);
std::string theory_csv(const theory::TheoryReport& report);

}  // namespace randpol::harness

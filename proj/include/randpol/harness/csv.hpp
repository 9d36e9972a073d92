#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "randpol/driver.hpp"

namespace randpol::harness {

/// Bumped whenever a column is added, removed or reordered.
inline constexpr int kCsvSchemaVersion = 1;

inline constexpr std::string_view kSeedCsvHeader =
    "iteration,critic_objective,bellman_residual,improvement_gap,perf_error_sup,wall_ms";

/// Metric columns of the per-seed CSV, in order.
const std::vector<std::string>& metric_names();

/// Shortest round-trip text, locale independent. NaN -> "nan".
std::string format_number(double v);
std::optional<double> parse_number(std::string_view text);

/// One row per iteration. wall_ms is left empty unless `timing`.
std::string seed_csv(const std::vector<IterationDiagnostics>& rows, bool timing);

/// Per-iteration mean/min/max across seeds (NaN cells ignored; a column
/// with no finite value is written empty). Seeds are given in seed order.
std::string aggregate_csv(const std::vector<std::vector<IterationDiagnostics>>& per_seed, bool timing);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index; throws InvalidArgument when absent.
    std::size_t column(const std::string& name) const;
};

/// Plain comma-separated text (no quoting), LF or CRLF line ends.
CsvTable parse_csv(std::string_view text);

struct MetricSeries {
    std::string metric;
    std::vector<double> iteration;
    std::vector<double> mean;
    std::vector<double> min;
    std::vector<double> max;
};

/// Pull one metric out of an aggregate table; checks the schema version.
MetricSeries read_aggregate_metric(const CsvTable& table, const std::string& metric);

}  // namespace randpol::harness

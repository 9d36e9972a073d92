#include "randpol/harness/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "randpol/errors.hpp"

namespace randpol::harness {

namespace {

double metric_value(const IterationDiagnostics& d, std::size_t k) {
    switch (k) {
        case 0: return d.critic_objective;
        case 1: return d.bellman_residual;
        case 2: return d.improvement_gap;
        case 3: return d.perf_error_sup;
        default: return d.wall_ms;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_row(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"critic_objective", "bellman_residual", "improvement_gap",
                                                "perf_error_sup", "wall_ms"};
    return names;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view text) {
    text = trim(text);
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

std::string seed_csv(const std::vector<IterationDiagnostics>& rows, bool timing) {
    std::string out(kSeedCsvHeader);
    out += '\n';
    for (const auto& d : rows) {
        out += std::to_string(d.iteration);
        for (std::size_t k = 0; k + 1 < metric_names().size(); ++k) {
            out += ',';
            out += format_number(metric_value(d, k));
        }
        out += ',';
        if (timing) out += format_number(d.wall_ms);
        out += '\n';
    }
    return out;
}

std::string aggregate_csv(const std::vector<std::vector<IterationDiagnostics>>& per_seed, bool timing) {
    std::string out = "schema_version,iteration,seeds";
    for (const auto& m : metric_names()) out += "," + m + "_mean," + m + "_min," + m + "_max";
    out += '\n';
    std::size_t iterations = 0;
    for (const auto& s : per_seed) iterations = std::max(iterations, s.size());
    for (std::size_t i = 0; i < iterations; ++i) {
        int seeds = 0;
        for (const auto& s : per_seed)
            if (i < s.size()) ++seeds;
        out += std::to_string(kCsvSchemaVersion) + "," + std::to_string(i + 1) + "," + std::to_string(seeds);
        for (std::size_t k = 0; k < metric_names().size(); ++k) {
            double sum = 0.0;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            int count = 0;
            const bool skip = k + 1 == metric_names().size() && !timing;
            for (const auto& s : per_seed) {
                if (skip || i >= s.size()) continue;
                const double v = metric_value(s[i], k);
                if (std::isnan(v)) continue;
                sum += v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                ++count;
            }
            if (count == 0) {
                out += ",,,";
            } else {
                out += "," + format_number(sum / count) + "," + format_number(lo) + "," + format_number(hi);
            }
        }
        out += '\n';
    }
    return out;
}

std::size_t CsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidArgument("CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    bool first = true;
    std::size_t start = 0;
    int line_no = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        auto cells = split_row(line);
        if (first) {
            table.header = std::move(cells);
            first = false;
            continue;
        }
        if (cells.size() != table.header.size())
            throw InvalidArgument("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                  " cells, header has " + std::to_string(table.header.size()));
        table.rows.push_back(std::move(cells));
    }
    if (first) throw InvalidArgument("CSV is empty");
    return table;
}

MetricSeries read_aggregate_metric(const CsvTable& table, const std::string& metric) {
    const std::size_t schema = table.column("schema_version");
    const std::size_t iter = table.column("iteration");
    const std::size_t mean = table.column(metric + "_mean");
    const std::size_t lo = table.column(metric + "_min");
    const std::size_t hi = table.column(metric + "_max");
    auto cell = [](const std::string& s) {
        if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
        const auto v = parse_number(s);
        if (!v) throw InvalidArgument("not a number: '" + s + "'");
        return *v;
    };
    MetricSeries out{metric, {}, {}, {}, {}};
    for (const auto& row : table.rows) {
        if (row[schema] != std::to_string(kCsvSchemaVersion))
            throw InvalidArgument("aggregate CSV schema_version " + row[schema] + " is not supported (expected " +
                                  std::to_string(kCsvSchemaVersion) + ")");
        out.iteration.push_back(cell(row[iter]));
        out.mean.push_back(cell(row[mean]));
        out.min.push_back(cell(row[lo]));
        out.max.push_back(cell(row[hi]));
    }
    return out;
}

}  // namespace randpol::harness

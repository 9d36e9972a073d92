#pragma once

#include <string>
#include <vector>

namespace randpol::harness {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// CSS colour.
    std::string color = "#1f77b4";
    double width = 2.0;
    bool dashed = false;
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    int width = 720;
    int height = 440;
};

/// Standalone SVG line chart. Non-finite points break the line.
std::string line_chart(const std::vector<Series>& series, const ChartOptions& options);

/// "Nice" tick positions covering [lo, hi] (about `target` of them).
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace randpol::harness

#include "randpol/harness/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "randpol/errors.hpp"
#include "randpol/harness/csv.hpp"

namespace randpol::harness {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// fixed 2 decimals is plenty for pixel coordinates
std::string px(double v) {
    const double r = std::round(v * 100.0) / 100.0;
    return format_number(r == 0.0 ? 0.0 : r);
}

std::string tick_label(double v, double step) {
    if (v == 0.0) return "0";
    char buf[64];
    const double a = std::abs(v);
    std::to_chars_result res;
    if (a >= 1e5 || a < 1e-3) {
        res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 2);
    } else {
        const int decimals = std::max(0, static_cast<int>(std::ceil(-std::log10(step) - 1e-9)));
        res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
    }
    return std::string(buf, res.ptr);
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
    require(std::isfinite(lo) && std::isfinite(hi) && target >= 2, "tick range must be finite");
    if (hi < lo) std::swap(lo, hi);
    if (hi == lo) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        lo -= pad;
        hi += pad;
    }
    const double raw = (hi - lo) / (target - 1);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> out;
    const double first = std::floor(lo / step) * step;
    for (double t = first; t <= hi + step * 0.5; t += step) out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
    if (out.back() < hi) out.push_back(out.back() + step);
    return out;
}

std::string line_chart(const std::vector<Series>& series, const ChartOptions& options) {
    require(options.width >= 200 && options.height >= 150, "chart is too small");
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& s : series) {
        require(s.x.size() == s.y.size(), "series '" + s.label + "' has mismatched x/y lengths");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    const auto xt = nice_ticks(xmin, xmax);
    const auto yt = nice_ticks(std::min(ymin, 0.0), ymax);
    const double x0 = xt.front();
    const double x1 = xt.back();
    const double y0 = yt.front();
    const double y1 = yt.back();

    const double left = 70.0;
    const double right = 150.0;
    const double top = 40.0;
    const double bottom = 50.0;
    const double w = options.width - left - right;
    const double h = options.height - top - bottom;
    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
    auto sy = [&](double y) { return top + h - (y - y0) / (y1 - y0) * h; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(options.width) + "\" height=\"" +
           std::to_string(options.height) + "\" viewBox=\"0 0 " + std::to_string(options.width) + " " +
           std::to_string(options.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!options.title.empty())
        out += "<text x=\"" + px(left + w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
               escape(options.title) + "</text>\n";

    for (double t : yt) {
        const double y = sy(t);
        out += "<line x1=\"" + px(left) + "\" y1=\"" + px(y) + "\" x2=\"" + px(left + w) + "\" y2=\"" + px(y) +
               "\" stroke=\"#e0e0e0\"/>\n";
        out += "<text x=\"" + px(left - 6) + "\" y=\"" + px(y + 4) + "\" text-anchor=\"end\">" +
               tick_label(t, yt.size() > 1 ? yt[1] - yt[0] : 1.0) + "</text>\n";
    }
    for (double t : xt) {
        const double x = sx(t);
        out += "<line x1=\"" + px(x) + "\" y1=\"" + px(top + h) + "\" x2=\"" + px(x) + "\" y2=\"" + px(top + h + 5) +
               "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + px(x) + "\" y=\"" + px(top + h + 18) + "\" text-anchor=\"middle\">" +
               tick_label(t, xt.size() > 1 ? xt[1] - xt[0] : 1.0) + "</text>\n";
    }
    out += "<rect x=\"" + px(left) + "\" y=\"" + px(top) + "\" width=\"" + px(w) + "\" height=\"" + px(h) +
           "\" fill=\"none\" stroke=\"black\"/>\n";
    if (!options.x_label.empty())
        out += "<text x=\"" + px(left + w / 2) + "\" y=\"" + px(options.height - 10.0) +
               "\" text-anchor=\"middle\">" + escape(options.x_label) + "</text>\n";
    if (!options.y_label.empty())
        out += "<text transform=\"translate(16," + px(top + h / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
               escape(options.y_label) + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        std::string style = "fill=\"none\" stroke=\"" + escape(s.color) + "\" stroke-width=\"" + px(s.width) + "\"";
        if (s.dashed) style += " stroke-dasharray=\"6 4\"";
        std::string points;
        auto flush = [&] {
            if (!points.empty()) out += "<polyline " + style + " points=\"" + points + "\"/>\n";
            points.clear();
        };
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            if (!points.empty()) points += ' ';
            points += px(sx(s.x[i])) + "," + px(sy(s.y[i]));
        }
        flush();
        const double ly = top + 12.0 + 20.0 * static_cast<double>(k);
        out += "<line x1=\"" + px(left + w + 12) + "\" y1=\"" + px(ly) + "\" x2=\"" + px(left + w + 36) + "\" y2=\"" +
               px(ly) + "\" " + style + "/>\n";
        out += "<text x=\"" + px(left + w + 42) + "\" y=\"" + px(ly + 4) + "\">" + escape(s.label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace randpol::harness

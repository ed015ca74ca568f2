// svg.hpp - minimal static line plots.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "mazerlab/io/csv.hpp"

namespace mazerlab::io {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    // When y_min < y_max the vertical range is fixed instead of fitted.
    double y_min = 0.0;
    double y_max = 0.0;
    int width = 720;
    int height = 420;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
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

inline std::string fixed(double v, int digits = 2) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// Tick label with at most four significant digits.
inline std::string tick_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

}  // namespace detail

inline std::string render_line_plot(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
    const double left = 70, right = 20, top = 40, bottom = 55;
    const double pw = spec.width - left - right, ph = spec.height - top - bottom;

    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!(x0 <= x1)) x0 = 0, x1 = 1;
    if (spec.y_min < spec.y_max) y0 = spec.y_min, y1 = spec.y_max;
    if (!(y0 <= y1)) y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;

    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
           std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + detail::fixed(spec.width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
           detail::xml_escape(spec.title) + "</text>\n";
    out += "<rect x=\"" + detail::fixed(left) + "\" y=\"" + detail::fixed(top) + "\" width=\"" + detail::fixed(pw) +
           "\" height=\"" + detail::fixed(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

    constexpr int ticks = 5;
    for (int t = 0; t <= ticks; ++t) {
        const double xv = x0 + (x1 - x0) * t / ticks, yv = y0 + (y1 - y0) * t / ticks;
        const double xp = px(xv), yp = py(yv);
        out += "<line x1=\"" + detail::fixed(xp) + "\" y1=\"" + detail::fixed(top + ph) + "\" x2=\"" +
               detail::fixed(xp) + "\" y2=\"" + detail::fixed(top + ph + 5) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + detail::fixed(xp) + "\" y=\"" + detail::fixed(top + ph + 18) +
               "\" text-anchor=\"middle\">" + detail::tick_label(xv) + "</text>\n";
        out += "<line x1=\"" + detail::fixed(left - 5) + "\" y1=\"" + detail::fixed(yp) + "\" x2=\"" +
               detail::fixed(left) + "\" y2=\"" + detail::fixed(yp) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + detail::fixed(left - 8) + "\" y=\"" + detail::fixed(yp + 4) +
               "\" text-anchor=\"end\">" + detail::tick_label(yv) + "</text>\n";
    }
    out += "<text x=\"" + detail::fixed(left + pw / 2) + "\" y=\"" + detail::fixed(spec.height - 12.0) +
           "\" text-anchor=\"middle\">" + detail::xml_escape(spec.x_label) + "</text>\n";
    out += "<text x=\"16\" y=\"" + detail::fixed(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           detail::fixed(top + ph / 2) + ")\">" + detail::xml_escape(spec.y_label) + "</text>\n";

    double legend_y = top + 16;
    for (const auto& s : series) {
        out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            const double y = std::clamp(s.y[i], y0, y1);
            out += detail::fixed(px(s.x[i])) + "," + detail::fixed(py(y)) + " ";
        }
        out += "\"/>\n";
        if (!s.label.empty()) {
            out += "<text x=\"" + detail::fixed(left + pw - 10) + "\" y=\"" + detail::fixed(legend_y) +
                   "\" text-anchor=\"end\" fill=\"" + s.color + "\">" + detail::xml_escape(s.label) + "</text>\n";
            legend_y += 16;
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace mazerlab::io

#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qcwmark/errors.hpp"

namespace qcw {

// Static SVG charts for bench CSV output. Display-only; no interactivity.

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline const char* series_color(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[i % 8];
}

} // namespace detail

inline std::string svg_line_chart(const std::vector<PlotSeries>& series, const std::string& title,
                                  const std::string& x_label, const std::string& y_label) {
    const double w = 640, h = 420, ml = 70, mr = 150, mt = 50, mb = 60;
    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = 1e-12;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (series.empty() || xmin > xmax) throw ConfigError("nothing to plot");
    if (xmax == xmin) xmax = xmin + 1;
    ymax = std::max(1.0, ymax);

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    // axes and gridlines
    for (int g = 0; g <= 5; ++g) {
        double y = ymin + (ymax - ymin) * g / 5.0;
        out << "<line x1='" << ml << "' y1='" << detail::svg_num(py(y)) << "' x2='" << w - mr
            << "' y2='" << detail::svg_num(py(y)) << "' stroke='#ddd'/>\n"
            << "<text x='" << ml - 8 << "' y='" << detail::svg_num(py(y) + 4)
            << "' text-anchor='end' font-size='11'>" << detail::svg_num(y) << "</text>\n";
    }
    out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
        << "' stroke='black'/>\n"
        << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
        << "' stroke='black'/>\n"
        << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 16
        << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n"
        << "<text x='18' y='" << (mt + h - mb) / 2 << "' font-size='13' transform='rotate(-90 18 "
        << (mt + h - mb) / 2 << ")' text-anchor='middle'>" << y_label << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        out << "<polyline fill='none' stroke='" << detail::series_color(si)
            << "' stroke-width='2' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << detail::svg_num(px(s.x[i])) << "," << detail::svg_num(py(s.y[i])) << " ";
        out << "'/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << "<circle cx='" << detail::svg_num(px(s.x[i])) << "' cy='"
                << detail::svg_num(py(s.y[i])) << "' r='3' fill='" << detail::series_color(si)
                << "'/>\n";
        double ly = mt + 16.0 * double(si);
        out << "<rect x='" << w - mr + 10 << "' y='" << ly - 9 << "' width='10' height='10' fill='"
            << detail::series_color(si) << "'/>\n"
            << "<text x='" << w - mr + 26 << "' y='" << ly << "' font-size='11'>" << s.label
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

inline std::string svg_histogram(const std::vector<double>& xs,
                                 const std::vector<std::vector<double>>& bars,
                                 const std::vector<std::string>& labels, const std::string& title,
                                 const std::string& x_label, const std::string& y_label) {
    if (xs.empty() || bars.empty()) throw ConfigError("nothing to plot");
    const double w = 640, h = 420, ml = 70, mr = 150, mt = 50, mb = 60;
    double ymax = 1e-12;
    for (const auto& b : bars)
        for (double v : b) ymax = std::max(ymax, v);

    double slot = (w - ml - mr) / double(xs.size());
    double barw = slot / (double(bars.size()) + 0.6);
    auto py = [&](double y) { return h - mb - y / ymax * (h - mt - mb); };

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n"
        << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
        << "' stroke='black'/>\n"
        << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 16
        << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n"
        << "<text x='18' y='" << (mt + h - mb) / 2 << "' font-size='13' transform='rotate(-90 18 "
        << (mt + h - mb) / 2 << ")' text-anchor='middle'>" << y_label << "</text>\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t b = 0; b < bars.size(); ++b) {
            double v = bars[b][i];
            double x = ml + slot * double(i) + barw * (0.3 + double(b));
            out << "<rect x='" << detail::svg_num(x) << "' y='" << detail::svg_num(py(v))
                << "' width='" << detail::svg_num(barw) << "' height='"
                << detail::svg_num(h - mb - py(v)) << "' fill='" << detail::series_color(b)
                << "' fill-opacity='0.8'/>\n";
        }
        if (xs.size() <= 30 || i % 4 == 0)
            out << "<text x='" << detail::svg_num(ml + slot * (double(i) + 0.5)) << "' y='"
                << h - mb + 16 << "' text-anchor='middle' font-size='10'>" << xs[i] << "</text>\n";
    }
    for (std::size_t b = 0; b < labels.size() && b < bars.size(); ++b) {
        double ly = mt + 16.0 * double(b);
        out << "<rect x='" << w - mr + 10 << "' y='" << ly - 9 << "' width='10' height='10' fill='"
            << detail::series_color(b) << "'/>\n"
            << "<text x='" << w - mr + 26 << "' y='" << ly << "' font-size='11'>" << labels[b]
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace qcw

#include "wmbench/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace wmb {

std::string format_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

std::string fmt2(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string render_line_plot(const PlotSpec& spec) {
    const double W = 640, H = 400;
    const double L = 70, R = 20, T = 40, B = 60;  // margins
    const double pw = W - L - R, ph = H - T - B;

    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = spec.y_min, y_max = spec.y_max;
    const bool auto_y = (spec.y_min == 0.0 && spec.y_max == 0.0);
    if (auto_y) {
        y_min = std::numeric_limits<double>::infinity();
        y_max = -y_min;
    }
    for (const auto& s : spec.series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            if (auto_y) {
                y_min = std::min(y_min, s.y[i]);
                y_max = std::max(y_max, s.y[i]);
            }
        }
    if (!std::isfinite(x_min)) {
        x_min = 0;
        x_max = 1;
    }
    if (!std::isfinite(y_min) || y_min == y_max) {
        y_min = y_min == y_max ? y_min - 0.5 : 0;
        y_max = y_min + 1;
    }
    if (x_min == x_max) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    auto px = [&](double x) { return L + (x - x_min) / (x_max - x_min) * pw; };
    auto py = [&](double y) { return T + (y_max - y) / (y_max - y_min) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
        << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << escape(spec.title) << "</text>\n";
    // Axes.
    out << "<line x1=\"" << L << "\" y1=\"" << T + ph << "\" x2=\"" << L + pw
        << "\" y2=\"" << T + ph << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L
        << "\" y2=\"" << T + ph << "\" stroke=\"black\"/>\n";
    // Y ticks (5).
    for (int i = 0; i <= 4; ++i) {
        const double yv = y_min + (y_max - y_min) * i / 4.0;
        const double yy = py(yv);
        out << "<line x1=\"" << L - 4 << "\" y1=\"" << fmt2(yy) << "\" x2=\""
            << L << "\" y2=\"" << fmt2(yy) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << L - 8 << "\" y=\"" << fmt2(yy + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << fmt_tick(yv) << "</text>\n";
    }
    // X ticks: labeled categories or 5 numeric ticks.
    if (!spec.x_tick_labels.empty()) {
        for (size_t i = 0; i < spec.x_tick_labels.size(); ++i) {
            const double xx = px(static_cast<double>(i));
            out << "<line x1=\"" << fmt2(xx) << "\" y1=\"" << T + ph
                << "\" x2=\"" << fmt2(xx) << "\" y2=\"" << T + ph + 4
                << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << fmt2(xx) << "\" y=\"" << T + ph + 8
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
                   "font-size=\"10\" transform=\"rotate(-30 "
                << fmt2(xx) << " " << T + ph + 8 << ")\">"
                << escape(spec.x_tick_labels[i]) << "</text>\n";
        }
    } else {
        for (int i = 0; i <= 4; ++i) {
            const double xv = x_min + (x_max - x_min) * i / 4.0;
            const double xx = px(xv);
            out << "<line x1=\"" << fmt2(xx) << "\" y1=\"" << T + ph
                << "\" x2=\"" << fmt2(xx) << "\" y2=\"" << T + ph + 4
                << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << fmt2(xx) << "\" y=\"" << T + ph + 18
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                   "font-size=\"11\">"
                << fmt_tick(xv) << "</text>\n";
        }
    }
    // Axis labels.
    out << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << escape(spec.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << T + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\" transform=\"rotate(-90 16 "
        << T + ph / 2 << ")\">" << escape(spec.y_label) << "</text>\n";
    // Series.
    for (size_t si = 0; si < spec.series.size(); ++si) {
        const auto& s = spec.series[si];
        const char* color = kColors[si % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (i) out << " ";
            const double yv = std::clamp(s.y[i], y_min, y_max);
            out << fmt2(px(s.x[i])) << "," << fmt2(py(yv));
        }
        out << "\"/>\n";
        for (size_t i = 0; i < s.x.size(); ++i) {
            const double yv = std::clamp(s.y[i], y_min, y_max);
            out << "<circle cx=\"" << fmt2(px(s.x[i])) << "\" cy=\""
                << fmt2(py(yv)) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        }
        // Legend entry.
        const double ly = T + 6 + 16 * static_cast<double>(si);
        out << "<line x1=\"" << L + pw - 120 << "\" y1=\"" << fmt2(ly)
            << "\" x2=\"" << L + pw - 100 << "\" y2=\"" << fmt2(ly)
            << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << L + pw - 94 << "\" y=\"" << fmt2(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">"
            << escape(s.label) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace wmb

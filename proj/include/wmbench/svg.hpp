#pragma once

#include <string>
#include <vector>

namespace wmb {

// Minimal deterministic SVG line plots for reports. Output depends only on
// the inputs (no timestamps, no locale).
struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    // Optional fixed y range; when both are 0 the range is data-driven.
    double y_min = 0.0;
    double y_max = 0.0;
    std::vector<std::string> x_tick_labels;  // used instead of numbers if set
};

std::string render_line_plot(const PlotSpec& spec);

// Fixed-format float for deterministic text artifacts ("%.12g").
std::string format_num(double v);

}  // namespace wmb

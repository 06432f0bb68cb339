#pragma once

#include <string>
#include <vector>

namespace bmfim::harness {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// Optional band drawn behind the line (both empty or both sized like y).
    std::vector<double> lower;
    std::vector<double> upper;
};

struct PlotOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    /// Draw points instead of polylines.
    bool markers = false;
    int width = 720;
    int height = 440;
};

/// Line (or scatter) chart. Non-positive values are skipped on a log axis.
std::string line_plot(const std::vector<Series>& series, const PlotOptions& options);

/// Overlaid step histograms of each sample set, on shared bins.
struct Histogram {
    std::string label;
    std::vector<double> values;
};
std::string histogram_plot(const std::vector<Histogram>& sets, int bins, const PlotOptions& options);

}  // namespace bmfim::harness

#include "bmfim/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace bmfim::harness {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};
constexpr int kLeft = 70, kRight = 170, kTop = 36, kBottom = 50;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Frame {
    const PlotOptions& opt;
    double x0, x1, y0, y1;  // data range (y in log10 units when log_y)

    double px(double x) const {
        const double w = opt.width - kLeft - kRight;
        return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * w;
    }
    double py(double y) const {
        const double h = opt.height - kTop - kBottom;
        const double v = opt.log_y ? std::log10(y) : y;
        return opt.height - kBottom - (y1 > y0 ? (v - y0) / (y1 - y0) : 0.5) * h;
    }
    bool visible(double y) const { return std::isfinite(y) && (!opt.log_y || y > 0.0); }
};

std::string header(const PlotOptions& opt) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) +
                    "\" height=\"" + std::to_string(opt.height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + std::to_string(opt.width / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(opt.title) + "</text>\n";
    return s;
}

std::string axes(const Frame& f) {
    const auto& o = f.opt;
    const int bottom = o.height - kBottom, right = o.width - kRight;
    std::string s = "<g stroke=\"black\" fill=\"none\">";
    s += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(bottom) + "\" x2=\"" +
         std::to_string(right) + "\" y2=\"" + std::to_string(bottom) + "\"/>";
    s += "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(kTop) + "\" x2=\"" +
         std::to_string(kLeft) + "\" y2=\"" + std::to_string(bottom) + "\"/></g>\n";
    for (int k = 0; k <= 4; ++k) {
        const double x = f.x0 + (f.x1 - f.x0) * k / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        const double y = o.log_y ? std::pow(10.0, yv) : yv;
        s += "<text x=\"" + num(f.px(x)) + "\" y=\"" + std::to_string(bottom + 16) + "\" text-anchor=\"middle\">" +
             tick_label(x) + "</text>\n";
        s += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + num(f.py(y) + 4) + "\" text-anchor=\"end\">" +
             tick_label(y) + "</text>\n";
    }
    s += "<text x=\"" + std::to_string((kLeft + right) / 2) + "\" y=\"" + std::to_string(o.height - 12) +
         "\" text-anchor=\"middle\">" + escape(o.x_label) + "</text>\n";
    s += "<text transform=\"translate(16," + std::to_string((kTop + bottom) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(o.y_label + (o.log_y ? " (log)" : "")) + "</text>\n";
    return s;
}

std::string legend(const std::vector<std::string>& labels, const PlotOptions& o) {
    std::string s;
    int slot = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k].empty()) continue;
        const int y = kTop + 14 * slot++;
        const int x = o.width - kRight + 10;
        s += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
             "\" width=\"10\" height=\"10\" fill=\"" + kPalette[k % 8] + "\"/>";
        s += "<text x=\"" + std::to_string(x + 14) + "\" y=\"" + std::to_string(y + 9) + "\">" +
             escape(labels[k]) + "</text>\n";
    }
    return s;
}

void widen(double& lo, double& hi) {
    if (!(lo < hi)) {
        lo -= 0.5;
        hi += 0.5;
    }
}

}  // namespace

std::string line_plot(const std::vector<Series>& series, const PlotOptions& options) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto take_y = [&](double y) {
        if (!std::isfinite(y) || (options.log_y && y <= 0.0)) return;
        const double v = options.log_y ? std::log10(y) : y;
        y0 = std::min(y0, v);
        y1 = std::max(y1, v);
    };
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
            if (!std::isfinite(s.x[k])) continue;
            x0 = std::min(x0, s.x[k]);
            x1 = std::max(x1, s.x[k]);
            take_y(s.y[k]);
            if (k < s.lower.size()) take_y(s.lower[k]);
            if (k < s.upper.size()) take_y(s.upper[k]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1;
    if (!std::isfinite(y0)) y0 = 0, y1 = 1;
    widen(x0, x1);
    widen(y0, y1);
    const Frame f{options, x0, x1, y0, y1};

    std::string svg = header(options) + axes(f);
    std::vector<std::string> labels;
    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* colour = kPalette[si % 8];
        labels.push_back(s.label);
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.lower.size() == n && s.upper.size() == n && n > 0) {
            std::string pts;
            for (std::size_t k = 0; k < n; ++k)
                if (f.visible(s.upper[k])) pts += num(f.px(s.x[k])) + "," + num(f.py(s.upper[k])) + " ";
            for (std::size_t k = n; k-- > 0;)
                if (f.visible(s.lower[k])) pts += num(f.px(s.x[k])) + "," + num(f.py(s.lower[k])) + " ";
            svg += "<polygon points=\"" + pts + "\" fill=\"" + colour + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
        }
        if (options.markers) {
            for (std::size_t k = 0; k < n; ++k)
                if (f.visible(s.y[k]))
                    svg += "<circle cx=\"" + num(f.px(s.x[k])) + "\" cy=\"" + num(f.py(s.y[k])) + "\" r=\"2.5\" fill=\"" +
                           colour + "\"/>\n";
        } else {
            std::string pts;
            for (std::size_t k = 0; k < n; ++k)
                if (f.visible(s.y[k])) pts += num(f.px(s.x[k])) + "," + num(f.py(s.y[k])) + " ";
            svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\"/>\n";
        }
    }
    return svg + legend(labels, options) + "</svg>\n";
}

std::string histogram_plot(const std::vector<Histogram>& sets, int bins, const PlotOptions& options) {
    bins = std::max(bins, 1);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : sets)
        for (double v : s.values)
            if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    widen(lo, hi);
    const double width = (hi - lo) / bins;

    std::vector<Series> steps;
    for (const auto& s : sets) {
        std::vector<double> count(static_cast<std::size_t>(bins), 0.0);
        for (double v : s.values) {
            if (!std::isfinite(v)) continue;
            auto b = static_cast<int>((v - lo) / width);
            count[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))] += 1.0;
        }
        Series line;
        line.label = s.label;
        for (int b = 0; b < bins; ++b) {
            line.x.push_back(lo + b * width);
            line.y.push_back(count[static_cast<std::size_t>(b)]);
            line.x.push_back(lo + (b + 1) * width);
            line.y.push_back(count[static_cast<std::size_t>(b)]);
        }
        steps.push_back(std::move(line));
    }
    auto opt = options;
    opt.log_y = false;
    opt.markers = false;
    if (opt.y_label.empty()) opt.y_label = "count";
    return line_plot(steps, opt);
}

}  // namespace bmfim::harness

#include "curio/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace curio::svg {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;

const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
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
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void header(std::ostringstream& os, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << num(kWidth / 2 - kRight / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << escape(title) << "</text>\n";
}

void axes(std::ostringstream& os, const Frame& f, const std::string& xl, const std::string& yl) {
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kWidth - kLeft - kRight)
       << "\" height=\"" << num(kHeight - kTop - kBottom) << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
        const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
        os << "<line x1=\"" << num(f.px(xv)) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\"" << num(f.px(xv))
           << "\" y2=\"" << num(kHeight - kBottom + 4) << "\" stroke=\"#333\"/>"
           << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(kHeight - kBottom + 16)
           << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
        os << "<line x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(f.py(yv)) << "\" x2=\"" << num(kLeft)
           << "\" y2=\"" << num(f.py(yv)) << "\" stroke=\"#333\"/>"
           << "<text x=\"" << num(kLeft - 7) << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">"
           << tick_label(yv) << "</text>\n";
    }
    os << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 12)
       << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
    os << "<text transform=\"translate(16," << num((kTop + kHeight - kBottom) / 2)
       << ") rotate(-90)\" text-anchor=\"middle\">" << escape(yl) << "</text>\n";
}

void legend_entry(std::ostringstream& os, int index, const std::string& name, const std::string& color) {
    const double y = kTop + 10 + 16 * index;
    const double x = kWidth - kRight + 12;
    os << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 8) << "\" width=\"12\" height=\"8\" fill=\"" << color
       << "\"/><text x=\"" << num(x + 18) << "\" y=\"" << num(y) << "\">" << escape(name) << "</text>\n";
}

}  // namespace

std::string render(const LineChart& chart) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : chart.series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.name + "': x/y lengths differ");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min({y0, s.y[i], s.lo.empty() ? s.y[i] : s.lo[i]});
            y1 = std::max({y1, s.y[i], s.hi.empty() ? s.y[i] : s.hi[i]});
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (chart.y_min) y0 = *chart.y_min;
    if (chart.y_max) y1 = *chart.y_max;
    if (x1 <= x0) x1 = x0 + 1;
    if (y1 <= y0) y1 = y0 + 1;
    const Frame f{x0, x1, y0, y1};

    std::ostringstream os;
    header(os, chart.title);
    axes(os, f, chart.x_label, chart.y_label);
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const std::string color = s.color.empty() ? kPalette[k % std::size(kPalette)] : s.color;
        if (!s.lo.empty() && s.lo.size() == s.x.size() && s.hi.size() == s.x.size()) {
            os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) os << num(f.px(s.x[i])) << ',' << num(f.py(s.hi[i])) << ' ';
            for (std::size_t i = s.x.size(); i-- > 0;) os << num(f.px(s.x[i])) << ',' << num(f.py(s.lo[i])) << ' ';
            os << "\"/>\n";
        }
        os << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
           << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) os << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << ' ';
        os << "\"/>\n";
        legend_entry(os, static_cast<int>(k), s.name, color);
    }
    os << "</svg>\n";
    return os.str();
}

std::string render(const ScatterChart& chart) {
    const Frame f{chart.x_min, chart.x_max, chart.y_min, chart.y_max};
    std::ostringstream os;
    header(os, chart.title);
    axes(os, f, "x motor", "y motor");
    int k = 0;
    for (const auto& layer : chart.layers) {
        const std::string color = layer.color.empty() ? kPalette[k % std::size(kPalette)] : layer.color;
        for (const auto& p : layer.points)
            os << "<circle cx=\"" << num(f.px(p.x)) << "\" cy=\"" << num(f.py(p.y)) << "\" r=\"" << num(layer.radius)
               << "\" fill=\"" << color << "\"/>\n";
        legend_entry(os, k++, layer.name, color);
    }
    if (!chart.hull.empty()) {
        os << "<polygon class=\"hull\" fill=\"none\" stroke=\"#000\" stroke-width=\"1\" points=\"";
        for (const auto& p : chart.hull) os << num(f.px(p.x)) << ',' << num(f.py(p.y)) << ' ';
        os << "\"/>\n";
        legend_entry(os, k, "convex hull", "#000");
    }
    os << "</svg>\n";
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace curio::svg

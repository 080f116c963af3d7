#pragma once

// Self-contained SVG line and scatter charts for the run reports.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "curio/geometry.hpp"

namespace curio::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    // Optional shaded band (e.g. mean -/+ stddev).
    std::vector<double> lo;
    std::vector<double> hi;
    bool dashed = false;
    std::string color;  // empty: pick from the palette
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::optional<double> y_min;
    std::optional<double> y_max;
};

struct ScatterLayer {
    std::string name;
    std::vector<geometry::Point> points;
    std::string color;
    double radius = 1.5;
};

struct ScatterChart {
    std::string title;
    std::vector<ScatterLayer> layers;
    std::vector<geometry::Point> hull;  // drawn as a closed outline when non-empty
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
};

std::string render(const LineChart& chart);
std::string render(const ScatterChart& chart);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace curio::svg

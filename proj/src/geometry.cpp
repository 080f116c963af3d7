#include "curio/geometry.hpp"

#include <algorithm>

namespace curio::geometry {

Hull convex_hull(std::span<const Point> points) {
    std::vector<Point> p(points.begin(), points.end());
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    Hull hull;
    if (p.size() < 3) {
        hull.vertices = p;
        return hull;
    }

    std::vector<Point> h(2 * p.size());
    std::size_t k = 0;
    for (const auto& pt : p) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pt) <= 0) --k;
        h[k++] = pt;
    }
    for (std::size_t i = p.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);  // last point repeats the first
    hull.vertices = std::move(h);
    hull.area = hull.vertices.size() >= 3 ? polygon_area(hull.vertices) : 0.0;
    return hull;
}

double polygon_area(std::span<const Point> polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = polygon[i];
        const Point& b = polygon[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return twice / 2.0;
}

std::vector<double> cumulative_hull_area(std::span<const Point> points) {
    std::vector<double> areas;
    areas.reserve(points.size());
    std::vector<Point> current;
    double area = 0.0;
    for (const auto& p : points) {
        current.push_back(p);
        const Hull h = convex_hull(current);
        current = h.vertices;
        area = h.area;
        areas.push_back(area);
    }
    return areas;
}

}  // namespace curio::geometry

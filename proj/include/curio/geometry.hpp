#pragma once

#include <span>
#include <vector>

namespace curio::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;

    auto operator<=>(const Point&) const = default;
};

/// > 0 when o -> a -> b turns counter-clockwise.
inline double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

struct Hull {
    std::vector<Point> vertices;  // counter-clockwise, no collinear vertices
    double area = 0.0;
};

/// Andrew's monotone chain.
Hull convex_hull(std::span<const Point> points);

/// Shoelace area of a simple polygon (positive for CCW order).
double polygon_area(std::span<const Point> polygon);

/// Hull area of every prefix points[0..i].
std::vector<double> cumulative_hull_area(std::span<const Point> points);

}  // namespace curio::geometry

#include "crashkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crashkit::geometry {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Projection project_onto_segment(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  Point q{a.x + t * dx, a.y + t * dy};
  return Projection{q, t, distance(p, q)};
}

double distance_to_segment(Point p, Point a, Point b) {
  return project_onto_segment(p, a, b).distance;
}

double signed_area(const Ring& ring) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    acc += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
  }
  return 0.5 * acc;
}

double polyline_length(std::span<const Point> line) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) total += distance(line[i], line[i + 1]);
  return total;
}

Box bounding_box(std::span<const Ring> rings) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box box{{inf, inf}, {-inf, -inf}};
  for (const auto& ring : rings) {
    for (const auto& p : ring) {
      box.min.x = std::min(box.min.x, p.x);
      box.min.y = std::min(box.min.y, p.y);
      box.max.x = std::max(box.max.x, p.x);
      box.max.y = std::max(box.max.y, p.y);
    }
  }
  return box;
}

bool on_boundary(Point p, std::span<const Ring> rings, double tolerance) {
  for (const auto& ring : rings) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      if (distance_to_segment(p, ring[i], ring[i + 1]) <= tolerance) return true;
    }
  }
  return false;
}

bool contains(std::span<const Ring> rings, Point p, double boundary_tolerance) {
  if (on_boundary(p, rings, boundary_tolerance)) return true;
  bool inside = false;
  for (const auto& ring : rings) {
    if (ring.size() < 3) continue;
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const Point& a = ring[i];
      const Point& b = ring[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
        if (p.x < x_cross) inside = !inside;
      }
    }
  }
  return inside;
}

}  // namespace crashkit::geometry

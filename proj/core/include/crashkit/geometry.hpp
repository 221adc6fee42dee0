#pragma once

#include <span>
#include <vector>

#include "crashkit/common.hpp"

namespace crashkit::geometry {

using Ring = std::vector<Point>;

struct Box {
  Point min;
  Point max;
};

struct Projection {
  Point point;          // closest point on the segment
  double t = 0.0;       // parameter in [0, 1] along a->b
  double distance = 0.0;
};

double distance(Point a, Point b);
Projection project_onto_segment(Point p, Point a, Point b);
double distance_to_segment(Point p, Point a, Point b);

/// Shoelace area; sign follows orientation.
double signed_area(const Ring& ring);

/// Arc length of a polyline.
double polyline_length(std::span<const Point> line);

Box bounding_box(std::span<const Ring> rings);

/// True if `p` lies within `tolerance` of any edge of any ring.
bool on_boundary(Point p, std::span<const Ring> rings, double tolerance);

/// Even-odd containment across all rings (holes are rings too). Points on the
/// boundary count as inside.
bool contains(std::span<const Ring> rings, Point p, double boundary_tolerance = 1e-9);

}  // namespace crashkit::geometry

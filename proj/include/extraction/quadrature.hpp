#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "extraction/errors.hpp"
#include "extraction/vec2.hpp"

namespace extraction {

/// Points and weights on a reference element: the triangle (0,0),(1,0),(0,1)
/// (weights sum to 1/2) or the segment [0,1] (points stored in x, weights sum
/// to 1).
struct QuadRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;
};

[[nodiscard]] inline QuadRule triangle_rule(int degree) {
  QuadRule q;
  auto sym3 = [&q](double a, double w) {
    q.points.push_back({a, a});
    q.points.push_back({1 - 2 * a, a});
    q.points.push_back({a, 1 - 2 * a});
    q.weights.insert(q.weights.end(), 3, 0.5 * w);
  };
  if (degree <= 1) {
    q.degree = 1;
    q.points = {{1.0 / 3, 1.0 / 3}};
    q.weights = {0.5};
  } else if (degree == 2) {
    q.degree = 2;
    sym3(1.0 / 6, 1.0 / 3);
  } else if (degree <= 4) {
    // Dunavant, 6 points
    q.degree = 4;
    sym3(0.445948490915965, 0.223381589678011);
    sym3(0.091576213509771, 0.109951743655322);
  } else if (degree == 5) {
    q.degree = 5;
    q.points.push_back({1.0 / 3, 1.0 / 3});
    q.weights.push_back(0.5 * 0.225);
    sym3(0.470142064105115, 0.132394152788506);
    sym3(0.101286507323456, 0.125939180544827);
  } else {
    throw DomainError("triangle_rule: degree " + std::to_string(degree) + " not available");
  }
  return q;
}

/// Gauss-Legendre on [0,1].
[[nodiscard]] inline QuadRule segment_rule(int degree) {
  QuadRule q;
  if (degree <= 1) {
    q = {{{0.5, 0.0}}, {1.0}, 1};
  } else if (degree <= 3) {
    const double d = 0.5 / std::sqrt(3.0);
    q = {{{0.5 - d, 0.0}, {0.5 + d, 0.0}}, {0.5, 0.5}, 3};
  } else if (degree <= 5) {
    const double d = 0.5 * std::sqrt(0.6);
    q = {{{0.5 - d, 0.0}, {0.5, 0.0}, {0.5 + d, 0.0}}, {5.0 / 18, 8.0 / 18, 5.0 / 18}, 5};
  } else {
    throw DomainError("segment_rule: degree " + std::to_string(degree) + " not available");
  }
  return q;
}

/// Quadrature points in physical coordinates with weights including the measure.
struct PhysicalRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  bool degenerate = false;

  template <class F>
  [[nodiscard]] auto integrate(F&& f) const {
    using R = decltype(f(Vec2{}));
    R acc{};
    for (std::size_t i = 0; i < points.size(); ++i) acc += weights[i] * f(points[i]);
    return acc;
  }
};

inline void append_triangle(PhysicalRule& out, const Vec2& p0, const Vec2& p1, const Vec2& p2, const QuadRule& ref) {
  const Vec2 e1 = p1 - p0, e2 = p2 - p0;
  const double jac = std::abs(cross(e1, e2));
  for (std::size_t i = 0; i < ref.points.size(); ++i) {
    out.points.push_back(p0 + ref.points[i].x * e1 + ref.points[i].y * e2);
    out.weights.push_back(ref.weights[i] * jac);
  }
}

[[nodiscard]] inline PhysicalRule triangle_physical_rule(const Vec2& p0, const Vec2& p1, const Vec2& p2, int degree) {
  PhysicalRule r;
  append_triangle(r, p0, p1, p2, triangle_rule(degree));
  return r;
}

/// Fan triangulation from the vertex average. Polygons with area below
/// 1e-14 * (bounding-box extent)^2 give an empty rule flagged degenerate.
[[nodiscard]] inline PhysicalRule polygon_rule(std::span<const Vec2> poly, int degree) {
  if (poly.size() < 3) throw DomainError("polygon_rule: need at least 3 vertices");
  PhysicalRule r;
  Vec2 c{};
  double xmin = poly[0].x, xmax = xmin, ymin = poly[0].y, ymax = ymin, area2 = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    c += poly[i];
    xmin = std::min(xmin, poly[i].x);
    xmax = std::max(xmax, poly[i].x);
    ymin = std::min(ymin, poly[i].y);
    ymax = std::max(ymax, poly[i].y);
    area2 += cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  c = c / static_cast<double>(poly.size());
  const double extent = std::max(xmax - xmin, ymax - ymin);
  if (std::abs(0.5 * area2) < 1e-14 * extent * extent) {
    r.degenerate = true;
    return r;
  }
  const QuadRule ref = triangle_rule(degree);
  for (std::size_t i = 0; i < poly.size(); ++i) append_triangle(r, c, poly[i], poly[(i + 1) % poly.size()], ref);
  return r;
}

template <class F>
[[nodiscard]] auto integrate_polygon(std::span<const Vec2> poly, F&& f, int degree, bool* degenerate = nullptr) {
  const PhysicalRule r = polygon_rule(poly, degree);
  if (degenerate) *degenerate = r.degenerate;
  return r.integrate(std::forward<F>(f));
}

[[nodiscard]] inline PhysicalRule segment_physical_rule(const Vec2& p1, const Vec2& p2, int degree) {
  const QuadRule ref = segment_rule(degree);
  const double len = norm(p2 - p1);
  PhysicalRule r;
  for (std::size_t i = 0; i < ref.points.size(); ++i) {
    r.points.push_back(p1 + ref.points[i].x * (p2 - p1));
    r.weights.push_back(ref.weights[i] * len);
  }
  return r;
}

template <class F>
[[nodiscard]] auto integrate_segment(const Vec2& p1, const Vec2& p2, F&& f, int degree) {
  if (p1 == p2) throw DomainError("integrate_segment: zero-length segment");
  return segment_physical_rule(p1, p2, degree).integrate(std::forward<F>(f));
}

}  // namespace extraction

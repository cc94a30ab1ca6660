#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "extraction/errors.hpp"
#include "extraction/mesh.hpp"
#include "extraction/vec2.hpp"

namespace extraction {

/// Level-set description of the interface: phi < 0 in the minus region,
/// phi > 0 in the plus region.
struct LevelSet {
  ScalarField phi;
  VectorField grad_phi;  ///< optional; central differences are used when empty

  [[nodiscard]] double operator()(const Vec2& x) const { return phi(x); }
  [[nodiscard]] Vec2 gradient(const Vec2& x, double step) const {
    if (grad_phi) return grad_phi(x);
    const Vec2 dx{step, 0.0}, dy{0.0, step};
    return {(phi(x + dx) - phi(x - dx)) / (2 * step), (phi(x + dy) - phi(x - dy)) / (2 * step)};
  }
};

enum class Side { Minus, Plus };
enum class TriangleTag { Minus, Plus, Interface };

struct Classification {
  double snap_tolerance = 0.0;
  std::vector<double> vertex_values;  ///< snapped, never zero
  std::vector<TriangleTag> tags;
  std::vector<bool> interface_edge;
  std::vector<int> interface_triangles;  ///< Omega_h^I
  std::vector<int> minus_triangles;      ///< Omega_h^*: fully minus triangles

  [[nodiscard]] TriangleTag tag(int t) const { return tags[static_cast<std::size_t>(t)]; }
  [[nodiscard]] Side vertex_side(int v) const {
    return vertex_values[static_cast<std::size_t>(v)] < 0.0 ? Side::Minus : Side::Plus;
  }
};

[[nodiscard]] inline double snap_tolerance(const Domain& domain) { return 1e-10 * domain.max_extent(); }

/// Tags every triangle from the signs of its snapped vertex values. Values with
/// magnitude below the snap tolerance are moved to +tolerance.
[[nodiscard]] inline Classification classify(const Mesh& mesh, const LevelSet& ls) {
  Classification c;
  c.snap_tolerance = snap_tolerance(mesh.domain);
  c.vertex_values.reserve(mesh.num_vertices());
  for (const auto& v : mesh.vertices) {
    const double f = ls(v);
    c.vertex_values.push_back(std::abs(f) < c.snap_tolerance ? c.snap_tolerance : f);
  }
  c.tags.resize(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    int negatives = 0;
    for (int v : mesh.triangles[t]) negatives += c.vertex_values[v] < 0.0 ? 1 : 0;
    if (negatives == 3) {
      c.tags[t] = TriangleTag::Minus;
      c.minus_triangles.push_back(static_cast<int>(t));
    } else if (negatives == 0) {
      c.tags[t] = TriangleTag::Plus;
    } else {
      c.tags[t] = TriangleTag::Interface;
      c.interface_triangles.push_back(static_cast<int>(t));
    }
  }
  c.interface_edge.resize(mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges[e];
    c.interface_edge[e] = (c.vertex_values[ed[0]] < 0.0) != (c.vertex_values[ed[1]] < 0.0);
  }
  return c;
}

/// Zero of the linear interpolant of (f1, f2) along v1 -> v2.
[[nodiscard]] inline Vec2 edge_intersection(const Vec2& v1, const Vec2& v2, double f1, double f2) {
  if (!(f1 * f2 < 0.0)) throw DomainError("edge_intersection: endpoint values must have opposite signs");
  const double t = f1 / (f1 - f2);
  return v1 + t * (v2 - v1);
}

/// Geometry of one interface triangle. Local vertices are relabeled so that
/// the vertex shared by both cut edges is A2; then A3 and A1 follow
/// counterclockwise. B1 = (a, 0) lies on A2A3 and B2 = (0, b) on A2A1 in
/// reference coordinates of `map`.
struct CutGeometry {
  int triangle = -1;
  std::array<int, 3> vertex{};  ///< global vertex ids of A1, A2, A3
  AffineMap map;                ///< reference -> physical for the relabeled vertices
  Vec2 b1, b2, b0;
  double a = 0.0;
  double b = 0.0;
  int edge_b1 = -1;  ///< global edge A2A3
  int edge_b2 = -1;  ///< global edge A2A1
  int edge_far = -1; ///< global edge A3A1 (not cut)
  Side apex_side = Side::Minus;  ///< side of A2
  Vec2 normal;       ///< unit normal of B1B2, minus -> plus
  double seg_length = 0.0;
  std::vector<Vec2> poly_minus;  ///< counterclockwise
  std::vector<Vec2> poly_plus;

  [[nodiscard]] const std::vector<Vec2>& poly(Side s) const { return s == Side::Minus ? poly_minus : poly_plus; }
};

[[nodiscard]] inline double polygon_area(const std::vector<Vec2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) s += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * s;
}

[[nodiscard]] inline CutGeometry cut_element(const Mesh& mesh, const Classification& cls, int t) {
  const auto& tri = mesh.triangles.at(static_cast<std::size_t>(t));
  const auto& te = mesh.tri_edges[static_cast<std::size_t>(t)];
  int cut_edges = 0;
  for (int e : te) cut_edges += cls.interface_edge[e] ? 1 : 0;
  if (cut_edges != 2) {
    throw NonSimpleCut(t, "cut_element: triangle " + std::to_string(t) + " has " + std::to_string(cut_edges) +
                              " interface edges");
  }

  // The uncut local edge is opposite the apex.
  int apex = 0;
  for (int k = 0; k < 3; ++k) {
    if (!cls.interface_edge[te[k]]) apex = k;
  }
  const int l2 = apex, l3 = (apex + 1) % 3, l1 = (apex + 2) % 3;
  CutGeometry g;
  g.triangle = t;
  g.vertex = {tri[l1], tri[l2], tri[l3]};
  const Vec2 p1 = mesh.vertices[tri[l1]], p2 = mesh.vertices[tri[l2]], p3 = mesh.vertices[tri[l3]];
  const double f1 = cls.vertex_values[tri[l1]], f2 = cls.vertex_values[tri[l2]], f3 = cls.vertex_values[tri[l3]];
  g.map = affine_map(p1, p2, p3);
  g.a = f2 / (f2 - f3);
  g.b = f2 / (f2 - f1);
  g.b1 = edge_intersection(p2, p3, f2, f3);
  g.b2 = edge_intersection(p2, p1, f2, f1);
  g.b0 = midpoint(g.b1, g.b2);
  g.edge_b1 = te[l1];  // opposite A1
  g.edge_b2 = te[l3];  // opposite A3
  g.edge_far = te[l2];
  g.apex_side = f2 < 0.0 ? Side::Minus : Side::Plus;

  const Vec2 d = g.b2 - g.b1;
  g.seg_length = norm(d);
  Vec2 n = Vec2{d.y, -d.x} / g.seg_length;
  // Points away from the apex; flip when the apex is on the plus side.
  if (dot(n, g.b0 - p2) < 0.0) n = -n;
  if (g.apex_side == Side::Plus) n = -n;
  g.normal = n;

  std::vector<Vec2> corner{p2, g.b1, g.b2};
  std::vector<Vec2> rest{g.b1, p3, p1, g.b2};
  if (g.apex_side == Side::Minus) {
    g.poly_minus = std::move(corner);
    g.poly_plus = std::move(rest);
  } else {
    g.poly_plus = std::move(corner);
    g.poly_minus = std::move(rest);
  }
  return g;
}

/// Cut geometry for every interface triangle, in classification order.
[[nodiscard]] inline std::vector<CutGeometry> cut_all(const Mesh& mesh, const Classification& cls) {
  std::vector<CutGeometry> cuts;
  cuts.reserve(cls.interface_triangles.size());
  for (int t : cls.interface_triangles) cuts.push_back(cut_element(mesh, cls, t));
  return cuts;
}

/// Detects edges crossed twice by the interface (both snapped endpoint values
/// share a sign while the level set at the midpoint has the other sign).
inline void check_resolution(const Mesh& mesh, const LevelSet& ls, const Classification& cls) {
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (cls.interface_edge[e]) continue;
    const double fa = cls.vertex_values[mesh.edges[e][0]];
    const double fm = ls(mesh.edge_midpoint(static_cast<int>(e)));
    if (std::abs(fm) > cls.snap_tolerance && (fm < 0.0) != (fa < 0.0)) {
      throw NonSimpleCut(mesh.edge_tris[e][0],
                         "interface crosses edge " + std::to_string(e) + " twice; refine the grid");
    }
  }
}

/// Total length of the polygonal interface.
[[nodiscard]] inline double interface_length(const std::vector<CutGeometry>& cuts) {
  double s = 0.0;
  for (const auto& c : cuts) s += c.seg_length;
  return s;
}

/// Side of x within triangle t according to the piecewise-linear interface.
[[nodiscard]] inline Side side_of(const Mesh& mesh, const Classification& cls, int t, const Vec2& x) {
  switch (cls.tag(t)) {
    case TriangleTag::Minus: return Side::Minus;
    case TriangleTag::Plus: return Side::Plus;
    case TriangleTag::Interface: break;
  }
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  const auto p = mesh.corners(t);
  const double area2 = cross(p[1] - p[0], p[2] - p[0]);
  const double l1 = cross(p[2] - p[1], x - p[1]) / area2;  // weight of vertex 0
  const double l2 = cross(p[0] - p[2], x - p[2]) / area2;
  const double l3 = 1.0 - l1 - l2;
  const double f = l1 * cls.vertex_values[tri[0]] + l2 * cls.vertex_values[tri[1]] + l3 * cls.vertex_values[tri[2]];
  return f < 0.0 ? Side::Minus : Side::Plus;
}

}  // namespace extraction

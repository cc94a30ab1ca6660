#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "extraction/errors.hpp"
#include "extraction/vec2.hpp"

namespace extraction {

/// Axis-aligned rectangle [xmin, xmax] x [ymin, ymax].
struct Domain {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;

  [[nodiscard]] double width() const { return xmax - xmin; }
  [[nodiscard]] double height() const { return ymax - ymin; }
  [[nodiscard]] double area() const { return width() * height(); }
  [[nodiscard]] double max_extent() const { return width() > height() ? width() : height(); }
  [[nodiscard]] bool valid() const { return xmax > xmin && ymax > ymin; }
};

/// Uniform triangulation with the edge connectivity needed by edge-based
/// (Crouzeix-Raviart) elements.
///
/// Local edge k of a triangle is the edge opposite its local vertex k, so
/// tri_edges[t][k] joins triangles[t][(k+1)%3] and triangles[t][(k+2)%3].
/// edge_tris[e][1] is -1 for boundary edges.
struct Mesh {
  Domain domain;
  int n = 0;  ///< cells per axis
  double h = 0.0;
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> tri_edges;
  std::vector<std::array<int, 2>> edge_tris;
  std::vector<bool> boundary_edge;

  [[nodiscard]] std::size_t num_vertices() const { return vertices.size(); }
  [[nodiscard]] std::size_t num_triangles() const { return triangles.size(); }
  [[nodiscard]] std::size_t num_edges() const { return edges.size(); }

  [[nodiscard]] std::array<Vec2, 3> corners(int t) const {
    const auto& tri = triangles.at(static_cast<std::size_t>(t));
    return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
  }
  [[nodiscard]] double area(int t) const {
    const auto p = corners(t);
    return 0.5 * cross(p[1] - p[0], p[2] - p[0]);
  }
  [[nodiscard]] Vec2 centroid(int t) const {
    const auto p = corners(t);
    return (p[0] + p[1] + p[2]) / 3.0;
  }
  [[nodiscard]] Vec2 edge_midpoint(int e) const {
    const auto& ed = edges.at(static_cast<std::size_t>(e));
    return midpoint(vertices[ed[0]], vertices[ed[1]]);
  }
  /// Local index (0..2) of edge e within triangle t, or -1.
  [[nodiscard]] int local_edge(int t, int e) const {
    const auto& te = tri_edges.at(static_cast<std::size_t>(t));
    for (int k = 0; k < 3; ++k) {
      if (te[k] == e) return k;
    }
    return -1;
  }
  /// Triangle containing x; points on shared edges resolve to the lower-left one.
  [[nodiscard]] int locate(const Vec2& x) const;
};

/// n x n square cells, each split along the diagonal from its bottom-right to
/// its top-left corner.
[[nodiscard]] inline Mesh build_uniform_mesh(const Domain& domain, int n) {
  if (!domain.valid()) throw DomainError("build_uniform_mesh: domain has nonpositive extent");
  if (n < 1) throw DomainError("build_uniform_mesh: need at least one cell per axis");

  Mesh m;
  m.domain = domain;
  m.n = n;
  m.h = domain.width() / n;
  const double hy = domain.height() / n;
  const int nv = n + 1;
  auto vid = [nv](int i, int j) { return j * nv + i; };

  m.vertices.reserve(static_cast<std::size_t>(nv) * nv);
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nv; ++i) {
      // Snap the last row/column onto the boundary exactly.
      const double x = i == n ? domain.xmax : domain.xmin + i * m.h;
      const double y = j == n ? domain.ymax : domain.ymin + j * hy;
      m.vertices.push_back({x, y});
    }
  }

  m.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      m.triangles.push_back({v00, v10, v01});
      m.triangles.push_back({v10, v11, v01});
    }
  }

  std::map<std::pair<int, int>, int> edge_index;
  m.tri_edges.resize(m.triangles.size());
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_index.try_emplace({a, b}, static_cast<int>(m.edges.size()));
      if (inserted) {
        m.edges.push_back({a, b});
        m.edge_tris.push_back({static_cast<int>(t), -1});
      } else {
        m.edge_tris[it->second][1] = static_cast<int>(t);
      }
      m.tri_edges[t][k] = it->second;
    }
  }
  m.boundary_edge.resize(m.edges.size());
  for (std::size_t e = 0; e < m.edges.size(); ++e) m.boundary_edge[e] = m.edge_tris[e][1] < 0;
  return m;
}

inline int Mesh::locate(const Vec2& x) const {
  const double hy = domain.height() / n;
  const double s = (x.x - domain.xmin) / h;
  const double r = (x.y - domain.ymin) / hy;
  const double eps = 1e-12;
  if (s < -eps || s > n + eps || r < -eps || r > n + eps) {
    throw DomainError("Mesh::locate: point outside the domain");
  }
  const int i = std::min(std::max(static_cast<int>(std::floor(s)), 0), n - 1);
  const int j = std::min(std::max(static_cast<int>(std::floor(r)), 0), n - 1);
  const bool lower = (s - i) + (r - j) <= 1.0;
  return 2 * (j * n + i) + (lower ? 0 : 1);
}

/// Affine map from the reference triangle A1=(0,1), A2=(0,0), A3=(1,0):
/// x = origin + jacobian * xi, with origin the image of A2.
struct AffineMap {
  Vec2 origin;
  std::array<std::array<double, 2>, 2> jacobian{};  ///< columns: A3-A2, A1-A2
  std::array<std::array<double, 2>, 2> inverse{};
  double det = 0.0;

  [[nodiscard]] Vec2 apply(const Vec2& xi) const {
    return {origin.x + jacobian[0][0] * xi.x + jacobian[0][1] * xi.y,
            origin.y + jacobian[1][0] * xi.x + jacobian[1][1] * xi.y};
  }
  [[nodiscard]] Vec2 apply_inverse(const Vec2& x) const {
    const Vec2 d = x - origin;
    return {inverse[0][0] * d.x + inverse[0][1] * d.y, inverse[1][0] * d.x + inverse[1][1] * d.y};
  }
  /// J * v for a reference-frame direction v.
  [[nodiscard]] Vec2 push_direction(const Vec2& v) const {
    return {jacobian[0][0] * v.x + jacobian[0][1] * v.y, jacobian[1][0] * v.x + jacobian[1][1] * v.y};
  }
};

/// Map sending A1, A2, A3 to p1, p2, p3.
[[nodiscard]] inline AffineMap affine_map(const Vec2& p1, const Vec2& p2, const Vec2& p3) {
  AffineMap m;
  m.origin = p2;
  const Vec2 c0 = p3 - p2, c1 = p1 - p2;
  m.jacobian = {{{c0.x, c1.x}, {c0.y, c1.y}}};
  m.det = cross(c0, c1);
  if (m.det == 0.0) throw DomainError("affine_map: degenerate triangle");
  m.inverse = {{{c1.y / m.det, -c1.x / m.det}, {-c0.y / m.det, c0.x / m.det}}};
  return m;
}

/// Local vertices (v0, v1, v2) of triangle t are the images of A2, A3, A1, so
/// the determinant is positive for counterclockwise triangles.
[[nodiscard]] inline AffineMap affine_map(const Mesh& mesh, int t) {
  if (t < 0 || static_cast<std::size_t>(t) >= mesh.num_triangles()) {
    throw AssemblyError("affine_map: triangle index out of range");
  }
  const auto p = mesh.corners(t);
  return affine_map(p[2], p[0], p[1]);
}

/// Plain-text dump: "V E T" header, then vertices, edges, triangles.
inline void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << mesh.num_vertices() << ' ' << mesh.num_edges() << ' ' << mesh.num_triangles() << '\n';
  os.precision(17);
  for (const auto& v : mesh.vertices) os << v.x << ' ' << v.y << '\n';
  for (const auto& e : mesh.edges) os << e[0] << ' ' << e[1] << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace extraction

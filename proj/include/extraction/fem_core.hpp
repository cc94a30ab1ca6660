#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "extraction/errors.hpp"
#include "extraction/linalg.hpp"
#include "extraction/mesh.hpp"
#include "extraction/quadrature.hpp"

namespace extraction {

/// Barycentric coordinates of x in triangle t (weights of its local vertices).
[[nodiscard]] inline std::array<double, 3> barycentric(const Mesh& mesh, int t, const Vec2& x) {
  const auto p = mesh.corners(t);
  const double area2 = cross(p[1] - p[0], p[2] - p[0]);
  const double l0 = cross(p[2] - p[1], x - p[1]) / area2;
  const double l1 = cross(p[0] - p[2], x - p[2]) / area2;
  return {l0, l1, 1.0 - l0 - l1};
}

/// Gradients of the barycentric coordinates (constant on the triangle).
[[nodiscard]] inline std::array<Vec2, 3> barycentric_gradients(const Mesh& mesh, int t) {
  const auto p = mesh.corners(t);
  const double area2 = cross(p[1] - p[0], p[2] - p[0]);
  std::array<Vec2, 3> g;
  for (int k = 0; k < 3; ++k) {
    const Vec2 opp = p[(k + 2) % 3] - p[(k + 1) % 3];
    g[k] = perp(opp) / area2;
  }
  return g;
}

// The CR basis function attached to local edge k (opposite vertex k) is
// 1 - 2 lambda_k: one at the midpoint of edge k, zero at the other two.

[[nodiscard]] inline std::array<double, 3> cr_values(const Mesh& mesh, int t, const Vec2& x) {
  const auto l = barycentric(mesh, t, x);
  return {1 - 2 * l[0], 1 - 2 * l[1], 1 - 2 * l[2]};
}

[[nodiscard]] inline std::array<Vec2, 3> cr_gradients(const Mesh& mesh, int t) {
  auto g = barycentric_gradients(mesh, t);
  for (auto& v : g) v *= -2.0;
  return g;
}

/// 3x3 CR stiffness on triangle t: area * grad phi_i . grad phi_j.
[[nodiscard]] inline std::array<std::array<double, 3>, 3> cr_element_stiffness(const Mesh& mesh, int t) {
  const auto g = cr_gradients(mesh, t);
  const double area = mesh.area(t);
  std::array<std::array<double, 3>, 3> k{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k[i][j] = area * dot(g[i], g[j]);
  return k;
}

/// Crouzeix-Raviart space: one unknown per edge (the midpoint value). Boundary
/// edges carry homogeneous Dirichlet data and get no dof.
struct CRSpace {
  std::vector<int> dof_of_edge;  ///< -1 on boundary edges
  std::vector<int> edge_of_dof;

  CRSpace() = default;
  explicit CRSpace(const Mesh& mesh) : dof_of_edge(mesh.num_edges(), -1) {
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
      if (!mesh.boundary_edge[e]) {
        dof_of_edge[e] = static_cast<int>(edge_of_dof.size());
        edge_of_dof.push_back(static_cast<int>(e));
      }
    }
  }
  [[nodiscard]] int num_edges() const { return static_cast<int>(dof_of_edge.size()); }
  [[nodiscard]] int num_dofs() const { return static_cast<int>(edge_of_dof.size()); }
  [[nodiscard]] bool is_dirichlet(int e) const { return dof_of_edge[static_cast<std::size_t>(e)] < 0; }
  /// Index of (edge, component) in a velocity vector [u1 dofs, u2 dofs]; -1 on the boundary.
  [[nodiscard]] int velocity_dof(int e, int component) const {
    const int d = dof_of_edge[static_cast<std::size_t>(e)];
    return d < 0 ? -1 : d + component * num_dofs();
  }
};

struct P0Space {
  int num_triangles = 0;
  explicit P0Space(const Mesh& mesh) : num_triangles(static_cast<int>(mesh.num_triangles())) {}
  [[nodiscard]] int num_dofs() const { return num_triangles; }
};

/// CR stiffness restricted to a set of triangles, numbered by the edges of the region.
struct RegionOperator {
  SparseMatrix matrix;
  std::vector<int> edges;          ///< local index -> global edge
  std::vector<int> local_of_edge;  ///< global edge -> local index or -1
};

[[nodiscard]] inline RegionOperator assemble_cr_laplace(const Mesh& mesh, std::span<const int> region) {
  if (region.empty()) throw DomainError("assemble_cr_laplace: empty region");
  RegionOperator op;
  op.local_of_edge.assign(mesh.num_edges(), -1);
  for (int t : region) {
    if (t < 0 || static_cast<std::size_t>(t) >= mesh.num_triangles()) {
      throw AssemblyError("assemble_cr_laplace: triangle index out of range");
    }
    for (int e : mesh.tri_edges[t]) {
      if (op.local_of_edge[e] < 0) {
        op.local_of_edge[e] = static_cast<int>(op.edges.size());
        op.edges.push_back(e);
      }
    }
  }
  std::vector<Triplet> trip;
  trip.reserve(region.size() * 9);
  for (int t : region) {
    const auto k = cr_element_stiffness(mesh, t);
    const auto& te = mesh.tri_edges[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.push_back({op.local_of_edge[te[i]], op.local_of_edge[te[j]], k[i][j]});
  }
  const int n = static_cast<int>(op.edges.size());
  op.matrix = build_from_triplets(trip, n, n);
  return op;
}

/// mu * broken vector Laplacian on interior dofs, blocks [u1, u2].
[[nodiscard]] inline SparseMatrix assemble_velocity_stiffness(const Mesh& mesh, const CRSpace& space, double mu) {
  if (!(mu > 0.0)) throw DomainError("assemble_velocity_stiffness: viscosity must be positive");
  std::vector<Triplet> trip;
  trip.reserve(mesh.num_triangles() * 18);
  for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
    const auto k = cr_element_stiffness(mesh, t);
    const auto& te = mesh.tri_edges[t];
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 3; ++i) {
        const int row = space.velocity_dof(te[i], c);
        if (row < 0) continue;
        for (int j = 0; j < 3; ++j) {
          const int col = space.velocity_dof(te[j], c);
          if (col >= 0) trip.push_back({row, col, mu * k[i][j]});
        }
      }
    }
  }
  const int n = 2 * space.num_dofs();
  return build_from_triplets(trip, n, n);
}

/// B[t, v] = -integral over t of div(v) for each velocity basis function v.
[[nodiscard]] inline SparseMatrix assemble_divergence(const Mesh& mesh, const CRSpace& space) {
  std::vector<Triplet> trip;
  trip.reserve(mesh.num_triangles() * 6);
  for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
    const auto g = cr_gradients(mesh, t);
    const double area = mesh.area(t);
    const auto& te = mesh.tri_edges[t];
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 3; ++i) {
        const int col = space.velocity_dof(te[i], c);
        if (col >= 0) trip.push_back({t, col, -area * (c == 0 ? g[i].x : g[i].y)});
      }
    }
  }
  return build_from_triplets(trip, static_cast<int>(mesh.num_triangles()), 2 * space.num_dofs());
}

/// Per-edge velocity values (midpoint values of both components).
struct EdgeVelocity {
  Vector u1;
  Vector u2;
};

[[nodiscard]] inline EdgeVelocity interpolate_cr(const Mesh& mesh, const VectorField& u) {
  EdgeVelocity v{Vector(mesh.num_edges()), Vector(mesh.num_edges())};
  for (int e = 0; e < static_cast<int>(mesh.num_edges()); ++e) {
    const Vec2 val = u(mesh.edge_midpoint(e));
    v.u1[e] = val.x;
    v.u2[e] = val.y;
  }
  return v;
}

[[nodiscard]] inline Vector to_dofs(const CRSpace& space, const EdgeVelocity& v) {
  Vector x(2 * static_cast<std::size_t>(space.num_dofs()));
  for (int d = 0; d < space.num_dofs(); ++d) {
    x[d] = v.u1[space.edge_of_dof[d]];
    x[d + space.num_dofs()] = v.u2[space.edge_of_dof[d]];
  }
  return x;
}

/// Expands a dof vector; boundary edges take the given values (zero by default).
[[nodiscard]] inline EdgeVelocity from_dofs(const CRSpace& space, std::span<const double> x,
                                            const EdgeVelocity* boundary = nullptr) {
  EdgeVelocity v{Vector(space.dof_of_edge.size(), 0.0), Vector(space.dof_of_edge.size(), 0.0)};
  for (int e = 0; e < space.num_edges(); ++e) {
    const int d = space.dof_of_edge[e];
    if (d >= 0) {
      v.u1[e] = x[d];
      v.u2[e] = x[d + space.num_dofs()];
    } else if (boundary) {
      v.u1[e] = boundary->u1[e];
      v.u2[e] = boundary->u2[e];
    }
  }
  return v;
}

/// Right-hand-side corrections for nonhomogeneous Dirichlet data on boundary
/// edges: f -= A_IB u_B, g -= B_B u_B.
struct DirichletLift {
  Vector momentum;
  Vector continuity;
};

[[nodiscard]] inline DirichletLift dirichlet_lift(const Mesh& mesh, const CRSpace& space, double mu,
                                                  const EdgeVelocity& boundary) {
  DirichletLift lift{Vector(2 * static_cast<std::size_t>(space.num_dofs()), 0.0), Vector(mesh.num_triangles(), 0.0)};
  for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
    const auto k = cr_element_stiffness(mesh, t);
    const auto g = cr_gradients(mesh, t);
    const double area = mesh.area(t);
    const auto& te = mesh.tri_edges[t];
    for (int j = 0; j < 3; ++j) {
      if (!space.is_dirichlet(te[j])) continue;
      const double ub[2] = {boundary.u1[te[j]], boundary.u2[te[j]]};
      for (int c = 0; c < 2; ++c) {
        lift.continuity[t] += area * (c == 0 ? g[j].x : g[j].y) * ub[c];
        for (int i = 0; i < 3; ++i) {
          const int row = space.velocity_dof(te[i], c);
          if (row >= 0) lift.momentum[row] -= mu * k[i][j] * ub[c];
        }
      }
    }
  }
  return lift;
}

/// Value of a CR vector field at x inside triangle t.
[[nodiscard]] inline Vec2 eval_cr(const Mesh& mesh, const EdgeVelocity& v, int t, const Vec2& x) {
  const auto phi = cr_values(mesh, t, x);
  const auto& te = mesh.tri_edges[t];
  Vec2 r{};
  for (int k = 0; k < 3; ++k) r += phi[k] * Vec2{v.u1[te[k]], v.u2[te[k]]};
  return r;
}

}  // namespace extraction

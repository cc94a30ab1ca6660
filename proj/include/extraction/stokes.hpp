#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "extraction/errors.hpp"
#include "extraction/fem_core.hpp"
#include "extraction/interface_geometry.hpp"
#include "extraction/linalg.hpp"
#include "extraction/mesh.hpp"
#include "extraction/quadrature.hpp"
#include "extraction/singular_field.hpp"

namespace extraction {

/// Body force, possibly different on the two sides. An empty `plus` means
/// `minus` is used everywhere and no cut-cell splitting is done.
struct BodyForce {
  VectorField minus;
  VectorField plus;

  [[nodiscard]] bool split() const { return static_cast<bool>(plus); }
  [[nodiscard]] Vec2 operator()(const Vec2& x, Side side) const {
    if (!minus) return {};
    return side == Side::Plus && plus ? plus(x) : minus(x);
  }
};

/// -mu Lap u + grad p = g with u = 0 on the boundary and prescribed pressure
/// jumps across the zero level set.
struct ProblemSpec {
  Domain domain;
  LevelSet level_set;
  double mu = 1.0;
  BodyForce g;
  JumpData jumps;
  VectorField exact_u;
  ScalarField exact_p_minus;
  ScalarField exact_p_plus;

  [[nodiscard]] double exact_p(const Vec2& x, Side side) const {
    return side == Side::Minus ? exact_p_minus(x) : exact_p_plus(x);
  }
};

/// Mesh plus everything derived from the level set on it.
struct Discretization {
  Mesh mesh;
  Classification cls;
  std::vector<CutGeometry> cuts;
  std::vector<int> cut_of_triangle;  ///< index into cuts or -1
  CRSpace space;

  [[nodiscard]] const CutGeometry* cut(int t) const {
    const int c = cut_of_triangle[static_cast<std::size_t>(t)];
    return c < 0 ? nullptr : &cuts[static_cast<std::size_t>(c)];
  }
};

[[nodiscard]] inline Discretization discretize(const Domain& domain, const LevelSet& ls, int n) {
  Discretization d;
  d.mesh = build_uniform_mesh(domain, n);
  d.cls = classify(d.mesh, ls);
  check_resolution(d.mesh, ls, d.cls);
  d.cuts = cut_all(d.mesh, d.cls);
  d.cut_of_triangle.assign(d.mesh.num_triangles(), -1);
  for (std::size_t c = 0; c < d.cuts.size(); ++c) d.cut_of_triangle[d.cuts[c].triangle] = static_cast<int>(c);
  d.space = CRSpace(d.mesh);
  return d;
}

namespace detail {

inline void add_edge_integral(Vector& out, const Mesh& mesh, const CRSpace& space, int t, const Vec2& p1,
                              const Vec2& p2, const LinearPiece& psi, const Vec2& normal, double scale) {
  if (norm(p2 - p1) == 0.0) return;
  const auto rule = segment_physical_rule(p1, p2, 2);
  const auto& te = mesh.tri_edges[t];
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto phi = cr_values(mesh, t, rule.points[q]);
    const double wp = scale * rule.weights[q] * psi(rule.points[q]);
    for (int k = 0; k < 3; ++k) {
      for (int c = 0; c < 2; ++c) {
        const int dof = space.velocity_dof(te[k], c);
        if (dof >= 0) out[dof] += wp * phi[k] * (c == 0 ? normal.x : normal.y);
      }
    }
  }
}

/// Unit normal of edge p-q pointing away from `inside`.
[[nodiscard]] inline Vec2 outward_normal(const Vec2& p, const Vec2& q, const Vec2& inside) {
  const Vec2 d = q - p;
  Vec2 n = Vec2{d.y, -d.x} / norm(d);
  return dot(n, inside - p) > 0.0 ? -n : n;
}

}  // namespace detail

/// Load vector of the jump functional
///   J(v) = -sum_seg int [p*] v.n_seg - sum_T int_{interface edges of T} p*|_T v.n_T
/// with n_seg the minus -> plus normal of each interface segment and n_T the
/// outward normal of T. Together with -b_h(v, p*) this equals minus the
/// piecewise integral of grad p* . v, so a constant p* contributes nothing.
/// On each interface edge only the minus part carries a nonzero trace.
[[nodiscard]] inline Vector assemble_jump_functional(const Mesh& mesh, std::span<const CutGeometry> cuts,
                                                     const SingularField& p_star, const CRSpace& space) {
  Vector out(2 * static_cast<std::size_t>(space.num_dofs()), 0.0);
  for (const auto& cut : cuts) {
    const int t = cut.triangle;
    const LinearPiece& psi = p_star.minus_piece[t];
    detail::add_edge_integral(out, mesh, space, t, cut.b1, cut.b2, psi, cut.normal, -1.0);

    const Vec2 a1 = mesh.vertices[cut.vertex[0]], a2 = mesh.vertices[cut.vertex[1]], a3 = mesh.vertices[cut.vertex[2]];
    const Vec2 n_b1 = detail::outward_normal(a2, a3, a1);  // edge A2A3
    const Vec2 n_b2 = detail::outward_normal(a2, a1, a3);  // edge A2A1
    if (cut.apex_side == Side::Minus) {
      detail::add_edge_integral(out, mesh, space, t, a2, cut.b1, psi, n_b1, -1.0);
      detail::add_edge_integral(out, mesh, space, t, a2, cut.b2, psi, n_b2, -1.0);
    } else {
      detail::add_edge_integral(out, mesh, space, t, cut.b1, a3, psi, n_b1, -1.0);
      detail::add_edge_integral(out, mesh, space, t, cut.b2, a1, psi, n_b2, -1.0);
    }
  }
  return out;
}

struct StokesSystem {
  SparseMatrix a;  ///< velocity stiffness
  SparseMatrix b;  ///< divergence
  Vector f;
  Vector g;
};

/// (g, v) - b_h(v, p*) + J(v, p*) and a zero continuity right-hand side.
[[nodiscard]] inline std::pair<Vector, Vector> assemble_rhs(const ProblemSpec& spec, const Discretization& d,
                                                            const SingularField& p_star) {
  const Mesh& mesh = d.mesh;
  const CRSpace& space = d.space;
  Vector f(2 * static_cast<std::size_t>(space.num_dofs()), 0.0);

  auto add_load = [&](int t, const PhysicalRule& rule, Side side) {
    const auto& te = mesh.tri_edges[t];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 gv = spec.g(rule.points[q], side);
      const auto phi = cr_values(mesh, t, rule.points[q]);
      for (int k = 0; k < 3; ++k) {
        const int d0 = space.velocity_dof(te[k], 0), d1 = space.velocity_dof(te[k], 1);
        if (d0 >= 0) f[d0] += rule.weights[q] * gv.x * phi[k];
        if (d1 >= 0) f[d1] += rule.weights[q] * gv.y * phi[k];
      }
    }
  };

  for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
    const auto p = mesh.corners(t);
    const TriangleTag tag = d.cls.tag(t);
    if (tag == TriangleTag::Interface && spec.g.split()) {
      const CutGeometry& cut = *d.cut(t);
      add_load(t, polygon_rule(cut.poly_minus, 2), Side::Minus);
      add_load(t, polygon_rule(cut.poly_plus, 2), Side::Plus);
    } else {
      add_load(t, triangle_physical_rule(p[0], p[1], p[2], 2), tag == TriangleTag::Plus ? Side::Plus : Side::Minus);
    }

    // -b_h(v, p*) = sum_T int_T p* div v, with div v constant on T.
    double mass = 0.0;
    if (tag == TriangleTag::Minus) {
      mass = mesh.area(t) * p_star.minus_piece[t](mesh.centroid(t));
    } else if (tag == TriangleTag::Interface) {
      const LinearPiece& psi = p_star.minus_piece[t];
      mass = polygon_rule(d.cut(t)->poly_minus, 1).integrate([&](const Vec2& x) { return psi(x); });
    }
    if (tag != TriangleTag::Plus) {
      const auto grad = cr_gradients(mesh, t);
      const auto& te = mesh.tri_edges[t];
      for (int k = 0; k < 3; ++k) {
        const int d0 = space.velocity_dof(te[k], 0), d1 = space.velocity_dof(te[k], 1);
        if (d0 >= 0) f[d0] += mass * grad[k].x;
        if (d1 >= 0) f[d1] += mass * grad[k].y;
      }
    }
  }

  const Vector jf = assemble_jump_functional(mesh, d.cuts, p_star, space);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] += jf[i];
  return {std::move(f), Vector(mesh.num_triangles(), 0.0)};
}

[[nodiscard]] inline StokesSystem assemble_system(const ProblemSpec& spec, const Discretization& d,
                                                  const SingularField& p_star) {
  StokesSystem s;
  s.a = assemble_velocity_stiffness(d.mesh, d.space, spec.mu);
  s.b = assemble_divergence(d.mesh, d.space);
  std::tie(s.f, s.g) = assemble_rhs(spec, d, p_star);
  return s;
}

/// Standard CR/P0 Stokes system with a single smooth body force and no interface.
[[nodiscard]] inline StokesSystem assemble_plain_stokes(const Mesh& mesh, const CRSpace& space, double mu,
                                                        const VectorField& g) {
  StokesSystem s;
  s.a = assemble_velocity_stiffness(mesh, space, mu);
  s.b = assemble_divergence(mesh, space);
  s.f.assign(2 * static_cast<std::size_t>(space.num_dofs()), 0.0);
  s.g.assign(mesh.num_triangles(), 0.0);
  for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
    const auto p = mesh.corners(t);
    const auto rule = triangle_physical_rule(p[0], p[1], p[2], 2);
    const auto& te = mesh.tri_edges[t];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 gv = g(rule.points[q]);
      const auto phi = cr_values(mesh, t, rule.points[q]);
      for (int k = 0; k < 3; ++k) {
        const int d0 = space.velocity_dof(te[k], 0), d1 = space.velocity_dof(te[k], 1);
        if (d0 >= 0) s.f[d0] += rule.weights[q] * gv.x * phi[k];
        if (d1 >= 0) s.f[d1] += rule.weights[q] * gv.y * phi[k];
      }
    }
  }
  return s;
}

struct SolveOptions {
  double saddle_tol = 1e-8;
  double extension_tol = 1e-12;
};

struct StokesSolution {
  Discretization disc;
  EdgeVelocity u;   ///< midpoint values per edge, zero on the boundary
  Vector p0;        ///< regular pressure per triangle, zero mean
  SingularField p_star;
  SolveReport report;
  double divergence_residual = 0.0;  ///< ||B u||_inf

  /// Total discrete pressure p0 + p* at x in triangle t.
  [[nodiscard]] double pressure(int t, const Vec2& x, Side side) const {
    return p0[static_cast<std::size_t>(t)] + p_star.trace(t, x, side);
  }
};

[[nodiscard]] inline StokesSolution solve(const ProblemSpec& spec, int n, const SolveOptions& opt = {}) {
  if (n < 4) throw DomainError("solve: need at least 4 cells per axis to resolve the interface");
  StokesSolution sol;
  sol.disc = discretize(spec.domain, spec.level_set, n);
  const Discretization& d = sol.disc;
  sol.p_star = build_singular_field(d.mesh, d.cls, d.cuts, spec.jumps, ExtensionOptions{opt.extension_tol});
  const StokesSystem sys = assemble_system(spec, d, sol.p_star);

  SaddleOptions sopt;
  sopt.tol = opt.saddle_tol;
  sopt.pressure_weights.resize(d.mesh.num_triangles());
  for (int t = 0; t < static_cast<int>(d.mesh.num_triangles()); ++t) sopt.pressure_weights[t] = d.mesh.area(t);
  SaddleSolution s = solve_saddle(sys.a, sys.b, sys.f, sys.g, sopt);

  sol.u = from_dofs(d.space, s.u);
  sol.p0 = std::move(s.p);
  sol.report = s.report;
  sol.divergence_residual = norm_inf(sys.b * s.u);
  return sol;
}

struct L2Errors {
  double pressure = 0.0;
  double velocity = 0.0;
};

/// Side-resolved quadrature pieces covering the domain: whole triangles away
/// from the interface, the two cut polygons on interface triangles.
template <class F>
void for_each_piece(const Discretization& d, int degree, F&& f) {
  const Mesh& mesh = d.mesh;
  for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
    switch (d.cls.tag(t)) {
      case TriangleTag::Interface: {
        const CutGeometry& cut = *d.cut(t);
        f(t, polygon_rule(cut.poly_minus, degree), Side::Minus);
        f(t, polygon_rule(cut.poly_plus, degree), Side::Plus);
        break;
      }
      case TriangleTag::Minus:
      case TriangleTag::Plus: {
        const auto p = mesh.corners(t);
        f(t, triangle_physical_rule(p[0], p[1], p[2], degree),
          d.cls.tag(t) == TriangleTag::Minus ? Side::Minus : Side::Plus);
        break;
      }
    }
  }
}

/// L2 errors of velocity and total pressure; both pressures are shifted to
/// zero mean before comparison.
[[nodiscard]] inline L2Errors l2_errors(const StokesSolution& sol, const ProblemSpec& spec) {
  if (!spec.exact_u || !spec.exact_p_minus || !spec.exact_p_plus) {
    throw DomainError("l2_errors: exact velocity and pressure are required");
  }
  const Discretization& d = sol.disc;
  const Mesh& mesh = d.mesh;
  constexpr int degree = 4;

  double eu = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.num_triangles()); ++t) {
    const auto p = mesh.corners(t);
    eu += triangle_physical_rule(p[0], p[1], p[2], degree).integrate([&](const Vec2& x) {
      const Vec2 e = spec.exact_u(x) - eval_cr(mesh, sol.u, t, x);
      return dot(e, e);
    });
  }

  double int_exact = 0.0, int_h = 0.0, area = 0.0;
  for_each_piece(d, degree, [&](int t, const PhysicalRule& r, Side side) {
    for (std::size_t q = 0; q < r.points.size(); ++q) {
      int_exact += r.weights[q] * spec.exact_p(r.points[q], side);
      int_h += r.weights[q] * sol.pressure(t, r.points[q], side);
      area += r.weights[q];
    }
  });
  const double mean_exact = int_exact / area, mean_h = int_h / area;
  double ep = 0.0;
  for_each_piece(d, degree, [&](int t, const PhysicalRule& r, Side side) {
    for (std::size_t q = 0; q < r.points.size(); ++q) {
      const double e = (spec.exact_p(r.points[q], side) - mean_exact) - (sol.pressure(t, r.points[q], side) - mean_h);
      ep += r.weights[q] * e * e;
    }
  });
  return {std::sqrt(ep), std::sqrt(eu)};
}

/// "x,y,u1,u2,p_total" sampled on an (nx+1) x (ny+1) grid.
inline void write_fields_csv(std::ostream& os, const StokesSolution& sol, int nx, int ny) {
  const Mesh& mesh = sol.disc.mesh;
  const Domain& d = mesh.domain;
  os << "x,y,u1,u2,p_total\n";
  os.precision(10);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const Vec2 x{d.xmin + d.width() * i / nx, d.ymin + d.height() * j / ny};
      const int t = mesh.locate(x);
      const Vec2 u = eval_cr(mesh, sol.u, t, x);
      os << x.x << ',' << x.y << ',' << u.x << ',' << u.y << ','
         << sol.pressure(t, x, side_of(mesh, sol.disc.cls, t, x)) << '\n';
    }
  }
}

}  // namespace extraction

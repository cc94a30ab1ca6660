#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "extraction/harness.hpp"
#include "extraction/stokes.hpp"
#include "oracles.hpp"

using namespace extraction;

namespace {

/// Sum over the velocity dofs of basis contributions c * |T| * grad(phi_k) for
/// the given per-triangle areas (the piecewise integral of grad of a constant).
Vector constant_gradient_load(const Mesh& mesh, const CRSpace& space, int t, double c, double area) {
  Vector out(2 * static_cast<std::size_t>(space.num_dofs()), 0.0);
  const auto g = cr_gradients(mesh, t);
  for (int k = 0; k < 3; ++k) {
    const int d0 = space.velocity_dof(mesh.tri_edges[t][k], 0), d1 = space.velocity_dof(mesh.tri_edges[t][k], 1);
    if (d0 >= 0) out[d0] += c * area * g[k].x;
    if (d1 >= 0) out[d1] += c * area * g[k].y;
  }
  return out;
}

ProblemSpec zero_jump_spec() {
  ProblemSpec s = example_constant_jump().spec;
  s.jumps = {};
  s.exact_p_minus = s.exact_p_plus;
  return s;
}

}  // namespace

TEST(JumpFunctional, ZeroField) {
  const auto ex = example_nonconstant_jump();
  const Discretization d = discretize(ex.spec.domain, ex.spec.level_set, 16);
  const SingularField z = SingularField::zero(d.mesh, d.cls);
  const Vector j = assemble_jump_functional(d.mesh, d.cuts, z, d.space);
  EXPECT_EQ(norm_inf(j), 0.0);
}

TEST(JumpFunctional, SegmentTermAgainstAnalyticMoment) {
  // A linear CR basis restricted to a segment integrates to length times its
  // midpoint value.
  const auto ex = example_constant_jump();
  const Discretization d = discretize(ex.spec.domain, ex.spec.level_set, 8);
  const CutGeometry& c = d.cuts.front();
  Vector out(2 * static_cast<std::size_t>(d.space.num_dofs()), 0.0);
  const LinearPiece psi{c.b0, 3.0, {}};
  detail::add_edge_integral(out, d.mesh, d.space, c.triangle, c.b1, c.b2, psi, c.normal, -1.0);
  const auto phi = cr_values(d.mesh, c.triangle, midpoint(c.b1, c.b2));
  for (int k = 0; k < 3; ++k) {
    for (int comp = 0; comp < 2; ++comp) {
      const int dof = d.space.velocity_dof(d.mesh.tri_edges[c.triangle][k], comp);
      if (dof < 0) continue;
      const double expected = -3.0 * c.seg_length * phi[k] * (comp == 0 ? c.normal.x : c.normal.y);
      EXPECT_NEAR(out[dof], expected, 1e-14);
    }
  }
}

TEST(JumpFunctional, ConstantPieceIsBoundaryOfMinusPolygon) {
  // For psi = c on one interface triangle, the segment plus edge terms are
  // -c times the boundary integral of phi_k n over T-, i.e. -c |T-| grad phi_k.
  const auto ex = example_nonconstant_jump();
  const Discretization d = discretize(ex.spec.domain, ex.spec.level_set, 16);
  for (const auto& c : d.cuts) {
    SingularField f = SingularField::zero(d.mesh, d.cls);
    f.minus_piece[c.triangle] = {c.b0, 1.7, {}};
    const Vector j = assemble_jump_functional(d.mesh, std::span(&c, 1), f, d.space);
    Vector ref = constant_gradient_load(d.mesh, d.space, c.triangle, -1.7, polygon_area(c.poly_minus));
    if (c.apex_side == Side::Plus) {
      // The far edge A3A1 bounds T- but is not an interface edge.
      const Vec2 a1 = d.mesh.vertices[c.vertex[0]], a3 = d.mesh.vertices[c.vertex[2]];
      const Vec2 n = detail::outward_normal(a3, a1, d.mesh.vertices[c.vertex[1]]);
      for (int comp = 0; comp < 2; ++comp) {
        const int dof = d.space.velocity_dof(c.edge_far, comp);
        if (dof >= 0) ref[dof] += 1.7 * norm(a1 - a3) * (comp == 0 ? n.x : n.y);
      }
    }
    for (std::size_t i = 0; i < j.size(); ++i) EXPECT_NEAR(j[i], ref[i], 1e-13);
  }
}

TEST(JumpFunctional, SharedInterfaceEdgesCancel) {
  // With p* = c on all of the minus region, the divergence term and the jump
  // functional cancel for every test function.
  const auto ex = example_constant_jump();
  for (int n : {8, 16, 32}) {
    const Discretization d = discretize(ex.spec.domain, ex.spec.level_set, n);
    ProblemSpec s = ex.spec;
    s.g.minus = [](const Vec2&) { return Vec2{}; };
    const SingularField f = build_singular_field(d.mesh, d.cls, d.cuts, s.jumps);
    const auto [rhs, g] = assemble_rhs(s, d, f);
    EXPECT_LT(norm_inf(rhs), 1e-9) << n;
    EXPECT_EQ(norm_inf(g), 0.0);
  }
}

TEST(Rhs, ZeroData) {
  const auto ex = example_nonconstant_jump();
  const Discretization d = discretize(ex.spec.domain, ex.spec.level_set, 8);
  ProblemSpec s = ex.spec;
  s.g = {[](const Vec2&) { return Vec2{}; }, {}};
  s.jumps = {};
  const auto [f, g] = assemble_rhs(s, d, SingularField::zero(d.mesh, d.cls));
  EXPECT_EQ(norm_inf(f), 0.0);
}

TEST(Rhs, ConstantPStarOnOneMinusTriangle) {
  const auto ex = example_nonconstant_jump();
  const Discretization d = discretize(ex.spec.domain, ex.spec.level_set, 8);
  ProblemSpec s = ex.spec;
  s.g = {[](const Vec2&) { return Vec2{}; }, {}};
  ASSERT_FALSE(d.cls.minus_triangles.empty());
  const int t = d.cls.minus_triangles.front();
  SingularField f = SingularField::zero(d.mesh, d.cls);
  f.minus_piece[t] = {d.mesh.centroid(t), 4.0, {}};
  const auto [rhs, g] = assemble_rhs(s, d, f);
  const SparseMatrix b = assemble_divergence(d.mesh, d.space);
  const Vector row = b.multiply_transpose([&] {
    Vector e(b.rows(), 0.0);
    e[t] = 1.0;
    return e;
  }());
  for (std::size_t i = 0; i < rhs.size(); ++i) EXPECT_NEAR(rhs[i], -4.0 * row[i], 1e-14);
}

namespace {

/// Right-hand side rebuilt with composite refined quadrature on each side
/// polygon (fanned from its first vertex) plus the library jump functional.
Vector refined_rhs(const ProblemSpec& spec, const Discretization& d, const SingularField& ps) {
  Vector ref = assemble_jump_functional(d.mesh, d.cuts, ps, d.space);
  auto add = [&](int t, const std::vector<Vec2>& poly, Side side, bool with_p_star) {
    const auto grad = cr_gradients(d.mesh, t);
    for (int k = 0; k < 3; ++k) {
      for (int comp = 0; comp < 2; ++comp) {
        const int dof = d.space.velocity_dof(d.mesh.tri_edges[t][k], comp);
        if (dof < 0) continue;
        const auto integrand = [&](oracle::Pt q) {
          const Vec2 x{q.x, q.y};
          const Vec2 gv = spec.g(x, side);
          double v = (comp == 0 ? gv.x : gv.y) * cr_values(d.mesh, t, x)[k];
          if (with_p_star) v += ps.minus_piece[t](x) * (comp == 0 ? grad[k].x : grad[k].y);
          return v;
        };
        for (std::size_t i = 1; i + 1 < poly.size(); ++i)
          ref[dof] += oracle::refined_triangle_integral({poly[0].x, poly[0].y}, {poly[i].x, poly[i].y},
                                                        {poly[i + 1].x, poly[i + 1].y}, integrand, 10);
      }
    }
  };
  for (int t = 0; t < static_cast<int>(d.mesh.num_triangles()); ++t) {
    const auto c = d.mesh.corners(t);
    switch (d.cls.tag(t)) {
      case TriangleTag::Interface:
        add(t, d.cut(t)->poly_minus, Side::Minus, true);
        add(t, d.cut(t)->poly_plus, Side::Plus, false);
        break;
      case TriangleTag::Minus: add(t, {c[0], c[1], c[2]}, Side::Minus, true); break;
      case TriangleTag::Plus: add(t, {c[0], c[1], c[2]}, Side::Plus, false); break;
    }
  }
  return ref;
}

double relative_difference(const Vector& f, const Vector& ref) {
  Vector diff(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) diff[i] = f[i] - ref[i];
  return norm2(diff) / norm2(ref);
}

}  // namespace

TEST(Rhs, PiecewiseLinearForceAgainstRefinedQuadrature) {
  // Degree-2 rules are exact here, so the assembly must match to rounding.
  ProblemSpec s = example_nonconstant_jump().spec;
  s.g = {[](const Vec2& x) { return Vec2{1 + 2 * x.x - x.y, 3 * x.y}; },
         [](const Vec2& x) { return Vec2{-x.x, 0.5 + x.x + x.y}; }};
  const Discretization d = discretize(s.domain, s.level_set, 8);
  const SingularField ps = build_singular_field(d.mesh, d.cls, d.cuts, s.jumps);
  const auto [f, g] = assemble_rhs(s, d, ps);
  EXPECT_LT(relative_difference(f, refined_rhs(s, d, ps)), 1e-12);
}

TEST(Rhs, SecondExampleAgainstRefinedQuadrature) {
  // Limited by the degree-2 load quadrature on an 8x8 grid.
  const auto ex = example_nonconstant_jump();
  const Discretization d = discretize(ex.spec.domain, ex.spec.level_set, 8);
  const SingularField ps = build_singular_field(d.mesh, d.cls, d.cuts, ex.spec.jumps);
  const auto [f, g] = assemble_rhs(ex.spec, d, ps);
  EXPECT_LT(relative_difference(f, refined_rhs(ex.spec, d, ps)), 1e-2);
  const Discretization fine = discretize(ex.spec.domain, ex.spec.level_set, 32);
  const SingularField pf = build_singular_field(fine.mesh, fine.cls, fine.cuts, ex.spec.jumps);
  const auto [ff, gf] = assemble_rhs(ex.spec, fine, pf);
  EXPECT_LT(relative_difference(ff, refined_rhs(ex.spec, fine, pf)),
            0.2 * relative_difference(f, refined_rhs(ex.spec, d, ps)));
}


TEST(ZeroJump, MatchesPlainAssembly) {
  const ProblemSpec s = zero_jump_spec();
  const Discretization d = discretize(s.domain, s.level_set, 16);
  const SingularField ps = build_singular_field(d.mesh, d.cls, d.cuts, s.jumps);
  const StokesSystem sys = assemble_system(s, d, ps);
  const StokesSystem plain = assemble_plain_stokes(d.mesh, d.space, s.mu, s.g.minus);
  EXPECT_TRUE(sys.a == plain.a);
  EXPECT_TRUE(sys.b == plain.b);
  ASSERT_EQ(sys.f.size(), plain.f.size());
  for (std::size_t i = 0; i < sys.f.size(); ++i) EXPECT_LE(std::abs(sys.f[i] - plain.f[i]), 1e-14);
  EXPECT_EQ(sys.g, plain.g);
}

TEST(Solve, GradientForceVelocityVanishesAtSecondOrder) {
  // CR/P0 is not pressure robust: u_h is O(h^2) rather than zero.
  ProblemSpec s = example_nonconstant_jump().spec;
  s.jumps = {};
  s.g = {[](const Vec2& x) { return Vec2{std::cos(x.x) * x.y, std::sin(x.x)}; }, {}};  // grad(y sin x)
  s.exact_p_minus = s.exact_p_plus = [](const Vec2& x) { return x.y * std::sin(x.x); };
  double prev_p = 0.0, prev_u = 0.0;
  for (int n : {16, 32, 64}) {
    const StokesSolution sol = solve(s, n);
    const L2Errors e = l2_errors(sol, s);
    if (prev_p > 0.0) {
      EXPECT_NEAR(observed_order(prev_p, e.pressure), 1.0, 0.15);
      EXPECT_GE(observed_order(prev_u, e.velocity), 1.85);
    }
    prev_p = e.pressure;
    prev_u = e.velocity;
  }
}

TEST(Solve, InvariantsOnFirstExample) {
  const auto ex = example_constant_jump();
  const StokesSolution sol = solve(ex.spec, 16);
  double mean = 0.0;
  for (int t = 0; t < static_cast<int>(sol.disc.mesh.num_triangles()); ++t) mean += sol.disc.mesh.area(t) * sol.p0[t];
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_LE(sol.divergence_residual, 1e-8);
  for (int e = 0; e < static_cast<int>(sol.disc.mesh.num_edges()); ++e) {
    if (!sol.disc.mesh.boundary_edge[e]) continue;
    EXPECT_EQ(sol.u.u1[e], 0.0);
    EXPECT_EQ(sol.u.u2[e], 0.0);
  }
  EXPECT_TRUE(sol.report.converged);
}

TEST(Solve, RejectsCoarseGrids) {
  EXPECT_THROW((void)solve(example_constant_jump().spec, 3), DomainError);
}

TEST(Errors, SelfComparisonIsZero) {
  const auto ex = example_nonconstant_jump();
  const StokesSolution sol = solve(ex.spec, 8);
  ProblemSpec s = ex.spec;
  const Mesh& m = sol.disc.mesh;
  s.exact_u = [&](const Vec2& x) { return eval_cr(m, sol.u, m.locate(x), x); };
  s.exact_p_minus = [&](const Vec2& x) { return sol.pressure(m.locate(x), x, Side::Minus); };
  s.exact_p_plus = [&](const Vec2& x) { return sol.pressure(m.locate(x), x, Side::Plus); };
  const L2Errors e = l2_errors(sol, s);
  EXPECT_LT(e.pressure, 1e-12);
  EXPECT_LT(e.velocity, 1e-14);
}

TEST(Errors, ConstantOffsetInvariance) {
  const auto ex = example_constant_jump();
  const StokesSolution sol = solve(ex.spec, 8);
  ProblemSpec s = ex.spec;
  s.exact_p_minus = [f = ex.spec.exact_p_minus](const Vec2& x) { return f(x) + 7.0; };
  s.exact_p_plus = [f = ex.spec.exact_p_plus](const Vec2& x) { return f(x) + 7.0; };
  EXPECT_NEAR(l2_errors(sol, s).pressure, l2_errors(sol, ex.spec).pressure, 1e-12);
  ProblemSpec missing = ex.spec;
  missing.exact_u = {};
  EXPECT_THROW((void)l2_errors(sol, missing), DomainError);
}

TEST(PatchTest, LinearStokesFlowIsReproduced) {
  // u = (x + 2y, 3x - y) is divergence free and harmonic; with constant
  // pressure and no load the CR/P0 solution equals its interpolant.
  const Mesh m = build_uniform_mesh({0, 1, 0, 1}, 8);
  const CRSpace space(m);
  const VectorField u = [](const Vec2& x) { return Vec2{x.x + 2 * x.y, 3 * x.x - x.y}; };
  const EdgeVelocity ub = interpolate_cr(m, u);
  const auto a = assemble_velocity_stiffness(m, space, 1.0);
  const auto b = assemble_divergence(m, space);
  const DirichletLift lift = dirichlet_lift(m, space, 1.0, ub);
  SaddleOptions opt;
  opt.tol = 1e-12;
  const auto s = solve_saddle(a, b, lift.momentum, lift.continuity, opt);
  const EdgeVelocity uh = from_dofs(space, s.u, &ub);
  for (int e = 0; e < static_cast<int>(m.num_edges()); ++e) {
    EXPECT_NEAR(uh.u1[e], ub.u1[e], 1e-10);
    EXPECT_NEAR(uh.u2[e], ub.u2[e], 1e-10);
  }
  EXPECT_LT(norm_inf(s.p), 1e-9);
}

TEST(FieldsCsv, HeaderAndRowCount) {
  const auto ex = example_constant_jump();
  const StokesSolution sol = solve(ex.spec, 8);
  std::ostringstream os;
  write_fields_csv(os, sol, 10, 5);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,y,u1,u2,p_total");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 66);
}

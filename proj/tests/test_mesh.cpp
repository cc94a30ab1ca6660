#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "extraction/mesh.hpp"

using namespace extraction;

namespace {
const Domain kUnit{0.0, 1.0, 0.0, 1.0};
}

TEST(Mesh, SmallestMesh) {
  const Mesh m = build_uniform_mesh(kUnit, 1);
  EXPECT_EQ(m.num_vertices(), 4u);
  EXPECT_EQ(m.num_triangles(), 2u);
  EXPECT_EQ(m.num_edges(), 5u);
  EXPECT_DOUBLE_EQ(m.h, 1.0);
}

TEST(Mesh, CountsForTwoAndEight) {
  const Mesh m2 = build_uniform_mesh(kUnit, 2);
  EXPECT_EQ(m2.num_vertices(), 9u);
  EXPECT_EQ(m2.num_triangles(), 8u);
  EXPECT_EQ(m2.num_edges(), 16u);
  const Mesh m8 = build_uniform_mesh(kUnit, 8);
  EXPECT_EQ(m8.num_vertices(), 81u);
  EXPECT_EQ(m8.num_triangles(), 128u);
  EXPECT_EQ(m8.num_edges(), 208u);
}

TEST(Mesh, EulerAndCountsUpTo64) {
  for (int n = 1; n <= 64; ++n) {
    const Mesh m = build_uniform_mesh(kUnit, n);
    const long v = static_cast<long>(m.num_vertices()), e = static_cast<long>(m.num_edges()),
               t = static_cast<long>(m.num_triangles());
    EXPECT_EQ(v - e + t + 1, 2) << n;
    EXPECT_EQ(t, 2L * n * n);
    EXPECT_EQ(e, 3L * n * n + 2L * n);
    EXPECT_EQ(v, static_cast<long>(n + 1) * (n + 1));
  }
}

TEST(Mesh, TrianglesCounterclockwiseWithEqualArea) {
  const Domain d{-1.0, 1.0, -1.0, 1.0};
  const Mesh m = build_uniform_mesh(d, 8);
  double total = 0.0;
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
    EXPECT_NEAR(m.area(t), 0.5 * m.h * m.h, 1e-15);
    total += m.area(t);
  }
  EXPECT_NEAR(total, d.area(), 1e-12 * d.area());
}

TEST(Mesh, DiagonalRunsFromBottomRightToTopLeft) {
  const Mesh m = build_uniform_mesh(kUnit, 1);
  // The interior edge of the single cell.
  int interior = -1;
  for (int e = 0; e < 5; ++e)
    if (!m.boundary_edge[e]) interior = e;
  ASSERT_GE(interior, 0);
  const Vec2 a = m.vertices[m.edges[interior][0]], b = m.vertices[m.edges[interior][1]];
  EXPECT_EQ(a, (Vec2{1.0, 0.0}));
  EXPECT_EQ(b, (Vec2{0.0, 1.0}));
}

TEST(Mesh, EdgeConnectivity) {
  const Mesh m = build_uniform_mesh(kUnit, 6);
  for (int e = 0; e < static_cast<int>(m.num_edges()); ++e) {
    const auto& ed = m.edges[e];
    EXPECT_LT(ed[0], ed[1]);
    const auto& et = m.edge_tris[e];
    EXPECT_EQ(m.boundary_edge[e], et[1] < 0);
    if (et[1] < 0) continue;
    // Opposite orientation in the two counterclockwise triangles.
    auto direction = [&](int t) {
      const int k = m.local_edge(t, e);
      EXPECT_GE(k, 0);
      return m.triangles[t][(k + 1) % 3];
    };
    EXPECT_NE(direction(et[0]), direction(et[1]));
  }
  // Local edge k is opposite local vertex k.
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
    for (int k = 0; k < 3; ++k) {
      const auto& ed = m.edges[m.tri_edges[t][k]];
      EXPECT_NE(ed[0], m.triangles[t][k]);
      EXPECT_NE(ed[1], m.triangles[t][k]);
    }
  }
}

TEST(Mesh, BoundaryEdgesHaveOneTriangle) {
  const Mesh m = build_uniform_mesh(kUnit, 5);
  int boundary = 0;
  for (bool b : m.boundary_edge) boundary += b ? 1 : 0;
  EXPECT_EQ(boundary, 4 * 5);
}

TEST(Mesh, EdgeMidpointsDistinct) {
  const Mesh m = build_uniform_mesh(kUnit, 7);
  std::set<std::pair<double, double>> seen;
  for (int e = 0; e < static_cast<int>(m.num_edges()); ++e) {
    const Vec2 c = m.edge_midpoint(e);
    EXPECT_TRUE(seen.insert({c.x, c.y}).second);
  }
}

TEST(Mesh, InvalidInput) {
  EXPECT_THROW((void)build_uniform_mesh({0.0, 0.0, 0.0, 1.0}, 2), DomainError);
  EXPECT_THROW((void)build_uniform_mesh({0.0, 1.0, 1.0, 0.5}, 2), DomainError);
  EXPECT_THROW((void)build_uniform_mesh(kUnit, 0), DomainError);
}

TEST(Mesh, Locate) {
  const Mesh m = build_uniform_mesh(kUnit, 4);
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) EXPECT_EQ(m.locate(m.centroid(t)), t);
  EXPECT_NO_THROW((void)m.locate({1.0, 1.0}));
  EXPECT_THROW((void)m.locate({1.5, 0.5}), DomainError);
}

TEST(AffineMap, ReferenceTriangleIsIdentity) {
  const AffineMap a = affine_map(Vec2{0, 1}, Vec2{0, 0}, Vec2{1, 0});
  EXPECT_DOUBLE_EQ(std::abs(a.det), 1.0);
  const Vec2 p{0.3, 0.2};
  EXPECT_EQ(a.apply(p), p);
}

TEST(AffineMap, ScaledTriangle) {
  const double h = 0.125;
  const AffineMap a = affine_map(Vec2{0, h}, Vec2{0, 0}, Vec2{h, 0});
  EXPECT_DOUBLE_EQ(std::abs(a.det), h * h);
}

TEST(AffineMap, RoundTripOnMeshVertices) {
  const Mesh m = build_uniform_mesh({-1.0, 1.0, -1.0, 1.0}, 5);
  for (int t = 0; t < static_cast<int>(m.num_triangles()); ++t) {
    const AffineMap a = affine_map(m, t);
    EXPECT_GT(a.det, 0.0);
    const Vec2 refs[3] = {{0, 0}, {1, 0}, {0, 1}};  // images are v0, v1, v2
    for (int k = 0; k < 3; ++k) {
      const Vec2 v = m.vertices[m.triangles[t][k]];
      const Vec2 back = a.apply(a.apply_inverse(v));
      EXPECT_NEAR(back.x, v.x, 1e-13);
      EXPECT_NEAR(back.y, v.y, 1e-13);
      const Vec2 img = a.apply(refs[k]);
      EXPECT_NEAR(img.x, v.x, 1e-13);
      EXPECT_NEAR(img.y, v.y, 1e-13);
    }
  }
  EXPECT_THROW((void)affine_map(m, -1), AssemblyError);
}

TEST(Mesh, TextExportHeader) {
  const Mesh m = build_uniform_mesh(kUnit, 2);
  std::ostringstream os;
  write_mesh(os, m);
  std::istringstream is(os.str());
  int v, e, t;
  is >> v >> e >> t;
  EXPECT_EQ(v, 9);
  EXPECT_EQ(e, 16);
  EXPECT_EQ(t, 8);
}

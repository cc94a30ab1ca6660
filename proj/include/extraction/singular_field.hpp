#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "extraction/fem_core.hpp"
#include "extraction/interface_geometry.hpp"
#include "extraction/linalg.hpp"
#include "extraction/mesh.hpp"

namespace extraction {

/// Prescribed jumps across the interface, [q] = q(minus) - q(plus). An empty
/// field stands for zero. `normal_derivative` refers to the unit normal
/// pointing from the minus into the plus region.
struct JumpData {
  ScalarField value;
  ScalarField normal_derivative;

  [[nodiscard]] double j1(const Vec2& x) const { return value ? value(x) : 0.0; }
  [[nodiscard]] double j2(const Vec2& x) const { return normal_derivative ? normal_derivative(x) : 0.0; }
  [[nodiscard]] bool zero() const { return !value && !normal_derivative; }
};

/// Linear function stored as value at an anchor point plus gradient.
struct LinearPiece {
  Vec2 anchor;
  double value = 0.0;
  Vec2 gradient;

  [[nodiscard]] double operator()(const Vec2& x) const { return value + dot(gradient, x - anchor); }
};

/// Discrete singular pressure: a linear piece on the minus part of each
/// interface triangle, a CR function on the fully-minus triangles, zero on the
/// plus region.
struct SingularField {
  std::vector<TriangleTag> tags;
  std::vector<LinearPiece> minus_piece;        ///< per triangle; unused on Plus triangles
  std::vector<std::array<double, 3>> alpha;    ///< per triangle; interface triangles only (A1, A2, A3)
  Vector edge_values;                          ///< CR extension, NaN off the fully-minus region
  SolveReport extension_report;

  [[nodiscard]] static SingularField zero(const Mesh& mesh, const Classification& cls) {
    SingularField f;
    f.tags = cls.tags;
    f.minus_piece.resize(mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) f.minus_piece[t].anchor = mesh.centroid(static_cast<int>(t));
    f.alpha.assign(mesh.num_triangles(), {0.0, 0.0, 0.0});
    f.edge_values.assign(mesh.num_edges(), std::numeric_limits<double>::quiet_NaN());
    return f;
  }

  /// Trace from inside triangle t on the given side (no point-location check).
  [[nodiscard]] double trace(int t, const Vec2& x, Side side) const {
    switch (tags[static_cast<std::size_t>(t)]) {
      case TriangleTag::Plus: return 0.0;
      case TriangleTag::Interface: return side == Side::Minus ? minus_piece[t](x) : 0.0;
      case TriangleTag::Minus: return minus_piece[t](x);
    }
    return 0.0;
  }
};

/// Coefficients of the minus-side linear function alpha1 l1 + alpha2 l2 + alpha3 l3
/// on the reference triangle, from
///   [0 1-a a; b 1-b 0; a -a-b b] alpha = (j1_b1, j1_b2, flux),
/// where the last row is the derivative along (b, a) (the unnormalized normal
/// of B1B2 pointing away from A2). The determinant is -(a^2 + b^2).
///
/// Elimination is done in the unknowns v = alpha2, g1 = alpha3 - alpha2,
/// g2 = alpha1 - alpha2: removing v leaves [a -b; b a] (g1, g2) =
/// (j1_b1 - j1_b2, flux), a scaled rotation, so tiny corner cuts stay well
/// conditioned and constant data is reproduced exactly.
[[nodiscard]] inline std::array<double, 3> local_singular_coeffs(double a, double b, double j1_b1, double j1_b2,
                                                                 double flux) {
  const double k = a * a + b * b;
  if (!(k > 0.0)) throw DomainError("local_singular_coeffs: degenerate cut (a = b = 0)");
  const double d = j1_b1 - j1_b2;
  const double g1 = (a * d + b * flux) / k;
  const double g2 = (a * flux - b * d) / k;
  const double v = j1_b1 - a * g1;
  return {v + g2, v, v + g1};
}

/// Third right-hand side entry of the local system for a physical cut: the
/// reference derivative along (b, a) of a linear function taking the values
/// j1_b1, j1_b2 at B1, B2 and normal derivative j2_b0 along the physical unit
/// normal. J (b, a) is split into normal and tangential parts; the tangential
/// part is fixed by the two point values.
[[nodiscard]] inline double reference_flux(const CutGeometry& cut, double j1_b1, double j1_b2, double j2_b0) {
  const Vec2 w = cut.map.push_direction({cut.b, cut.a});
  const Vec2 tangent = (cut.b2 - cut.b1) / cut.seg_length;
  return dot(w, cut.normal) * j2_b0 + dot(w, tangent) * (j1_b2 - j1_b1) / cut.seg_length;
}

/// Physical linear function sum alpha_i l_i for the relabeled vertices of a cut.
[[nodiscard]] inline LinearPiece linear_piece(const CutGeometry& cut, const std::array<double, 3>& alpha) {
  // Reference gradient of alpha1 eta + alpha2 (1 - xi - eta) + alpha3 xi.
  const Vec2 gref{alpha[2] - alpha[1], alpha[0] - alpha[1]};
  const auto& inv = cut.map.inverse;
  LinearPiece p;
  p.anchor = cut.map.apply({1.0 / 3, 1.0 / 3});
  p.value = (alpha[0] + alpha[1] + alpha[2]) / 3.0;
  p.gradient = {inv[0][0] * gref.x + inv[1][0] * gref.y, inv[0][1] * gref.x + inv[1][1] * gref.y};
  return p;
}

/// Jump-matching linear pieces on every interface triangle; zero elsewhere.
[[nodiscard]] inline SingularField build_pE(const Mesh& mesh, const Classification& cls,
                                            std::span<const CutGeometry> cuts, const JumpData& jumps) {
  SingularField f = SingularField::zero(mesh, cls);
  for (const auto& cut : cuts) {
    if (cls.tag(cut.triangle) != TriangleTag::Interface) {
      throw NonSimpleCut(cut.triangle, "build_pE: cut geometry for a non-interface triangle");
    }
    const double j1_b1 = jumps.j1(cut.b1), j1_b2 = jumps.j1(cut.b2), j2_b0 = jumps.j2(cut.b0);
    const double flux = reference_flux(cut, j1_b1, j1_b2, j2_b0);
    const auto alpha = local_singular_coeffs(cut.a, cut.b, j1_b1, j1_b2, flux);
    f.alpha[cut.triangle] = alpha;
    f.minus_piece[cut.triangle] = linear_piece(cut, alpha);
  }
  return f;
}

struct ExtensionOptions {
  double tol = 1e-12;
  int max_iter = 20000;
};

/// Discrete harmonic extension of the interface pieces into the fully-minus
/// triangles: CR Laplace problem with Dirichlet data taken at the midpoints of
/// the region's boundary edges from the neighbouring interface triangle.
[[nodiscard]] inline SingularField extend_harmonic(const Mesh& mesh, const Classification& cls, SingularField field,
                                                   const ExtensionOptions& opt = {}) {
  const auto& region = cls.minus_triangles;
  if (region.empty()) return field;
  const RegionOperator op = assemble_cr_laplace(mesh, region);
  const int n = static_cast<int>(op.edges.size());

  std::vector<int> free_index(static_cast<std::size_t>(n), -1);
  Vector values(static_cast<std::size_t>(n), 0.0);
  int nfree = 0;
  double data_sum = 0.0;
  int ndata = 0;
  for (int l = 0; l < n; ++l) {
    const int e = op.edges[l];
    const auto& et = mesh.edge_tris[e];
    const bool inner = et[1] >= 0 && cls.tag(et[0]) == TriangleTag::Minus && cls.tag(et[1]) == TriangleTag::Minus;
    if (inner) {
      free_index[l] = nfree++;
      continue;
    }
    int source = -1;
    for (int t : et) {
      if (t >= 0 && cls.tag(t) == TriangleTag::Interface) source = t;
    }
    if (source < 0) throw DomainError("extend_harmonic: minus region reaches the outer boundary");
    values[l] = field.minus_piece[source](mesh.edge_midpoint(e));
    data_sum += values[l];
    ++ndata;
  }

  if (nfree > 0) {
    std::vector<Triplet> trip;
    Vector rhs(static_cast<std::size_t>(nfree), 0.0);
    const auto off = op.matrix.offsets();
    const auto col = op.matrix.columns();
    const auto val = op.matrix.values();
    for (int l = 0; l < n; ++l) {
      const int i = free_index[l];
      if (i < 0) continue;
      for (int k = off[l]; k < off[l + 1]; ++k) {
        const int j = free_index[col[k]];
        if (j >= 0) {
          trip.push_back({i, j, val[k]});
        } else {
          rhs[i] -= val[k] * values[col[k]];
        }
      }
    }
    const SparseMatrix aff = build_from_triplets(trip, nfree, nfree);
    // Starting from the mean boundary value makes constant data exact.
    Vector x(static_cast<std::size_t>(nfree), ndata > 0 ? data_sum / ndata : 0.0);
    field.extension_report = solve_spd(aff, rhs, x, SpdOptions{opt.tol, opt.max_iter});
    for (int l = 0; l < n; ++l) {
      if (free_index[l] >= 0) values[l] = x[free_index[l]];
    }
  } else {
    field.extension_report = {0, 0.0, true, "none"};
  }

  for (int l = 0; l < n; ++l) field.edge_values[op.edges[l]] = values[l];
  for (int t : region) {
    const auto g = cr_gradients(mesh, t);
    const auto& te = mesh.tri_edges[t];
    LinearPiece p;
    p.anchor = mesh.centroid(t);
    for (int k = 0; k < 3; ++k) {
      const double v = field.edge_values[te[k]];
      p.value += v / 3.0;
      p.gradient += v * g[k];
    }
    field.minus_piece[t] = p;
  }
  return field;
}

[[nodiscard]] inline SingularField build_singular_field(const Mesh& mesh, const Classification& cls,
                                                        std::span<const CutGeometry> cuts, const JumpData& jumps,
                                                        const ExtensionOptions& opt = {}) {
  return extend_harmonic(mesh, cls, build_pE(mesh, cls, cuts, jumps), opt);
}

/// p*_h at x in triangle t. Points on the interface have two traces; `side` picks one.
[[nodiscard]] inline double eval_p_star(const Mesh& mesh, const SingularField& field, int t, const Vec2& x,
                                        Side side) {
  if (t < 0 || static_cast<std::size_t>(t) >= mesh.num_triangles()) {
    throw DomainError("eval_p_star: triangle index out of range");
  }
  const auto l = barycentric(mesh, t, x);
  for (double v : l) {
    if (v < -1e-12 || v > 1 + 1e-12) throw DomainError("eval_p_star: point outside triangle");
  }
  return field.trace(t, x, side);
}

/// Samples p*_h on an (nx+1) x (ny+1) grid as "x,y,value" lines; plus-side
/// values at points of the polygonal interface follow the side test.
inline void write_singular_field_csv(std::ostream& os, const Mesh& mesh, const Classification& cls,
                                     const SingularField& field, int nx, int ny) {
  os << "x,y,value\n";
  os.precision(10);
  const Domain& d = mesh.domain;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const Vec2 x{d.xmin + d.width() * i / nx, d.ymin + d.height() * j / ny};
      const int t = mesh.locate(x);
      os << x.x << ',' << x.y << ',' << field.trace(t, x, side_of(mesh, cls, t, x)) << '\n';
    }
  }
}

}  // namespace extraction

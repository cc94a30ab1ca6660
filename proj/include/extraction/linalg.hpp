#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "extraction/errors.hpp"

namespace extraction {

using Vector = std::vector<double>;

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix. Column indices are sorted and unique per row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), offsets_(static_cast<std::size_t>(rows) + 1, 0) {}

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] std::size_t nonzeros() const { return values_.size(); }
  [[nodiscard]] std::span<const int> offsets() const { return offsets_; }
  [[nodiscard]] std::span<const int> columns() const { return columns_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }

  /// Entry (i, j), zero when not stored.
  [[nodiscard]] double at(int i, int j) const {
    const auto first = columns_.begin() + offsets_[i], last = columns_.begin() + offsets_[i + 1];
    const auto it = std::lower_bound(first, last, j);
    return it != last && *it == j ? values_[static_cast<std::size_t>(it - columns_.begin())] : 0.0;
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
      y[i] = s;
    }
  }
  [[nodiscard]] Vector operator*(std::span<const double> x) const {
    Vector y(static_cast<std::size_t>(rows_));
    multiply(x, y);
    return y;
  }
  /// y = A^T x
  [[nodiscard]] Vector multiply_transpose(std::span<const double> x) const {
    Vector y(static_cast<std::size_t>(cols_), 0.0);
    for (int i = 0; i < rows_; ++i) {
      for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) y[columns_[k]] += values_[k] * x[i];
    }
    return y;
  }
  [[nodiscard]] Vector diagonal() const {
    Vector d(static_cast<std::size_t>(std::min(rows_, cols_)), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(static_cast<int>(i), static_cast<int>(i));
    return d;
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

  friend SparseMatrix build_from_triplets(std::span<const Triplet>, int, int);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> columns_;
  std::vector<double> values_;
};

/// Duplicate (row, col) entries are summed in input order.
[[nodiscard]] inline SparseMatrix build_from_triplets(std::span<const Triplet> triplets, int nrows, int ncols) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols) {
      throw AssemblyError("build_from_triplets: index (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                          ") outside " + std::to_string(nrows) + "x" + std::to_string(ncols));
    }
  }
  // Stable counting sort by row, then a stable sort by column within each row.
  std::vector<int> count(static_cast<std::size_t>(nrows) + 1, 0);
  for (const auto& t : triplets) ++count[t.row + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<std::size_t> order(triplets.size());
  {
    auto next = count;
    for (std::size_t k = 0; k < triplets.size(); ++k) order[next[triplets[k].row]++] = k;
  }
  SparseMatrix m(nrows, ncols);
  for (int i = 0; i < nrows; ++i) {
    auto first = order.begin() + count[i], last = order.begin() + count[i + 1];
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) { return triplets[a].col < triplets[b].col; });
    for (auto it = first; it != last; ++it) {
      const auto& t = triplets[*it];
      if (!m.columns_.empty() && static_cast<int>(m.columns_.size()) > m.offsets_[i] && m.columns_.back() == t.col) {
        m.values_.back() += t.value;
      } else {
        m.columns_.push_back(t.col);
        m.values_.push_back(t.value);
      }
    }
    m.offsets_[i + 1] = static_cast<int>(m.columns_.size());
  }
  return m;
}

struct SolveReport {
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  std::string method;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveReport report) : std::runtime_error(what), report_(std::move(report)) {}
  [[nodiscard]] const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

[[nodiscard]] inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
[[nodiscard]] inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }
[[nodiscard]] inline double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct SpdOptions {
  double tol = 1e-10;  ///< relative residual ||b - Ax|| / ||b||
  int max_iter = 20000;
  /// When false, a missed tolerance is only reported, not thrown.
  bool require_convergence = true;
};

/// Jacobi-preconditioned conjugate gradients. `x` holds the initial guess on
/// entry. Throws SolverError when the tolerance is not met within max_iter.
inline SolveReport solve_spd(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                             const SpdOptions& opt = {}) {
  const std::size_t n = b.size();
  SolveReport rep;
  rep.method = "jacobi-pcg";
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  Vector inv_diag = a.diagonal();
  for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

  Vector r(n), z(n), p(n), q(n);
  a.multiply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rnorm = norm2(r);
  const double target = opt.tol * bnorm;
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  while (rnorm > target && rep.iterations < opt.max_iter) {
    a.multiply(p, q);
    const double alpha = rz / dot(p, q);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++rep.iterations;
    // Refresh the recursive residual periodically against drift.
    if (rep.iterations % 200 == 0) {
      a.multiply(x, q);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    }
    rnorm = norm2(r);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  a.multiply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  rep.residual_norm = norm2(r) / bnorm;
  rep.converged = rep.residual_norm <= opt.tol;
  if (!rep.converged && opt.require_convergence) {
    throw SolverError("solve_spd: no convergence after " + std::to_string(rep.iterations) +
                          " iterations (relative residual " + std::to_string(rep.residual_norm) + ")",
                      rep);
  }
  return rep;
}

[[nodiscard]] inline Vector solve_spd(const SparseMatrix& a, std::span<const double> b, const SpdOptions& opt = {},
                                      SolveReport* report = nullptr) {
  Vector x(b.size(), 0.0);
  auto rep = solve_spd(a, b, x, opt);
  if (report) *report = rep;
  return x;
}

struct SaddleOptions {
  double tol = 1e-8;
  double inner_tol = 1e-12;
  int max_outer = 2000;
  int max_inner = 50000;
  /// Per-pressure-dof weights (element areas) for the zero-mean normalization
  /// and the mass-matrix preconditioner; uniform when empty.
  Vector pressure_weights;
};

struct SaddleSolution {
  Vector u;
  Vector p;
  SolveReport report;
  double momentum_residual = 0.0;    ///< ||A u + B^T p - f||
  double continuity_residual = 0.0;  ///< ||B u - g||
};

/// Solves [A B^T; B 0][u; p] = [f; g] by preconditioned CG on the pressure
/// Schur complement B A^{-1} B^T, with inner solves by solve_spd. The pressure
/// is determined up to ker B^T (constants); the returned p has zero weighted mean.
[[nodiscard]] inline SaddleSolution solve_saddle(const SparseMatrix& a, const SparseMatrix& b,
                                                 std::span<const double> f, std::span<const double> g,
                                                 const SaddleOptions& opt = {}) {
  const std::size_t nu = f.size(), np = g.size();
  Vector w = opt.pressure_weights;
  if (w.empty()) w.assign(np, 1.0);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  const SpdOptions inner{opt.inner_tol, opt.max_inner, false};

  auto zero_mean = [&](Vector& p) {
    const double m = dot(p, w) / wsum;
    for (double& v : p) v -= m;
  };
  // Euclidean projection onto the complement of the constants.
  auto project = [&](Vector& r) {
    const double m = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(np);
    for (double& v : r) v -= m;
  };

  SaddleSolution out;
  out.report.method = "schur-pcg";
  Vector u(nu, 0.0), rhs_u(f.begin(), f.end());
  Vector p(np, 0.0);

  // u = A^{-1} f; residual of the continuity equation r = B u - g.
  solve_spd(a, rhs_u, u, inner);
  Vector r = b * u;
  for (std::size_t i = 0; i < np; ++i) r[i] -= g[i];
  project(r);
  const double target = opt.tol * std::max(1.0, norm2(g));

  Vector z(np), d(np), sd(np), bt_d, ad(nu, 0.0);
  auto precondition = [&](const Vector& res, Vector& out_z) {
    for (std::size_t i = 0; i < np; ++i) out_z[i] = res[i] / w[i];
    project(out_z);
  };
  precondition(r, z);
  d = z;
  double rz = dot(r, z);
  while (norm2(r) > target && out.report.iterations < opt.max_outer) {
    // S d = B A^{-1} B^T d
    bt_d = b.multiply_transpose(d);
    std::fill(ad.begin(), ad.end(), 0.0);
    solve_spd(a, bt_d, ad, inner);
    sd = b * ad;
    project(sd);
    const double alpha = rz / dot(d, sd);
    // p += alpha d, and u = A^{-1}(f - B^T p) moves by -alpha A^{-1} B^T d.
    for (std::size_t i = 0; i < np; ++i) {
      p[i] += alpha * d[i];
      r[i] -= alpha * sd[i];
    }
    for (std::size_t i = 0; i < nu; ++i) u[i] -= alpha * ad[i];
    ++out.report.iterations;
    precondition(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < np; ++i) d[i] = z[i] + beta * d[i];
  }

  zero_mean(p);
  // Recompute the velocity from the final pressure.
  Vector bt_p = b.multiply_transpose(p);
  for (std::size_t i = 0; i < nu; ++i) rhs_u[i] = f[i] - bt_p[i];
  solve_spd(a, rhs_u, u, inner);

  Vector au = a * u;
  for (std::size_t i = 0; i < nu; ++i) au[i] += bt_p[i] - f[i];
  Vector bu = b * u;
  for (std::size_t i = 0; i < np; ++i) bu[i] -= g[i];
  out.momentum_residual = norm2(au);
  out.continuity_residual = norm2(bu);
  out.report.residual_norm = out.continuity_residual;
  out.report.converged = out.continuity_residual <= target &&
                         out.momentum_residual <= opt.tol * std::max(norm2(f), norm2(bt_p));
  out.u = std::move(u);
  out.p = std::move(p);
  if (!out.report.converged) {
    throw SolverError("solve_saddle: no convergence after " + std::to_string(out.report.iterations) +
                          " outer iterations (continuity residual " + std::to_string(out.continuity_residual) + ")",
                      out.report);
  }
  return out;
}

}  // namespace extraction

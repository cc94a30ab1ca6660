#pragma once

#include <chrono>
#include <cstdint>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "extraction/errors.hpp"
#include "extraction/stokes.hpp"

namespace extraction {

struct ExampleDef {
  std::string name;
  ProblemSpec spec;
};

namespace detail {
// 3x^4 - 6x^3 + 6x^2y^2 - 6x^2y + 3x^2 - 6xy^2 + 6xy + y^2 - y, so that
// -Lap u1 = 512 (2y - 1) q(x, y) and -Lap u2 = -512 (2x - 1) q(y, x).
[[nodiscard]] inline double vortex_laplacian_factor(double x, double y) {
  return 3 * x * x * x * x - 6 * x * x * x + 6 * x * x * y * y - 6 * x * x * y + 3 * x * x - 6 * x * y * y +
         6 * x * y + y * y - y;
}

[[nodiscard]] inline LevelSet circle(const Vec2& center, double radius) {
  return {[center, radius](const Vec2& x) { return norm(x - center) - radius; },
          [center](const Vec2& x) {
            const Vec2 d = x - center;
            const double r = norm(d);
            return r > 0.0 ? d / r : Vec2{1.0, 0.0};
          }};
}
}  // namespace detail

/// Circle of radius 1/4 in the unit square, pressure jump 30, smooth vortex velocity.
[[nodiscard]] inline ExampleDef example_constant_jump(double mu = 1.0) {
  ExampleDef ex;
  ex.name = "constant-jump";
  ProblemSpec& s = ex.spec;
  s.domain = {0.0, 1.0, 0.0, 1.0};
  s.level_set = detail::circle({0.5, 0.5}, 0.25);
  s.mu = mu;
  s.exact_u = [](const Vec2& p) {
    const double x = p.x, y = p.y;
    return Vec2{-256 * x * x * (x - 1) * (x - 1) * y * (y - 1) * (2 * y - 1),
                256 * y * y * (y - 1) * (y - 1) * x * (x - 1) * (2 * x - 1)};
  };
  s.exact_p_plus = [](const Vec2& p) { return 150 * (p.x - 0.5) * (p.y - 0.5); };
  s.exact_p_minus = [](const Vec2& p) { return 150 * (p.x - 0.5) * (p.y - 0.5) + 30; };
  s.g.minus = [mu](const Vec2& p) {
    const double x = p.x, y = p.y;
    return Vec2{(2 * y - 1) * (512 * mu * detail::vortex_laplacian_factor(x, y) + 75),
                (2 * x - 1) * (-512 * mu * detail::vortex_laplacian_factor(y, x) + 75)};
  };
  s.jumps.value = [](const Vec2&) { return 30.0; };
  return ex;
}

/// Normal used by the normal-derivative jump of the second example: the unit
/// normal gives 6x^2y(20cos(x^2y) - 1), the radial vector (x, y) gives half of it.
enum class J2Convention { UnitNormal, Radial };

/// Circle of radius 1/2 in [-1,1]^2, u = 0, p = 20 sin(x^2 y) inside and x^2 y outside.
[[nodiscard]] inline ExampleDef example_nonconstant_jump(double mu = 1.0,
                                                         J2Convention j2 = J2Convention::UnitNormal) {
  ExampleDef ex;
  ex.name = "nonconstant-jump";
  ProblemSpec& s = ex.spec;
  s.domain = {-1.0, 1.0, -1.0, 1.0};
  s.level_set = detail::circle({0.0, 0.0}, 0.5);
  s.mu = mu;
  s.exact_u = [](const Vec2&) { return Vec2{}; };
  s.exact_p_minus = [](const Vec2& p) { return 20 * std::sin(p.x * p.x * p.y); };
  s.exact_p_plus = [](const Vec2& p) { return p.x * p.x * p.y; };
  s.g.minus = [](const Vec2& p) {
    const double c = 20 * p.x * std::cos(p.x * p.x * p.y);
    return Vec2{c * 2 * p.y, c * p.x};
  };
  s.g.plus = [](const Vec2& p) { return Vec2{p.x * 2 * p.y, p.x * p.x}; };
  s.jumps.value = [](const Vec2& p) {
    const double s2 = p.x * p.x * p.y;
    return 20 * std::sin(s2) - s2;
  };
  const double factor = j2 == J2Convention::UnitNormal ? 6.0 : 3.0;
  s.jumps.normal_derivative = [factor](const Vec2& p) {
    const double s2 = p.x * p.x * p.y;
    return factor * s2 * (20 * std::cos(s2) - 1);
  };
  return ex;
}

[[nodiscard]] inline ExampleDef example_by_name(const std::string& name, double mu = 1.0) {
  if (name == "constant-jump") return example_constant_jump(mu);
  if (name == "nonconstant-jump") return example_nonconstant_jump(mu);
  throw DomainError("unknown example '" + name + "'");
}

struct ConsistencyCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;  ///< largest scaled deviation seen
  double tolerance = 0.0;
};

struct ConsistencyReport {
  std::vector<ConsistencyCheck> checks;
  [[nodiscard]] bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Verifies the hard-coded data of an example by finite differences at
/// fixed-seed random points: the momentum equation per side, incompressibility,
/// and both jump conditions on the exact interface.
[[nodiscard]] inline ConsistencyReport check_consistency(const ExampleDef& ex, int points = 50,
                                                         std::uint64_t seed = 20240601) {
  const ProblemSpec& s = ex.spec;
  if (!s.exact_u || !s.exact_p_minus || !s.exact_p_plus) throw DomainError("check_consistency: exact fields missing");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(s.domain.xmin, s.domain.xmax), uy(s.domain.ymin, s.domain.ymax);
  const Vec2 ex_{1.0, 0.0}, ey_{0.0, 1.0};

  ConsistencyCheck momentum{"momentum", true, 0.0, 1e-4};
  ConsistencyCheck divergence{"divergence", true, 0.0, 1e-6};
  ConsistencyCheck jumps{"jumps", true, 0.0, 1e-6};

  for (int i = 0; i < points; ++i) {
    const Vec2 x{ux(rng), uy(rng)};
    const Side side = s.level_set(x) < 0.0 ? Side::Minus : Side::Plus;
    const double hl = 1e-3, hg = 1e-5;
    const Vec2 u0 = s.exact_u(x);
    const Vec2 lap = (s.exact_u(x + hl * ex_) + s.exact_u(x - hl * ex_) + s.exact_u(x + hl * ey_) +
                      s.exact_u(x - hl * ey_) - 4.0 * u0) / (hl * hl);
    auto p = [&](const Vec2& y) { return s.exact_p(y, side); };
    const Vec2 gp{(p(x + hg * ex_) - p(x - hg * ex_)) / (2 * hg), (p(x + hg * ey_) - p(x - hg * ey_)) / (2 * hg)};
    const Vec2 g = s.g(x, side);
    const double dev = norm(-s.mu * lap + gp - g) / std::max(1.0, norm(g));
    momentum.worst = std::max(momentum.worst, dev);

    const double hd = 1e-6;
    const double div = (s.exact_u(x + hd * ex_).x - s.exact_u(x - hd * ex_).x) / (2 * hd) +
                       (s.exact_u(x + hd * ey_).y - s.exact_u(x - hd * ey_).y) / (2 * hd);
    divergence.worst = std::max(divergence.worst, std::abs(div));

    // Project onto the exact interface by Newton steps along the gradient.
    Vec2 y = x;
    for (int it = 0; it < 100; ++it) {
      const double f = s.level_set(y);
      if (std::abs(f) < 1e-15) break;
      const Vec2 gr = s.level_set.gradient(y, 1e-7);
      y -= f / dot(gr, gr) * gr;
    }
    const Vec2 gr = s.level_set.gradient(y, 1e-7);
    const Vec2 n = gr / norm(gr);
    const double j1 = s.jumps.j1(y), j2 = s.jumps.j2(y);
    const double jump = s.exact_p_minus(y) - s.exact_p_plus(y);
    const double hn = 1e-6;
    auto dn = [&](const ScalarField& q) { return (q(y + hn * n) - q(y - hn * n)) / (2 * hn); };
    const double djump = dn(s.exact_p_minus) - dn(s.exact_p_plus);
    jumps.worst = std::max({jumps.worst, std::abs(jump - j1) / std::max(1.0, std::abs(j1)),
                            std::abs(djump - j2) / std::max(1.0, std::abs(j2))});
  }
  for (auto* c : {&momentum, &divergence, &jumps}) c->passed = c->worst <= c->tolerance;
  return {{momentum, divergence, jumps}};
}

struct ConvergenceRow {
  int n = 0;
  double err_p = 0.0;
  std::optional<double> order_p;
  double err_u = 0.0;
  std::optional<double> order_u;
  double seconds = 0.0;
  double divergence_residual = 0.0;
  int outer_iterations = 0;
};

struct ConvergenceReport {
  std::string example;
  double mu = 1.0;
  double saddle_tol = 1e-8;
  std::vector<ConvergenceRow> rows;
};

/// Observed order between successive refinements (n doubles).
[[nodiscard]] inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

/// Solves at n = 2^k for k = kmin..kmax. `on_solution` sees every solution
/// before it is discarded.
[[nodiscard]] inline ConvergenceReport run_convergence(
    const ExampleDef& ex, int kmin, int kmax, const SolveOptions& opt = {},
    const std::function<void(int, const StokesSolution&)>& on_solution = {}) {
  if (kmin < 2 || kmax < kmin || kmax > 10) throw DomainError("run_convergence: invalid refinement range");
  ConvergenceReport rep;
  rep.example = ex.name;
  rep.mu = ex.spec.mu;
  rep.saddle_tol = opt.saddle_tol;
  for (int k = kmin; k <= kmax; ++k) {
    const int n = 1 << k;
    const auto start = std::chrono::steady_clock::now();
    const StokesSolution sol = solve(ex.spec, n, opt);
    const L2Errors err = l2_errors(sol, ex.spec);
    ConvergenceRow row;
    row.n = n;
    row.err_p = err.pressure;
    row.err_u = err.velocity;
    row.divergence_residual = sol.divergence_residual;
    row.outer_iterations = sol.report.iterations;
    if (!rep.rows.empty()) {
      row.order_p = observed_order(rep.rows.back().err_p, row.err_p);
      row.order_u = observed_order(rep.rows.back().err_u, row.err_u);
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_solution) on_solution(n, sol);
    rep.rows.push_back(row);
  }
  return rep;
}

namespace detail {
[[nodiscard]] inline std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}
}  // namespace detail

/// Header "N,p_err,p_order,u_err,u_order"; errors as %.6e, orders as %.2f,
/// empty order fields on the first row.
inline void write_csv(std::ostream& os, const ConvergenceReport& rep) {
  os << "N,p_err,p_order,u_err,u_order\n";
  for (const auto& r : rep.rows) {
    os << r.n << ',' << detail::format("%.6e", r.err_p) << ','
       << (r.order_p ? detail::format("%.2f", *r.order_p) : "") << ',' << detail::format("%.6e", r.err_u) << ','
       << (r.order_u ? detail::format("%.2f", *r.order_u) : "") << '\n';
  }
}

[[nodiscard]] inline std::vector<ConvergenceRow> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "N,p_err,p_order,u_err,u_order") {
    throw DomainError("parse_csv: missing or unexpected header");
  }
  std::vector<ConvergenceRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 5) throw DomainError("parse_csv: expected 5 fields in '" + line + "'");
    ConvergenceRow r;
    r.n = std::stoi(fields[0]);
    r.err_p = std::stod(fields[1]);
    if (!fields[2].empty()) r.order_p = std::stod(fields[2]);
    r.err_u = std::stod(fields[3]);
    if (!fields[4].empty()) r.order_u = std::stod(fields[4]);
    rows.push_back(r);
  }
  return rows;
}

/// Human-readable table in the layout of a convergence study.
inline void write_table(std::ostream& os, const ConvergenceReport& rep) {
  char buf[160];
  os << "example: " << rep.example << "  (mu = " << rep.mu << ", saddle tol = " << rep.saddle_tol << ")\n";
  std::snprintf(buf, sizeof buf, "%10s  %14s %6s  %14s %6s  %9s %8s\n", "NxN", "|p-p_h|_L2", "order", "|u-u_h|_L2",
                "order", "|Bu|_inf", "time[s]");
  os << buf;
  for (const auto& r : rep.rows) {
    const std::string grid = std::to_string(r.n) + "x" + std::to_string(r.n);
    const std::string op = r.order_p ? detail::format("%.2f", *r.order_p) : "-";
    const std::string ou = r.order_u ? detail::format("%.2f", *r.order_u) : "-";
    std::snprintf(buf, sizeof buf, "%10s  %14.4e %6s  %14.4e %6s  %9.1e %8.2f\n", grid.c_str(), r.err_p, op.c_str(),
                  r.err_u, ou.c_str(), r.divergence_residual, r.seconds);
    os << buf;
  }
}

}  // namespace extraction

// Command-line driver: convergence sweeps for the shipped pressure-jump examples.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "extraction/extraction.hpp"

namespace {

constexpr int kExitConsistency = 2;
constexpr int kExitSolver = 3;

struct RunArgs {
  std::string example = "constant-jump";
  int kmin = 3;
  int kmax = 7;
  double mu = 1.0;
  std::string out = "report.csv";
  std::string dump_fields;
  std::string dump_singular;
  double tol_saddle = 1e-8;
  std::string j2 = "unit";
  int samples = 128;
};

int run(const RunArgs& args) {
  using namespace extraction;
  ExampleDef ex = args.example == "nonconstant-jump"
                      ? example_nonconstant_jump(args.mu, args.j2 == "radial" ? J2Convention::Radial
                                                                              : J2Convention::UnitNormal)
                      : example_by_name(args.example, args.mu);

  const ConsistencyReport consistency = check_consistency(ex);
  for (const auto& c : consistency.checks) {
    std::cout << "consistency " << c.name << ": " << (c.passed ? "pass" : "FAIL") << " (worst " << c.worst
              << ", tol " << c.tolerance << ")\n";
  }
  if (!consistency.passed()) {
    std::cerr << "example data failed the consistency check\n";
    return kExitConsistency;
  }

  ConvergenceReport report;
  try {
    report = run_convergence(ex, args.kmin, args.kmax, SolveOptions{args.tol_saddle},
                             [&](int n, const StokesSolution& sol) {
                               if (n != (1 << args.kmax)) return;
                               if (!args.dump_fields.empty()) {
                                 std::ofstream f(args.dump_fields);
                                 write_fields_csv(f, sol, args.samples, args.samples);
                               }
                               if (!args.dump_singular.empty()) {
                                 std::ofstream f(args.dump_singular);
                                 write_singular_field_csv(f, sol.disc.mesh, sol.disc.cls, sol.p_star, args.samples,
                                                          args.samples);
                               }
                             });
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const NonSimpleCut& e) {
    std::cerr << "grid does not resolve the interface: " << e.what() << '\n';
    return kExitSolver;
  }

  write_table(std::cout, report);
  std::ofstream out(args.out);
  if (!out) {
    std::cerr << "cannot write " << args.out << '\n';
    return 1;
  }
  write_csv(out, report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stokes flow with prescribed pressure jumps on unfitted uniform grids"};
  app.require_subcommand(1);

  RunArgs args;
  auto* cmd = app.add_subcommand("run", "Run a convergence sweep over n = 2^kmin .. 2^kmax");
  cmd->add_option("--example", args.example, "Example problem")
      ->check(CLI::IsMember({"constant-jump", "nonconstant-jump"}));
  cmd->add_option("--kmin", args.kmin, "Coarsest level (n = 2^kmin)")->check(CLI::Range(3, 8));
  cmd->add_option("--kmax", args.kmax, "Finest level (n = 2^kmax)")->check(CLI::Range(3, 8));
  cmd->add_option("--mu", args.mu, "Viscosity")->check(CLI::PositiveNumber);
  cmd->add_option("--out", args.out, "Convergence CSV");
  cmd->add_option("--dump-fields", args.dump_fields, "CSV of x,y,u1,u2,p_total on the finest grid");
  cmd->add_option("--dump-singular", args.dump_singular, "CSV of x,y,p* on the finest grid");
  cmd->add_option("--samples", args.samples, "Sampling points per axis for field dumps")->check(CLI::PositiveNumber);
  cmd->add_option("--tol-saddle", args.tol_saddle, "Saddle-point solver tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--j2-convention", args.j2, "Normal used by the nonconstant-jump derivative data")
      ->check(CLI::IsMember({"unit", "radial"}));

  CLI11_PARSE(app, argc, argv);
  if (args.kmin > args.kmax) {
    std::cerr << "--kmin must not exceed --kmax\n";
    return 1;
  }
  return run(args);
}

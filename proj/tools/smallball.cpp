#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "smallball/errors.hpp"
#include "smallball/report.hpp"
#include "smallball/version.hpp"

namespace sb = smallball;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw sb::ParseError(sb::ParseError::Kind::malformed_document,
                         "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw sb::Error("cannot write '" + out_path + "'");
  out << text;
}

void print_manifest(const std::string& command, const std::string& doc_text,
                    std::uint64_t seed, const std::string& out_path) {
  sb::json m;
  m["command"] = command;
  m["problem_hash"] = sb::fnv1a_hex(doc_text);
  m["seed"] = seed;
  m["version"] = sb::kVersion;
  m["timestamp"] = static_cast<long long>(std::time(nullptr));
  m["output"] = out_path.empty() ? "-" : out_path;
  std::cerr << "manifest " << m.dump() << "\n";
}

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  double tol = 1e-10;
  std::optional<long> samples;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& fl) {
  cmd->add_option("--seed", fl.seed, "Override the document seed");
  cmd->add_option("--tol", fl.tol, "Solver/verification tolerance")
      ->default_val(1e-10);
  cmd->add_option("--samples", fl.samples, "Override verification sample budget");
  cmd->add_option("--out", fl.out, "Write the report here instead of stdout");
}

struct LoadedProblem {
  sb::Problem problem;
  std::string doc_text;
  std::uint64_t seed = 0;
};

LoadedProblem load_problem(const std::string& path, const CommonFlags& fl) {
  LoadedProblem lp{sb::Problem{}, read_file(path), 0};
  lp.problem = sb::parse_problem(lp.doc_text);
  lp.seed = fl.seed ? *fl.seed : lp.problem.config.seed;
  return lp;
}

std::string format_csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

constexpr const char* kGateMessage =
    "theorem 2.3 gate: Phi(0) = 0 forces sigma = 0; no admissible radius exists";

int run_certify(const std::string& path, const CommonFlags& fl) {
  const LoadedProblem lp = load_problem(path, fl);
  const sb::ConstantsCertificate cert =
      sb::certify_field(lp.problem.field, lp.problem.config.budgets, lp.seed);
  write_output(sb::dump_report(sb::certificate_to_json(cert)), fl.out);
  print_manifest("certify", lp.doc_text, lp.seed, fl.out);
  if (!(cert.sigma > 0.0)) {
    std::cerr << kGateMessage << "\n";
    return 2;
  }
  return 0;
}

double resolve_radius(const std::string& r_arg, const sb::ConstantsCertificate& cert,
                      double rho, bool override_radius) {
  double r = 0.0;
  if (r_arg == "max") {
    r = cert.r_max;
  } else {
    try {
      std::size_t pos = 0;
      r = std::stod(r_arg, &pos);
      if (pos != r_arg.size()) throw std::invalid_argument(r_arg);
    } catch (const std::exception&) {
      throw sb::ParseError(sb::ParseError::Kind::bad_value,
                           "--r expects a number or 'max'");
    }
  }
  if (!(r > 0.0) || r > rho)
    throw sb::ParseError(sb::ParseError::Kind::bad_value,
                         "radius must lie in (0, rho]");
  if (!override_radius && r > cert.r_max * (1.0 + 1e-12))
    throw sb::GateError("requested radius exceeds r_max = " +
                        std::to_string(cert.r_max) +
                        " (pass --override-radius to experiment)");
  return r;
}

int run_solve(const std::string& path, const CommonFlags& fl, const std::string& r_arg,
              const std::string& solver, bool override_radius) {
  const LoadedProblem lp = load_problem(path, fl);
  const sb::ConstantsCertificate cert =
      sb::certify_field(lp.problem.field, lp.problem.config.budgets, lp.seed);
  if (!(cert.sigma > 0.0) && !override_radius) {
    std::cerr << kGateMessage << "\n";
    return 2;
  }
  const double r = resolve_radius(r_arg, cert, lp.problem.field.rho, override_radius);

  sb::SolveOptions opts;
  opts.tol = fl.tol;
  opts.seed = lp.seed;

  sb::json out;
  bool converged = false;
  bool agreement_ok = true;
  if (solver == "fixed-point") {
    const sb::SolutionCertificate sol = sb::fixed_point_solve(lp.problem.field, r, opts);
    out = sb::solution_to_json(sol);
    converged = sol.converged;
  } else if (solver == "saddle") {
    const sb::SolutionCertificate sol =
        sb::saddle_solve(lp.problem.field, r, cert.M, opts);
    out = sb::solution_to_json(sol);
    converged = sol.converged;
  } else if (solver == "both") {
    const sb::SolutionCertificate fp = sb::fixed_point_solve(lp.problem.field, r, opts);
    const sb::SolutionCertificate sd =
        sb::saddle_solve(lp.problem.field, r, cert.M, opts);
    const double agreement = sb::distance(fp.x_star, sd.x_star);
    out["schema_version"] = sb::kSchemaVersion;
    out["kind"] = "solution_pair";
    out["agreement"] = agreement;
    out["fixed_point"] = sb::solution_to_json(fp);
    out["saddle"] = sb::solution_to_json(sd);
    converged = fp.converged && sd.converged;
    agreement_ok = !(converged && agreement > 10.0 * fl.tol);
    if (!agreement_ok)
      std::cerr << "solvers disagree: ||x_fp - x_saddle|| = " << agreement << "\n";
  } else {
    throw sb::ParseError(sb::ParseError::Kind::bad_value,
                         "--solver must be fixed-point, saddle or both");
  }

  write_output(sb::dump_report(out), fl.out);
  print_manifest("solve", lp.doc_text, lp.seed, fl.out);
  if (!converged) {
    std::cerr << "solver did not converge\n";
    return 3;
  }
  return agreement_ok ? 0 : 3;
}

void render_report_table(const sb::VerificationReport& rep) {
  auto sci = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return std::string(buf);
  };
  auto row = [](const char* name, bool ok, const std::string& value) {
    std::fprintf(stderr, "  %-28s %-5s %s\n", name, ok ? "pass" : "FAIL",
                 value.c_str());
  };
  std::fprintf(stderr, "verification (r = %g, tol = %g):\n", rep.r, rep.tol);
  row("double_vi worst_margin < 0", rep.double_vi.worst_margin < 0.0,
      sci(rep.double_vi.worst_margin) + " over " +
          std::to_string(rep.double_vi.samples) + " samples");
  row("minty_sup <= tol", rep.minty.estimate <= rep.tol, sci(rep.minty.estimate));
  row("saddle violations == 0", rep.saddle.violations == 0,
      std::to_string(rep.saddle.violations) + " of " +
          std::to_string(rep.saddle.samples));
  row("uniqueness clusters == 1", rep.uniqueness.clusters == 1,
      std::to_string(rep.uniqueness.clusters) + " clusters, diameter " +
          sci(rep.uniqueness.max_pairwise_distance));
  row("stampacchia residual", rep.stampacchia_sup <= rep.tol,
      sci(rep.stampacchia_sup));
  std::fprintf(stderr, "  %-28s %s\n", "overall", rep.passed ? "PASS" : "FAIL");
  if (rep.monotonicity.violation_found)
    std::fprintf(stderr, "  field is non-monotone (witness value %g)\n",
                 rep.monotonicity.value);
}

int run_verify(const std::string& path, const std::string& solution_path,
               const CommonFlags& fl, int starts) {
  const LoadedProblem lp = load_problem(path, fl);

  sb::json sol_doc;
  try {
    sol_doc = sb::json::parse(read_file(solution_path));
  } catch (const nlohmann::json::exception& e) {
    throw sb::ParseError(sb::ParseError::Kind::malformed_document,
                         std::string("invalid solution file: ") + e.what());
  }
  if (sol_doc.contains("kind") && sol_doc["kind"] == "solution_pair")
    sol_doc = sol_doc["fixed_point"];
  const sb::SolutionCertificate sol = sb::solution_from_json(sol_doc);

  sb::VerifyOptions vopts;
  vopts.samples = fl.samples ? *fl.samples : lp.problem.config.budgets.verify_samples;
  if (vopts.samples < 1)
    throw sb::ParseError(sb::ParseError::Kind::bad_value, "samples must be >= 1");
  vopts.minty_starts = lp.problem.config.budgets.minty_starts;
  vopts.uniqueness_starts = starts;
  vopts.tol = fl.tol;
  vopts.seed = lp.seed;
  vopts.solve.tol = fl.tol;
  vopts.solve.seed = lp.seed;

  const sb::VerificationReport rep = sb::verify_solution(lp.problem.field, sol, vopts);
  write_output(sb::dump_report(sb::report_to_json(rep)), fl.out);
  render_report_table(rep);
  print_manifest("verify", lp.doc_text, lp.seed, fl.out);
  return rep.passed ? 0 : 3;
}

int run_sweep(const std::string& path, const CommonFlags& fl, int grid) {
  if (grid < 1)
    throw sb::ParseError(sb::ParseError::Kind::bad_value, "--r-grid must be >= 1");
  const LoadedProblem lp = load_problem(path, fl);
  const sb::ConstantsCertificate cert =
      sb::certify_field(lp.problem.field, lp.problem.config.budgets, lp.seed);
  if (!(cert.sigma > 0.0)) {
    std::cerr << kGateMessage << "\n";
    return 2;
  }

  const std::size_t n = lp.problem.field.dim;
  std::ostringstream csv;
  csv << "r";
  for (std::size_t j = 1; j <= n; ++j) csv << ",x" << j;
  csv << ",fixed_point_residual,stampacchia,worst_margin,converged\n";

  sb::SolveOptions sopts;
  sopts.tol = fl.tol;
  sopts.seed = lp.seed;
  sb::VerifyOptions vopts;
  vopts.samples = fl.samples ? *fl.samples
                             : std::max<long>(lp.problem.config.budgets.verify_samples / 10,
                                              1000);
  vopts.minty_starts = std::min(lp.problem.config.budgets.minty_starts, 8);
  vopts.uniqueness_starts = 8;
  vopts.tol = fl.tol;
  vopts.seed = lp.seed;
  vopts.solve = sopts;

  bool all_ok = true;
  for (int i = 1; i <= grid; ++i) {
    // geometric grid over (r_max/100, r_max], resolving the small radii
    const double frac = (grid == 1)
                            ? 1.0
                            : std::pow(100.0, -static_cast<double>(grid - i) /
                                                  static_cast<double>(grid - 1));
    const double r = cert.r_max * frac;
    const sb::SolutionCertificate sol = sb::fixed_point_solve(lp.problem.field, r, sopts);
    const sb::VerificationReport rep = sb::verify_solution(lp.problem.field, sol, vopts);
    const bool ok = sol.converged && rep.passed;
    all_ok = all_ok && ok;
    csv << format_csv_double(r);
    for (std::size_t j = 0; j < n; ++j) csv << "," << format_csv_double(sol.x_star[j]);
    csv << "," << format_csv_double(sol.residuals.fixed_point) << ","
        << format_csv_double(sol.residuals.stampacchia) << ","
        << format_csv_double(rep.double_vi.worst_margin) << "," << (ok ? 1 : 0)
        << "\n";
  }

  write_output(csv.str(), fl.out);
  print_manifest("sweep", lp.doc_text, lp.seed, fl.out);
  return all_ok ? 0 : 3;
}

struct DemoSpec {
  const char* name;
  const char* description;
  sb::ProblemConfig config;
  std::string radius;  // "max" or a number
};

std::vector<DemoSpec> demo_registry() {
  std::vector<DemoSpec> demos;
  {
    sb::ProblemConfig cfg;
    cfg.family = sb::Family::constant;
    cfg.dimension = 2;
    cfg.rho = 1.0;
    cfg.b = sb::Vec{1.0, 0.0};
    demos.push_back({"constant", "constant field, closed-form solution", cfg, "0.5"});
  }
  {
    sb::ProblemConfig cfg;
    cfg.family = sb::Family::affine;
    cfg.dimension = 2;
    cfg.rho = 1.0;
    cfg.A = sb::Mat::identity(2);
    cfg.b = sb::Vec{2.0, 0.0};
    demos.push_back({"affine", "monotone affine field", cfg, "max"});
  }
  {
    sb::ProblemConfig cfg;
    cfg.family = sb::Family::affine;
    cfg.dimension = 2;
    cfg.rho = 1.0;
    sb::Mat A(2);
    A(0, 0) = 1.0;
    A(1, 1) = -0.2;
    cfg.A = A;
    cfg.b = sb::Vec{2.0, 0.0};
    demos.push_back({"nonmonotone", "non-monotone affine field", cfg, "max"});
  }
  {
    sb::ProblemConfig cfg;
    cfg.family = sb::Family::shifted;
    cfg.dimension = 2;
    cfg.rho = 0.5;
    cfg.d = sb::Vec{1.0, 0.0};
    demos.push_back({"thm24-quadratic",
                     "componentwise-quadratic base field shifted to make every "
                     "radius up to rho admissible",
                     cfg, "max"});
  }
  return demos;
}

int run_demo(const std::string& name, const CommonFlags& fl) {
  const auto demos = demo_registry();
  const DemoSpec* spec = nullptr;
  for (const auto& d : demos)
    if (name == d.name) spec = &d;
  if (!spec) {
    std::cerr << "unknown demo '" << name << "'. available:\n";
    for (const auto& d : demos)
      std::cerr << "  " << d.name << " - " << d.description << "\n";
    return 1;
  }

  const std::string doc = sb::emit_problem(spec->config);
  const sb::Problem problem = sb::parse_problem(doc);
  const std::uint64_t seed = fl.seed ? *fl.seed : problem.config.seed;

  std::ostringstream report;
  report << "demo " << spec->name << ": " << spec->description << "\n";

  const sb::ConstantsCertificate cert =
      sb::certify_field(problem.field, problem.config.budgets, seed);
  report << "  certify: theta=" << cert.theta.value << " gamma=" << cert.gamma.value
         << " M=" << cert.M << " sigma=" << cert.sigma << " r_max=" << cert.r_max
         << "\n";
  if (!(cert.sigma > 0.0)) {
    std::cout << report.str();
    std::cerr << kGateMessage << "\n";
    return 2;
  }

  const double r = spec->radius == "max" ? cert.r_max : std::stod(spec->radius);
  sb::SolveOptions sopts;
  sopts.tol = fl.tol;
  sopts.seed = seed;
  const sb::SolutionCertificate fp = sb::fixed_point_solve(problem.field, r, sopts);
  const sb::SolutionCertificate sd = sb::saddle_solve(problem.field, r, cert.M, sopts);
  const double agreement = sb::distance(fp.x_star, sd.x_star);
  report << "  solve: r=" << r << " fixed-point iters=" << fp.iterations
         << " saddle iters=" << sd.iterations << " agreement=" << agreement << "\n";
  report << "  x* = [";
  for (std::size_t j = 0; j < fp.x_star.size(); ++j)
    report << (j ? ", " : "") << fp.x_star[j];
  report << "]\n";

  sb::VerifyOptions vopts;
  vopts.samples = fl.samples ? *fl.samples : problem.config.budgets.verify_samples;
  vopts.minty_starts = problem.config.budgets.minty_starts;
  vopts.tol = fl.tol;
  vopts.seed = seed;
  vopts.solve = sopts;
  const sb::VerificationReport rep = sb::verify_solution(problem.field, fp, vopts);
  report << "  verify: worst_margin=" << rep.double_vi.worst_margin
         << " minty=" << rep.minty.estimate << " saddle_violations="
         << rep.saddle.violations << " clusters=" << rep.uniqueness.clusters << "\n";
  if (rep.monotonicity.violation_found) {
    report << "  monotonicity: violating pair found, value=" << rep.monotonicity.value
           << " at x=[";
    for (std::size_t j = 0; j < rep.monotonicity.x.size(); ++j)
      report << (j ? ", " : "") << rep.monotonicity.x[j];
    report << "], y=[";
    for (std::size_t j = 0; j < rep.monotonicity.y.size(); ++j)
      report << (j ? ", " : "") << rep.monotonicity.y[j];
    report << "]\n";
  } else {
    report << "  monotonicity: no violation in " << rep.monotonicity.samples
           << " sampled pairs\n";
  }

  const bool pass = fp.converged && sd.converged && agreement <= 10.0 * fl.tol &&
                    rep.passed;
  report << (pass ? "  PASS" : "  FAIL") << "\n";
  std::cout << report.str();
  print_manifest("demo", doc, seed, fl.out);
  return pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "smallball: solve and certify the strict double variational inequality "
      "on small balls for C^{1,1} vector fields"};
  app.set_version_flag("--version", sb::kVersion);
  app.require_subcommand(1);

  std::string problem_path, solution_path, r_arg = "max", solver = "fixed-point",
              demo_name;
  bool override_radius = false;
  int grid = 0, starts = 50;
  CommonFlags fl_certify, fl_solve, fl_verify, fl_sweep, fl_demo;

  CLI::App* certify = app.add_subcommand("certify", "Compute the constants certificate");
  certify->add_option("problem", problem_path, "Problem JSON document")->required();
  add_common(certify, fl_certify);

  CLI::App* solve = app.add_subcommand("solve", "Find x* on the r-sphere");
  solve->add_option("problem", problem_path, "Problem JSON document")->required();
  solve->add_option("--r", r_arg, "Radius (number or 'max')")->default_val("max");
  solve->add_option("--solver", solver, "fixed-point | saddle | both")
      ->default_val("fixed-point");
  solve->add_flag("--override-radius", override_radius,
                  "Allow radii above r_max (experimental)");
  add_common(solve, fl_solve);

  CLI::App* verify = app.add_subcommand("verify", "Verify a solution certificate");
  verify->add_option("problem", problem_path, "Problem JSON document")->required();
  verify->add_option("solution", solution_path, "Solution certificate JSON")->required();
  verify->add_option("--starts", starts, "Uniqueness multistart count")->default_val(50);
  add_common(verify, fl_verify);

  CLI::App* sweep = app.add_subcommand("sweep", "Trace the solution branch x*(r)");
  sweep->add_option("problem", problem_path, "Problem JSON document")->required();
  sweep->add_option("--r-grid", grid, "Number of radii in (r_max/100, r_max]")
      ->required();
  add_common(sweep, fl_sweep);

  CLI::App* demo = app.add_subcommand("demo", "Run a named built-in scenario");
  demo->add_option("name", demo_name, "Demo name")->required();
  add_common(demo, fl_demo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (certify->parsed()) return run_certify(problem_path, fl_certify);
    if (solve->parsed())
      return run_solve(problem_path, fl_solve, r_arg, solver, override_radius);
    if (verify->parsed())
      return run_verify(problem_path, solution_path, fl_verify, starts);
    if (sweep->parsed()) return run_sweep(problem_path, fl_sweep, grid);
    if (demo->parsed()) return run_demo(demo_name, fl_demo);
  } catch (const sb::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const sb::GateError& e) {
    std::cerr << "gate: " << e.what() << "\n";
    return 2;
  } catch (const sb::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

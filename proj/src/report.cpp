#include "smallball/report.hpp"

#include <cstdint>

#include "smallball/errors.hpp"
#include "smallball/version.hpp"

namespace smallball {

namespace {

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Vec vec_from_json(const json& j) {
  Vec v;
  for (const auto& e : j) v.push_back(e.get<double>());
  return v;
}

}  // namespace

json certificate_to_json(const ConstantsCertificate& cert) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "constants_certificate";
  j["n"] = cert.n;
  j["rho"] = cert.rho;
  j["theta"] = {{"value", cert.theta.value},
                {"provenance", provenance_name(cert.theta.provenance)}};
  j["gamma"] = {{"value", cert.gamma.value},
                {"provenance", provenance_name(cert.gamma.provenance)}};
  j["M"] = cert.M;
  j["sigma"] = cert.sigma;
  j["delta"] = cert.delta;
  j["r_max"] = cert.r_max;
  j["sigma_witness_y"] = vec_to_json(cert.sigma_witness);
  j["budgets"] = {{"theta_samples", cert.budgets.theta_samples},
                  {"gamma_samples", cert.budgets.gamma_samples},
                  {"minty_starts", cert.budgets.minty_starts},
                  {"verify_samples", cert.budgets.verify_samples}};
  return j;
}

json solution_to_json(const SolutionCertificate& sol) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "solution_certificate";
  j["solver"] = sol.solver;
  j["seed"] = sol.seed;
  j["r"] = sol.r;
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  j["x_star"] = vec_to_json(sol.x_star);
  j["y_star"] = vec_to_json(sol.y_star);
  j["residuals"] = {{"fixed_point", sol.residuals.fixed_point},
                    {"sphere", sol.residuals.sphere},
                    {"stampacchia", sol.residuals.stampacchia},
                    {"saddle_gap", sol.residuals.saddle_gap},
                    {"xy_gap", sol.residuals.xy_gap}};
  json trace = json::array();
  for (const TraceEntry& t : sol.trace)
    trace.push_back({{"iteration", t.iteration}, {"residual", t.residual},
                     {"step", t.step}});
  j["trace"] = trace;
  j["diagnostic"] = sol.diagnostic;
  return j;
}

SolutionCertificate solution_from_json(const json& j) {
  SolutionCertificate sol;
  try {
    sol.solver = j.value("solver", std::string("?"));
    sol.seed = j.value("seed", std::uint64_t{0});
    sol.r = j.at("r").get<double>();
    sol.converged = j.value("converged", false);
    sol.iterations = j.value("iterations", 0);
    sol.x_star = vec_from_json(j.at("x_star"));
    if (j.contains("y_star")) sol.y_star = vec_from_json(j["y_star"]);
    if (j.contains("residuals")) {
      const auto& r = j["residuals"];
      sol.residuals.fixed_point = r.value("fixed_point", 0.0);
      sol.residuals.sphere = r.value("sphere", 0.0);
      sol.residuals.stampacchia = r.value("stampacchia", 0.0);
      sol.residuals.saddle_gap = r.value("saddle_gap", 0.0);
      sol.residuals.xy_gap = r.value("xy_gap", 0.0);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Kind::malformed_document,
                     std::string("invalid solution certificate: ") + e.what());
  }
  return sol;
}

json report_to_json(const VerificationReport& rep) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "verification_report";
  j["passed"] = rep.passed;
  j["r"] = rep.r;
  j["tol"] = rep.tol;
  j["seed"] = rep.seed;
  j["double_vi"] = {{"samples", rep.double_vi.samples},
                    {"worst_margin", rep.double_vi.worst_margin},
                    {"worst_normalized_margin", rep.double_vi.worst_normalized},
                    {"witness_y", vec_to_json(rep.double_vi.witness)}};
  j["stampacchia_sup"] = rep.stampacchia_sup;
  j["minty_sup"] = {{"estimate", rep.minty.estimate}, {"starts", rep.minty.starts}};
  j["saddle_check"] = {{"samples", rep.saddle.samples},
                       {"violations", rep.saddle.violations},
                       {"worst", rep.saddle.worst}};
  j["uniqueness"] = {{"starts", rep.uniqueness.starts},
                     {"converged", rep.uniqueness.converged},
                     {"clusters", rep.uniqueness.clusters},
                     {"max_pairwise_distance", rep.uniqueness.max_pairwise_distance}};
  json mono;
  mono["violation_found"] = rep.monotonicity.violation_found;
  mono["samples"] = rep.monotonicity.samples;
  if (rep.monotonicity.violation_found) {
    mono["pair"] = {{"x", vec_to_json(rep.monotonicity.x)},
                    {"y", vec_to_json(rep.monotonicity.y)},
                    {"value", rep.monotonicity.value}};
  }
  j["monotonicity"] = mono;
  return j;
}

json problem_to_json(const ProblemConfig& cfg) {
  return json::parse(emit_problem(cfg));
}

ProblemConfig problem_from_json(const json& j) {
  return parse_problem(j.dump()).config;
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  static const char* hexd = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hexd[h & 0xF];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace smallball

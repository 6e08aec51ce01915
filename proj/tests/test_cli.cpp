#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("smallball_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string cli_path() { return std::string(SMALLBALL_BIN_DIR) + "/smallball"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  const fs::path out_file = work_dir() / "stdout.txt";
  const std::string cmd =
      cli_path() + " " + args + " > " + out_file.string() + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  return r;
}

fs::path write_doc(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / name;
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p;
}

const char* kAffineDoc = R"({
  "family": "affine",
  "dimension": 2,
  "rho": 1.0,
  "parameters": { "A": [[1.0, 0.0], [0.0, 1.0]], "b": [2.0, 0.0] },
  "seed": 42
})";

const char* kGateDoc = R"({
  "family": "affine",
  "dimension": 2,
  "rho": 1.0,
  "parameters": { "A": [[1.0, 0.0], [0.0, 1.0]], "b": [0.0, 0.0] }
})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("certify: affine reference document") {
  const fs::path doc = write_doc("affine.json", kAffineDoc);
  const RunResult r = run_cli("certify " + doc.string());
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["kind"] == "constants_certificate");
  CHECK(j["r_max"].get<double>() == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(j["theta"]["provenance"] == "analytic");
}

TEST_CASE("certify: sigma = 0 exits with the gate code") {
  const fs::path doc = write_doc("gate.json", kGateDoc);
  const RunResult r = run_cli("certify " + doc.string());
  CHECK(r.exit_code == 2);
  const auto j = nlohmann::json::parse(r.out);  // certificate still printed
  CHECK(j["sigma"].get<double>() == 0.0);
  CHECK(j["r_max"].get<double>() == 0.0);
}

TEST_CASE("certify: malformed JSON exits 1") {
  const fs::path doc = write_doc("broken.json", "{ not json at all");
  CHECK(run_cli("certify " + doc.string()).exit_code == 1);
}

TEST_CASE("certify: missing file exits 1") {
  CHECK(run_cli("certify /nonexistent/problem.json").exit_code == 1);
}

TEST_CASE("solve: both solvers at r = max agree") {
  const fs::path doc = write_doc("affine.json", kAffineDoc);
  const RunResult r = run_cli("solve " + doc.string() + " --r max --solver both");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["kind"] == "solution_pair");
  CHECK(j["agreement"].get<double>() <= 1e-8);
  CHECK(j["fixed_point"]["converged"] == true);
  CHECK(j["saddle"]["converged"] == true);
  CHECK(j["fixed_point"]["x_star"][0].get<double>() ==
        doctest::Approx(-0.25).epsilon(1e-8));
}

TEST_CASE("solve: radius above r_max is gated, override allows it") {
  const fs::path doc = write_doc("affine.json", kAffineDoc);
  CHECK(run_cli("solve " + doc.string() + " --r 0.9").exit_code == 2);
  const RunResult forced =
      run_cli("solve " + doc.string() + " --r 0.3 --override-radius");
  CHECK((forced.exit_code == 0 || forced.exit_code == 3));
}

TEST_CASE("solve: invalid radius exits 1") {
  const fs::path doc = write_doc("affine.json", kAffineDoc);
  CHECK(run_cli("solve " + doc.string() + " --r nonsense").exit_code == 1);
  CHECK(run_cli("solve " + doc.string() + " --r 1.5").exit_code == 1);  // above rho
}

TEST_CASE("verify: solver output passes, perturbed solution fails") {
  const fs::path doc = write_doc("affine.json", kAffineDoc);
  const fs::path sol = work_dir() / "sol.json";
  REQUIRE(run_cli("solve " + doc.string() + " --r max --out " + sol.string())
              .exit_code == 0);

  const RunResult good = run_cli("verify " + doc.string() + " " + sol.string());
  REQUIRE(good.exit_code == 0);
  const auto j = nlohmann::json::parse(good.out);
  CHECK(j["passed"] == true);

  // tamper with x*: rotate it well off the solution
  auto tampered = nlohmann::json::parse(slurp(sol));
  tampered["x_star"] = {0.0, 0.25};
  tampered["y_star"] = {0.0, 0.25};
  const fs::path bad = write_doc("sol_bad.json", tampered.dump());
  const RunResult badr = run_cli("verify " + doc.string() + " " + bad.string());
  CHECK(badr.exit_code == 3);
  const auto jb = nlohmann::json::parse(badr.out);
  CHECK(jb["passed"] == false);
  CHECK(jb["double_vi"]["worst_margin"].get<double>() > 0.0);
}

TEST_CASE("verify: samples = 0 is a validation error") {
  const fs::path doc = write_doc("affine.json", kAffineDoc);
  const fs::path sol = work_dir() / "sol2.json";
  REQUIRE(run_cli("solve " + doc.string() + " --r max --out " + sol.string())
              .exit_code == 0);
  CHECK(run_cli("verify " + doc.string() + " " + sol.string() + " --samples 0")
            .exit_code == 1);
}

TEST_CASE("verify: missing solution file exits 1") {
  const fs::path doc = write_doc("affine.json", kAffineDoc);
  CHECK(run_cli("verify " + doc.string() + " /nonexistent/sol.json").exit_code == 1);
}

TEST_CASE("sweep: geometric grid, every row on the sphere") {
  const fs::path doc = write_doc("affine.json", kAffineDoc);
  const RunResult r = run_cli("sweep " + doc.string() + " --r-grid 5 --samples 2000");
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "r,x1,x2,fixed_point_residual,stampacchia,worst_margin,converged");
  int rows = 0;
  std::string line;
  double prev_r = 0.0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++rows;
    double rr, x1, x2, fp, st, wm;
    int conv;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%d", &rr, &x1, &x2,
                        &fp, &st, &wm, &conv) == 7);
    CHECK(rr > prev_r);  // increasing radii
    prev_r = rr;
    CHECK(std::fabs(std::sqrt(x1 * x1 + x2 * x2) - rr) <= 1e-8);
    CHECK(wm < 0.0);
    CHECK(conv == 1);
  }
  CHECK(rows == 5);
}

TEST_CASE("sweep: zero grid is a validation error") {
  const fs::path doc = write_doc("affine.json", kAffineDoc);
  CHECK(run_cli("sweep " + doc.string() + " --r-grid 0").exit_code == 1);
}

TEST_CASE("demo: registered scenarios pass, unknown name exits 1") {
  CHECK(run_cli("demo constant").exit_code == 0);
  CHECK(run_cli("demo nonmonotone --samples 4000").exit_code == 0);
  CHECK(run_cli("demo no-such-demo").exit_code == 1);
}

TEST_CASE("reports are byte-identical across runs") {
  const fs::path doc = write_doc("affine.json", kAffineDoc);
  const fs::path s1 = work_dir() / "det1.json";
  const fs::path s2 = work_dir() / "det2.json";
  REQUIRE(run_cli("solve " + doc.string() + " --r max --solver both --out " +
                  s1.string()).exit_code == 0);
  REQUIRE(run_cli("solve " + doc.string() + " --r max --solver both --out " +
                  s2.string()).exit_code == 0);
  CHECK(slurp(s1) == slurp(s2));

  const fs::path v1 = work_dir() / "ver1.json";
  const fs::path v2 = work_dir() / "ver2.json";
  REQUIRE(run_cli("verify " + doc.string() + " " + s1.string() + " --out " +
                  v1.string()).exit_code == 0);
  REQUIRE(run_cli("verify " + doc.string() + " " + s2.string() + " --out " +
                  v2.string()).exit_code == 0);
  CHECK(slurp(v1) == slurp(v2));
}

}  // TEST_SUITE

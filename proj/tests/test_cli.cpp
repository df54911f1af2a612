// End-to-end checks of the command-line front end. The binary path comes
// from the MARGULIS_CLI environment variable (set by ctest).

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

struct CliResult {
  int exit_code = -1;
  json report;
  std::string raw;
};

const char* cli_path() { return std::getenv("MARGULIS_CLI"); }

CliResult run_cli(const std::string& args) {
  const std::string out_path = "cli_test_output.json";
  const std::string cmd = std::string(cli_path()) + " " + args + " > " + out_path + " 2>/dev/null";
  CliResult res;
  const int status = std::system(cmd.c_str());
  res.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  res.raw = ss.str();
  if (!res.raw.empty() && res.raw[0] == '{') res.report = json::parse(res.raw);
  std::remove(out_path.c_str());
  return res;
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("classify-rep fixtures") {
  REQUIRE(cli_path() != nullptr);
  SUBCASE("the A3 fixture") {
    const auto res = run_cli("classify-rep A 3 --highest 5,0,1");
    CHECK(res.exit_code == 0);
    const auto& r = res.report["results"];
    CHECK(r["weight_count"] == 119);
    CHECK(r["dimension"] == 189);
    CHECK(r["swinging"] == true);
  }
  SUBCASE("SL3 on Sym^3") {
    const auto res = run_cli("classify-rep A 2 --sym 3");
    CHECK(res.exit_code == 0);
    CHECK(res.report["results"]["dimension"] == 10);
    CHECK(res.report["results"]["swinging"] == true);
  }
  SUBCASE("B2 adjoint") {
    const auto res = run_cli("classify-rep B 2 --adjoint");
    CHECK(res.exit_code == 0);
    CHECK(res.report["results"]["limited"] == true);
    CHECK(res.report["results"]["abundant"] == true);
  }
  SUBCASE("unknown specs exit with code 2") {
    CHECK(run_cli("classify-rep E 6 --adjoint").exit_code == 2);
    CHECK(run_cli("classify-rep A 3 --sym 2 --wedge 2").exit_code == 2);
  }
}

TEST_CASE("find-x0") {
  REQUIRE(cli_path() != nullptr);
  SUBCASE("C4 fixture reaches both wall patterns across seeds") {
    bool saw_wall = false, saw_interior = false;
    for (int seed = 1; seed <= 10 && !(saw_wall && saw_interior); ++seed) {
      const auto res =
          run_cli("find-x0 C 4 --highest 0,0,0,1 --seed " + std::to_string(seed));
      REQUIRE(res.exit_code == 0);
      const auto& pi = res.report["results"]["pi_x0"];
      if (pi.empty()) saw_interior = true;
      if (pi.size() == 1) saw_wall = true;
      CHECK(res.report["results"]["generically_symmetric"] == true);
      CHECK(res.report["results"]["extreme"] == true);
    }
    CHECK(saw_wall);
    CHECK(saw_interior);
  }
  SUBCASE("the trivial representation is refused with exit code 3") {
    CHECK(run_cli("find-x0 A 2 --highest 0,0").exit_code == 3);
  }
  SUBCASE("validating a known reference vector for the A3 fixture") {
    const auto res = run_cli("find-x0 A 3 --highest 5,0,1 --check 10,1,-1,-10");
    CHECK(res.exit_code == 0);
    CHECK(res.report["results"]["generically_symmetric"] == true);
    CHECK(res.report["results"]["extreme"] == true);
    CHECK(res.report["results"]["partition"]["eq"].size() == 3);
  }
  SUBCASE("reports are byte-identical for a fixed seed") {
    auto a = run_cli("find-x0 C 4 --highest 0,0,0,1 --seed 5");
    auto b = run_cli("find-x0 C 4 --highest 0,0,0,1 --seed 5");
    a.report.erase("timing_ms");
    b.report.erase("timing_ms");
    CHECK(a.report.dump() == b.report.dump());
  }
}

TEST_CASE("check-criterion") {
  REQUIRE(cli_path() != nullptr);
  const auto pass = run_cli("check-criterion A 2 --sym 3");
  CHECK(pass.exit_code == 0);
  CHECK(pass.report["results"]["criterion"] == true);
  CHECK(pass.report["results"]["witness"].size() == 10);
  CHECK(run_cli("check-criterion --group so21").exit_code == 0);
  CHECK(run_cli("check-criterion --group so32").exit_code == 1);
  CHECK(run_cli("check-criterion --group sl3_trivial").exit_code == 1);
}

TEST_CASE("margulis on an element file") {
  REQUIRE(cli_path() != nullptr);
  // two hyperbolic affine isometries of the so21 fixture, 4x4 row-major
  const double t = 0.8, u = 1.1, th = 0.7;
  auto boost = [&](double s) {
    return std::vector<double>{std::cosh(s), 0, std::sinh(s), 0, 1, 0, std::sinh(s), 0,
                               std::cosh(s)};
  };
  auto rot = [&](double a) {
    return std::vector<double>{std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1};
  };
  auto mul = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(9, 0.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) c[3 * i + j] += a[3 * i + k] * b[3 * k + j];
    return c;
  };
  auto extend = [](const std::vector<double>& lin, std::array<double, 3> tr) {
    json row = json::array();
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) row.push_back(lin[3 * i + j]);
      row.push_back(tr[i]);
    }
    row.push_back(0);
    row.push_back(0);
    row.push_back(0);
    row.push_back(1);
    return row;
  };
  json elements = json::array();
  elements.push_back(extend(boost(t), {0.3, 0.5, 0.1}));
  elements.push_back(extend(mul(mul(rot(th), boost(u)), rot(-th)), {-0.2, 0.9, 0.4}));
  {
    std::ofstream out("cli_demo_elements.json");
    out << elements.dump();
  }
  const auto res = run_cli("margulis --group so21 --elements cli_demo_elements.json");
  std::remove("cli_demo_elements.json");
  REQUIRE(res.exit_code == 0);
  CHECK(res.report["results"]["elements"].size() == 2);
  CHECK(res.report["results"]["max_inverse_identity_defect"].get<double>() <= 1e-6);
  for (const auto& row : res.report["results"]["elements"]) {
    CHECK(row.contains("margulis_invariant"));
    CHECK(row["s_x0"].get<double>() < 1.0);
  }
}

TEST_CASE("build-group and word-survey") {
  REQUIRE(cli_path() != nullptr);
  const auto build = run_cli("build-group --group so21 --k 2 --power 8 --seed 42");
  CHECK(build.exit_code == 0);
  CHECK(build.report["results"]["passes"] == true);

  const auto survey = run_cli(
      "word-survey --group so21 --k 2 --power 8 --max-len 4 --seed 42 --csv cli_survey.csv");
  CHECK(survey.exit_code == 0);
  CHECK(survey.report["results"]["pass"] == true);
  std::ifstream csv("cli_survey.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "word,length,s_x0,m_norm,deviation");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  std::remove("cli_survey.csv");
  CHECK(rows == survey.report["results"]["word_count"].get<int>());
}

TEST_CASE("additivity rows") {
  REQUIRE(cli_path() != nullptr);
  const auto res = run_cli("additivity --group so21 --trials 1 --seed 7 --text");
  CHECK(res.exit_code == 0);
  CHECK(res.raw.find("max_dev_m") != std::string::npos);
}

TEST_SUITE_END();

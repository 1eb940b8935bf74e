#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(REILLY_LAB_EXE) + " " + args + " >cli_stdout.txt 2>cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char ch : text) n += ch == '\n';
  return n;
}

}  // namespace

TEST_CASE("verify exit codes") {
  CHECK(run("verify --shape round_sphere --p 2") == 0);
  const std::string table = slurp("cli_stdout.txt");
  CHECK(table.rfind("schema_version,shape,p,lambda,main_bound,margin,equality\n", 0) == 0);
  CHECK(table.find("round_sphere,2,") != std::string::npos);
  CHECK(table.find(",true\n") != std::string::npos);

  CHECK(run("verify --shape round_sphere --level 3 --p 2 --inject-curvature-scale 0.5") == 1);
  CHECK(slurp("cli_stderr.txt").find("lambda_le_main") != std::string::npos);

  CHECK(run("verify --shape mobius_strip") == 2);
  CHECK(slurp("cli_stderr.txt").find("clifford_torus") != std::string::npos);
  CHECK(run("verify --shape round_sphere --no-such-flag") == 2);
  CHECK(run("verify --shape round_sphere --level 2 --p 2.5") == 2);
  CHECK(run("generate --shape mobius_strip") == 2);
}

TEST_CASE("hyperbolic verify reports the equality row") {
  CHECK(run("verify --shape geodesic_sphere_H3 --r 1 --p 2 --format json") == 0);
  const auto j = nlohmann::json::parse(slurp("cli_stdout.txt"));
  REQUIRE(j.size() == 1);
  CHECK(j[0]["c"] == -1);
  CHECK(j[0]["equality"]["main"] == true);
}

TEST_CASE("generate writes the documented vertex counts") {
  CHECK(run("generate --shape round_sphere --n 2 --radius 1 --ambient 3 --level 4 --out cli_s2.json") == 0);
  auto mesh = nlohmann::json::parse(slurp("cli_s2.json"));
  CHECK(mesh["vertices"].size() == 2562);

  CHECK(run("generate --shape clifford_torus --grid 64") == 0);
  mesh = nlohmann::json::parse(slurp("cli_stdout.txt"));
  CHECK(mesh["vertices"].size() == 4096);
}

TEST_CASE("sweep writes one row per p and plot data") {
  std::remove("cli_plot.csv");
  CHECK(run("verify --shape round_sphere --level 3 --p 1.5,2 --sweep --plot-csv cli_plot.csv --csv cli_summary.csv") == 0);
  const std::string summary = slurp("cli_summary.csv");
  CHECK(count_lines(summary) == 3);
  CHECK(summary.find("round_sphere,1.5,") != std::string::npos);
  CHECK(summary.find("round_sphere,2,") != std::string::npos);
  CHECK(count_lines(slurp("cli_plot.csv")) >= 3);
}

TEST_CASE("deterministic reports are byte identical") {
  const std::string args = "verify --shape ellipsoid --level 2 --p 1.5,2 --restarts 3 --deterministic --out ";
  CHECK(run(args + "cli_a.json") == 0);
  CHECK(run(args + "cli_b.json") == 0);
  const std::string a = slurp("cli_a.json");
  CHECK(!a.empty());
  CHECK(a == slurp("cli_b.json"));
  CHECK(nlohmann::json::parse(a)[0]["runtime_ms"] == 0);
}

TEST_CASE("spectrum, balance and corpus subcommands") {
  CHECK(run("corpus list --format json") == 0);
  CHECK(nlohmann::json::parse(slurp("cli_stdout.txt")).size() == 7);

  CHECK(run("spectrum --shape round_sphere --level 3 --p 2 --linear") == 0);
  auto j = nlohmann::json::parse(slurp("cli_stdout.txt"));
  CHECK(j["runs"][0].contains("linear"));

  CHECK(run("balance --shape ellipsoid --shift-x 0.5 --level 3 --p 1.5,2") == 0);
  j = nlohmann::json::parse(slurp("cli_stdout.txt"));
  for (const auto& r : j["runs"]) CHECK(r["converged"] == true);
  CHECK(run("balance --shape round_sphere --level 2") == 2);
}

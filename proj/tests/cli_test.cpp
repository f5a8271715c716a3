#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kepreg/cli.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <sys/wait.h>

using namespace kepreg;
using namespace kepreg::cli;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(KEPREG_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  while (const auto got = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string value_of(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

Scenario scenario_from(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("kepreg_cli_test_" + name);
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("format_number round-trips doubles") {
  for (double x : {0.1, -1.0 / 3.0, 1e-300, std::numbers::pi, 12345.678}) {
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(1.0) == "1");
}

TEST_CASE("parse_vector") {
  const auto v = parse_vector("1, -2.5,3e-1");
  REQUIRE(v.size() == 3);
  CHECK(v(1) == -2.5);
  CHECK(v(2) == 0.3);
  CHECK_THROWS_AS(parse_vector(""), DomainError);
  CHECK_THROWS_AS(parse_vector("1,x"), DomainError);
  CHECK_THROWS_AS(parse_vector("1,,2"), DomainError);
}

TEST_CASE("parse_scenario") {
  const auto sc = scenario_from("# circular\nn = 2\nq = 1,0\np = 0,1  # unit speed\nt_end = 6.5\n");
  CHECK(sc.n == 2);
  CHECK(sc.mode == Mode::regularized);
  CHECK(sc.t_end == 6.5);
  CHECK(sample_times(sc).size() == 100);
  CHECK(sample_times(sc).front() == 0.0);
  CHECK(sample_times(sc).back() == 6.5);

  const auto direct = scenario_from("n=1\nq=1\np=0\nt_end=1\nmode=direct\ndt=0.01\noutput_times=0,0.5,1\n");
  CHECK(direct.mode == Mode::direct);
  CHECK(sample_times(direct) == std::vector<double>{0.0, 0.5, 1.0});

  const char* bad[] = {
      "q=1,0\np=0,1\nt_end=1\n",                        // missing n
      "n=2\nq=1,0\np=0,1\nt_end=1\ncolour=red\n",       // unknown key
      "n=2\nq=1,0,0\np=0,1\nt_end=1\n",                 // wrong length
      "n=2\nq=1,0\np=0,1\nt_end=-1\n",                  // t_end
      "n=2\nq=1,0\np=0,1\nt_end=1\nmode=direct\n",      // no dt
      "n=2\nq=1,0\np=0,1\nt_end=1\nmode=fast\n",        // bad mode
      "n=2\nq=1,0\np=0,1\nt_end=1\noutput_times=0.5,0.2\n",
      "n=2\nq=1,0\np=0,1\nt_end=1\noutput_times=2\n",
      "n=2\nq=1,0\np=0,1\nt_end=1\noutput_count=1\n",
      "n=2\nn=2\nq=1,0\np=0,1\nt_end=1\n",              // duplicate
      "n=2\nq 1,0\n",                                   // no '='
      "n=1.5\nq=1\np=0\nt_end=1\n",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(scenario_from(text), DomainError);
  }
}

TEST_CASE("trajectory header") {
  CHECK(trajectory_header(2) == "t,q1,q2,p1,p2,H,L12,K1,K2,Knorm,flag");
  CHECK(trajectory_header(3) == "t,q1,q2,q3,p1,p2,p3,H,L12,L13,L23,K1,K2,K3,Knorm,flag");
}

TEST_CASE("regularized circular orbit returns after one period") {
  auto sc = scenario_from("n=2\nq=1,0\np=0,1\nt_end=6.283185307179586\n");
  std::ostringstream out, err;
  REQUIRE(write_trajectory(sc, out, err) == kSuccess);
  const auto rows = parse_csv(out.str());
  REQUIRE(rows.size() == 101);
  CHECK(rows[0].size() == 11);
  for (int col = 1; col <= 4; ++col) {
    CHECK(std::abs(std::stod(rows[100][col]) - std::stod(rows[1][col])) <= 1e-9);
  }
  // Invariants are conserved along the whole table.
  for (std::size_t r = 1; r < rows.size(); ++r) {
    for (int col = 5; col <= 9; ++col) CHECK(std::abs(std::stod(rows[r][col]) - std::stod(rows[1][col])) <= 1e-9);
    CHECK(rows[r][10] == "ok");
  }
}

TEST_CASE("regularized rectilinear orbit passes through the collision") {
  const double t_coll = std::numbers::pi / (2.0 * std::sqrt(2.0));
  auto sc = scenario_from("n=2\nq=1,0\np=0,0\nt_end=3\n");
  sc.output_times = {0.0, 0.5, t_coll, 2.0, 3.0};
  std::ostringstream out, err;
  REQUIRE(write_trajectory(sc, out, err) == kSuccess);
  const auto rows = parse_csv(out.str());
  REQUIRE(rows.size() == 6);
  CHECK(rows[3][10] == "collision");
  CHECK(rows[3][1].empty());
  CHECK(std::stod(rows[3][5]) == doctest::Approx(-1.0));
  CHECK(std::stod(rows[3][7]) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(std::stod(rows[3][8])) <= 1e-12);
  for (int r : {1, 2, 4, 5}) CHECK(rows[r][10] == "ok");
  // Past the collision the particle falls back out along the same line.
  CHECK(std::abs(std::stod(rows[4][2])) <= 1e-12);
  CHECK(std::stod(rows[4][1]) > 0.0);
}

TEST_CASE("direct mode through a collision is a numeric failure") {
  auto sc = scenario_from("n=2\nq=1,0\np=0,0\nt_end=3\nmode=direct\ndt=0.001\n");
  std::ostringstream out, err;
  CHECK(write_trajectory(sc, out, err) == kNumericFailure);
  CHECK(err.str().find("collision_approach") != std::string::npos);
}

TEST_CASE("direct mode agrees with the regularized mode away from collisions") {
  const std::string base = "n=2\nq=1,0\np=0.1,0.9\nt_end=3\noutput_count=4\n";
  std::ostringstream reg, direct, err;
  REQUIRE(write_trajectory(scenario_from(base), reg, err) == kSuccess);
  REQUIRE(write_trajectory(scenario_from(base + "mode=direct\ndt=1e-4\n"), direct, err) == kSuccess);
  const auto a = parse_csv(reg.str());
  const auto b = parse_csv(direct.str());
  REQUIRE(a.size() == b.size());
  for (std::size_t r = 1; r < a.size(); ++r)
    for (int col = 1; col <= 9; ++col) CHECK(std::abs(std::stod(a[r][col]) - std::stod(b[r][col])) <= 1e-6);
}

TEST_CASE("report lines") {
  SuiteReport report{"metric", 10, 2.5e-15, 1e-12, {}};
  CHECK(format_report_line(report) == "metric,10,2.5e-15,pass");
  report.failures.push_back({"x", 1.0, 0.0, 1e-12});
  CHECK(format_report_line(report) == "metric,10,2.5e-15,fail");
}

TEST_CASE("map subcommand") {
  const auto ls = run_cli("map --which ls --q 1,0 --p 0,1");
  REQUIRE(ls.code == kSuccess);
  const auto r = parse_vector(value_of(ls.out, "r"));
  const auto s = parse_vector(value_of(ls.out, "s"));
  CHECK((r - Eigen::Vector3d(0, 1, 0)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((s - Eigen::Vector3d(-1, 0, 0)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(value_of(ls.out, "at_puncture") == "false");
  CHECK(std::stod(value_of(ls.out, "check.H_delaunay")) == doctest::Approx(-0.5));

  const auto inv = run_cli("map --which ls-inverse --u 0,0,-1 --v -0.70710678,0,0");
  REQUIRE(inv.code == kSuccess);
  const auto q = parse_vector(value_of(inv.out, "q"));
  CHECK(q(0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(q(1)) <= 1e-12);

  const auto moser = run_cli("map --which moser --q 1,0 --p 0,1");
  REQUIRE(moser.code == kSuccess);
  CHECK(std::stod(value_of(moser.out, "check.norm_u")) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK(run_cli("map --which ls --q 0,0 --p 0,1").code == kInvalidInput);
  CHECK(run_cli("map --which spin --q 1,0 --p 0,1").code == kInvalidInput);
  CHECK(run_cli("map --which ls --q 1,0").code == kInvalidInput);
  CHECK(run_cli("map --which ls --q 1,a --p 0,1").code == kInvalidInput);
  CHECK(run_cli("").code == kInvalidInput);
  CHECK(run_cli("frobnicate").code == kInvalidInput);
}

TEST_CASE("collision error message names the cause") {
  const std::string cmd = std::string(KEPREG_CLI_PATH) + " map --which ls --q 0,0 --p 0,1 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  while (const auto got = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), got);
  pclose(pipe);
  CHECK(out.find("q must be nonzero") != std::string::npos);
}

TEST_CASE("propagate subcommand") {
  const auto circ = write_temp("circ.txt", "n=2\nq=1,0\np=0,1\nt_end=6.283185307179586\n");
  const auto line = write_temp("line.txt", "n=2\nq=1,0\np=0,0\nt_end=3\nmode=direct\ndt=0.001\n");
  const auto broken = write_temp("broken.txt", "n=2\nq=1,0\n");

  const auto a = run_cli("propagate --scenario " + circ.string());
  const auto b = run_cli("propagate --scenario " + circ.string());
  CHECK(a.code == kSuccess);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("t,q1,q2,p1,p2,H,L12,K1,K2,Knorm,flag\n", 0) == 0);

  CHECK(run_cli("propagate --scenario " + line.string()).code == kNumericFailure);
  CHECK(run_cli("propagate --scenario " + broken.string()).code == kInvalidInput);
  CHECK(run_cli("propagate --scenario /nonexistent/scenario.txt").code == kInvalidInput);

  const auto dir = std::filesystem::temp_directory_path() / "kepreg_cli_test_batch";
  std::filesystem::remove_all(dir);
  const auto batch = run_cli("propagate --scenario " + circ.string() + " --scenario " + line.string() +
                             " --out-dir " + dir.string());
  CHECK(batch.code == kNumericFailure);
  std::ifstream batch_csv(dir / "kepreg_cli_test_circ.csv");
  std::stringstream contents;
  contents << batch_csv.rdbuf();
  CHECK(contents.str() == a.out);
  CHECK(run_cli("propagate --scenario " + circ.string() + " --scenario " + line.string()).code == kInvalidInput);
}

TEST_CASE("verify subcommand") {
  CHECK(run_cli("verify --suite nope").code == kInvalidInput);
  const auto metric = run_cli("verify --suite metric --n 3 --samples 50 --seed 7");
  CHECK(metric.code == kSuccess);
  const auto rows = parse_csv(metric.out);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0][0] == "metric");
  CHECK(rows[0][1] == "50");
  CHECK(rows[0][3] == "pass");
  CHECK(run_cli("verify --suite metric --n 3 --samples 50 --seed 7").out == metric.out);
  CHECK(run_cli("verify --n 0").code == kInvalidInput);

  std::ostringstream out, err;
  CHECK(run_verify("mu-squared", 2, 30, 1, out, err) == kSuccess);
  CHECK(run_verify("unknown", 2, 30, 1, out, err) == kInvalidInput);
}

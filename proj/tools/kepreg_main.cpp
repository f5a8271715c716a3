// kepreg: apply regularization maps, propagate Kepler orbits, run property suites.

#include "kepreg/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <vector>

namespace {

using namespace kepreg;

int propagate_one(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
  std::ifstream in(scenario_path);
  if (!in) {
    err << "error: cannot open scenario " << scenario_path << '\n';
    return cli::kInvalidInput;
  }
  cli::Scenario scenario;
  try {
    scenario = cli::parse_scenario(in);
  } catch (const DomainError& e) {
    err << "error: " << scenario_path << ": " << e.what() << '\n';
    return cli::kInvalidInput;
  }
  return cli::write_trajectory(scenario, out, err);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moser and Ligon-Schaaf regularization of the Kepler problem"};
  app.require_subcommand(1);

  cli::MapRequest map_request;
  std::string q_text, p_text, u_text, v_text;
  auto* map_cmd = app.add_subcommand("map", "Apply a regularization map to one point");
  map_cmd->add_option("--which", map_request.which, "moser | moser-inverse | fibration | ls | ls-inverse")
      ->required();
  map_cmd->add_option("--q", q_text, "position, comma-separated");
  map_cmd->add_option("--p", p_text, "momentum, comma-separated");
  map_cmd->add_option("--u", u_text, "sphere point, comma-separated (n+1 entries)");
  map_cmd->add_option("--v", v_text, "sphere covector, comma-separated (n+1 entries)");

  std::vector<std::string> scenarios;
  std::string out_path;
  std::string out_dir;
  auto* prop_cmd = app.add_subcommand("propagate", "Propagate scenario file(s) to a trajectory CSV");
  prop_cmd->add_option("--scenario", scenarios, "scenario file; repeat for a batch")->required();
  prop_cmd->add_option("--out", out_path, "output CSV (single scenario; default stdout)");
  prop_cmd->add_option("--out-dir", out_dir, "output directory for a batch (<stem>.csv per scenario)");

  std::string suite = "all";
  Index n = 2;
  Index samples = 500;
  std::uint64_t seed = 42;
  std::string report_path;
  auto* verify_cmd = app.add_subcommand("verify", "Run property suites");
  verify_cmd->add_option("--suite", suite, "suite name or 'all'");
  verify_cmd->add_option("--n", n, "dimension")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--samples", samples, "samples per suite")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", seed, "random seed");
  verify_cmd->add_option("--out", report_path, "report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInvalidInput;
  }

  if (*map_cmd) {
    try {
      if (!q_text.empty()) map_request.q = cli::parse_vector(q_text);
      if (!p_text.empty()) map_request.p = cli::parse_vector(p_text);
      if (!u_text.empty()) map_request.u = cli::parse_vector(u_text);
      if (!v_text.empty()) map_request.v = cli::parse_vector(v_text);
    } catch (const DomainError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return cli::kInvalidInput;
    }
    return cli::run_map(map_request, std::cout, std::cerr);
  }

  if (*prop_cmd) {
    if (scenarios.size() == 1) {
      if (out_path.empty()) return propagate_one(scenarios.front(), std::cout, std::cerr);
      std::ofstream out(out_path);
      if (!out) {
        std::cerr << "error: cannot write " << out_path << '\n';
        return cli::kInvalidInput;
      }
      return propagate_one(scenarios.front(), out, std::cerr);
    }
    if (out_dir.empty()) {
      std::cerr << "error: a batch of scenarios needs --out-dir\n";
      return cli::kInvalidInput;
    }
    std::filesystem::create_directories(out_dir);
    // Scenarios are independent; each gets its own output and error buffer.
    std::vector<std::future<std::pair<int, std::string>>> jobs;
    for (const auto& path : scenarios) {
      jobs.push_back(std::async(std::launch::async, [path, out_dir] {
        const auto target = std::filesystem::path(out_dir) / (std::filesystem::path(path).stem().string() + ".csv");
        std::ofstream out(target);
        std::ostringstream err;
        const int code = out ? propagate_one(path, out, err) : int{cli::kInvalidInput};
        return std::make_pair(code, err.str());
      }));
    }
    int worst = cli::kSuccess;
    for (auto& job : jobs) {
      const auto [code, message] = job.get();
      std::cerr << message;
      worst = std::max(worst, code);
    }
    return worst;
  }

  if (report_path.empty()) return cli::run_verify(suite, n, samples, seed, std::cout, std::cerr);
  std::ofstream report(report_path);
  if (!report) {
    std::cerr << "error: cannot write " << report_path << '\n';
    return cli::kInvalidInput;
  }
  return cli::run_verify(suite, n, samples, seed, report, std::cerr);
}

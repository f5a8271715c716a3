#pragma once

// Command implementations behind the kepreg executable, kept in the library
// so the file formats can be tested without spawning processes.
//
// Scenario file: one `key = value` per line, `#` starts a comment.
//   n            dimension (required)
//   q, p         comma-separated decimals, length n (required)
//   t_end        final time > 0 (required)
//   mode         direct | regularized (default regularized)
//   dt           leapfrog step, required and > 0 in direct mode
//   output_times comma-separated sample times (optional)
//   output_count number of evenly spaced times in [0, t_end] (default 100)
//
// Trajectory CSV header: t,q1..qn,p1..pn,H,L12..L(n-1)n,K1..Kn,Knorm,flag
// Report lines:          name,samples,max_defect,pass|fail

#include "kepreg/core.hpp"
#include "kepreg/harness.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kepreg::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInvalidInput = 1,
  kVerificationFailed = 2,
  kNumericFailure = 3,
};

enum class Mode { direct, regularized };

struct Scenario {
  Index n = 0;
  VectorX<double> q;
  VectorX<double> p;
  double t_end = 0.0;
  double dt = 0.0;
  Mode mode = Mode::regularized;
  std::vector<double> output_times;
  Index output_count = 100;
};

/// 17 significant digits.
std::string format_number(double value);

/// Parses "1,0,-2.5"; throws DomainError(invalid_argument) on malformed input.
VectorX<double> parse_vector(const std::string& text);

/// Throws DomainError(invalid_argument) naming the offending key or invariant.
Scenario parse_scenario(std::istream& in);

/// Explicit output times when given, else output_count evenly spaced times on [0, t_end].
std::vector<double> sample_times(const Scenario& scenario);

std::string trajectory_header(Index n);

/// Writes the trajectory CSV; returns an ExitCode. Diagnostics go to `err`.
int write_trajectory(const Scenario& scenario, std::ostream& out, std::ostream& err);

struct MapRequest {
  std::string which;  // moser | moser-inverse | fibration | ls | ls-inverse
  std::optional<VectorX<double>> q, p, u, v;
};

const std::vector<std::string>& map_kinds();

/// Prints `key=value` lines: inputs, outputs, and constraint checks.
int run_map(const MapRequest& request, std::ostream& out, std::ostream& err);

std::string format_report_line(const SuiteReport& report);

/// `suite` is a registered name or "all".
int run_verify(const std::string& suite, Index n, Index samples, std::uint64_t seed,
               std::ostream& out, std::ostream& err);

}  // namespace kepreg::cli

#include "kepreg/cli.hpp"

#include "kepreg/dynamics.hpp"
#include "kepreg/ligon_schaaf.hpp"
#include "kepreg/moser.hpp"
#include "kepreg/symmetry.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace kepreg::cli {
namespace {

DomainError invalid(const std::string& message) {
  return DomainError(DomainReason::invalid_argument, message);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    throw invalid("cannot parse " + what + ": '" + t + "'");
  }
  if (used != t.size() || !std::isfinite(value)) {
    throw invalid("cannot parse " + what + ": '" + t + "'");
  }
  return value;
}

std::string join(const VectorX<double>& v) {
  std::string out;
  for (Index k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += format_number(v(k));
  }
  return out;
}

/// Columns H, L_ij (i<j), K_i, |K| from the so(n+1) momentum, which stays
/// finite on the collision fiber.
std::vector<double> invariant_columns(double energy, const MomentumMatrix<double>& extended, Index n) {
  std::vector<double> cols{energy};
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) cols.push_back(extended(i, j));
  const double k_scale = std::sqrt(-2.0 * energy);
  double k_norm2 = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double k = extended(i, n) * k_scale;
    cols.push_back(k);
    k_norm2 += k * k;
  }
  cols.push_back(std::sqrt(k_norm2));
  return cols;
}

void write_row(std::ostream& out, double t, const PhasePoint<double>* point,
               const std::vector<double>& invariants, Index n, const char* flag) {
  std::string row = format_number(t);
  for (Index k = 0; k < 2 * n; ++k) {
    row += ',';
    if (point) row += format_number(k < n ? point->q()(k) : point->p()(k - n));
  }
  for (const double c : invariants) row += ',' + format_number(c);
  row += ',';
  row += flag;
  out << row << '\n';
}

/// Direct-mode columns; the Lenz vector is used as is (no sqrt(-2H) needed).
std::vector<double> direct_columns(const PhasePoint<double>& pt) {
  const Index n = pt.dim();
  std::vector<double> cols{kepler_energy(pt)};
  const auto l = angular_momentum(pt);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) cols.push_back(l(i, j));
  const auto k = lenz_vector(pt);
  for (Index i = 0; i < n; ++i) cols.push_back(k(i));
  cols.push_back(k.norm());
  return cols;
}

}  // namespace

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

VectorX<double> parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(parse_number(item, "vector entry"));
  if (values.empty()) throw invalid("empty vector");
  return Eigen::Map<const VectorX<double>>(values.data(), static_cast<Index>(values.size()));
}

Scenario parse_scenario(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw invalid(fmt::format("line {}: expected key = value", line_no));
    const std::string key = trim(line.substr(0, eq));
    if (entries.count(key)) throw invalid("duplicate key: " + key);
    entries[key] = trim(line.substr(eq + 1));
  }

  static const std::vector<std::string> known = {"n", "q", "p", "t_end", "dt", "mode",
                                                 "output_times", "output_count"};
  for (const auto& [key, value] : entries) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw invalid("unknown key: " + key);
  }
  for (const char* required : {"n", "q", "p", "t_end"}) {
    if (!entries.count(required)) throw invalid(std::string("missing key: ") + required);
  }

  Scenario sc;
  const double n = parse_number(entries["n"], "n");
  if (n < 1 || n != std::floor(n)) throw invalid("n must be a positive integer");
  sc.n = static_cast<Index>(n);
  sc.q = parse_vector(entries["q"]);
  sc.p = parse_vector(entries["p"]);
  if (sc.q.size() != sc.n || sc.p.size() != sc.n) throw invalid("q and p must have length n");
  sc.t_end = parse_number(entries["t_end"], "t_end");
  if (!(sc.t_end > 0.0)) throw invalid("t_end must be positive");

  if (entries.count("mode")) {
    if (entries["mode"] == "direct") {
      sc.mode = Mode::direct;
    } else if (entries["mode"] == "regularized") {
      sc.mode = Mode::regularized;
    } else {
      throw invalid("mode must be direct or regularized");
    }
  }
  if (entries.count("dt")) sc.dt = parse_number(entries["dt"], "dt");
  if (sc.mode == Mode::direct && !(sc.dt > 0.0)) throw invalid("direct mode needs dt > 0");

  if (entries.count("output_times")) {
    const auto times = parse_vector(entries["output_times"]);
    sc.output_times.assign(times.data(), times.data() + times.size());
    for (std::size_t k = 0; k < sc.output_times.size(); ++k) {
      if (sc.output_times[k] < 0.0 || sc.output_times[k] > sc.t_end)
        throw invalid("output_times must lie in [0, t_end]");
      if (k > 0 && !(sc.output_times[k] > sc.output_times[k - 1]))
        throw invalid("output_times must be strictly increasing");
    }
  }
  if (entries.count("output_count")) {
    const double count = parse_number(entries["output_count"], "output_count");
    if (count < 2 || count != std::floor(count)) throw invalid("output_count must be an integer >= 2");
    sc.output_count = static_cast<Index>(count);
  }
  return sc;
}

std::vector<double> sample_times(const Scenario& scenario) {
  if (!scenario.output_times.empty()) return scenario.output_times;
  std::vector<double> times;
  const Index count = scenario.output_count;
  for (Index k = 0; k < count; ++k) {
    times.push_back(k + 1 == count ? scenario.t_end
                                   : scenario.t_end * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  return times;
}

std::string trajectory_header(Index n) {
  std::string h = "t";
  for (Index k = 1; k <= n; ++k) h += fmt::format(",q{}", k);
  for (Index k = 1; k <= n; ++k) h += fmt::format(",p{}", k);
  h += ",H";
  for (Index i = 1; i <= n; ++i)
    for (Index j = i + 1; j <= n; ++j) h += fmt::format(",L{}{}", i, j);
  for (Index k = 1; k <= n; ++k) h += fmt::format(",K{}", k);
  h += ",Knorm,flag";
  return h;
}

int write_trajectory(const Scenario& scenario, std::ostream& out, std::ostream& err) {
  const Index n = scenario.n;
  PhasePoint<double> start(scenario.q, scenario.p);
  const auto times = sample_times(scenario);
  out << trajectory_header(n) << '\n';

  try {
    if (scenario.mode == Mode::direct) {
      PhasePoint<double> current = start;
      double elapsed = 0.0;
      for (const double t : times) {
        if (t > elapsed) {
          current = kepler_integrate(current, t - elapsed, scenario.dt, Index{1} << 40).back();
          elapsed = t;
        }
        write_row(out, t, &current, direct_columns(current), n, "ok");
      }
      return kSuccess;
    }

    const auto image = ls_map(start).point;
    for (const double t : times) {
      const auto flowed = delaunay_flow(image, t);
      const auto momentum = sphere_momentum(flowed);
      const double energy = delaunay_energy(flowed);
      if (flowed.north_pole_gap() < Tolerances{}.constraint_tol) {
        write_row(out, t, nullptr, invariant_columns(energy, momentum, n), n, "collision");
        continue;
      }
      const auto point = ls_inverse(flowed);
      write_row(out, t, &point, invariant_columns(energy, momentum, n), n, "ok");
    }
    return kSuccess;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << " (" << to_string(e.reason()) << ")\n";
    return e.reason() == DomainReason::invalid_argument || e.reason() == DomainReason::collision_point ||
                   e.reason() == DomainReason::nonnegative_energy
               ? kInvalidInput
               : kNumericFailure;
  }
}

const std::vector<std::string>& map_kinds() {
  static const std::vector<std::string> kinds = {"moser", "moser-inverse", "fibration", "ls", "ls-inverse"};
  return kinds;
}

int run_map(const MapRequest& request, std::ostream& out, std::ostream& err) {
  const auto& kinds = map_kinds();
  if (std::find(kinds.begin(), kinds.end(), request.which) == kinds.end()) {
    err << "error: unknown map '" << request.which << "'\n";
    return kInvalidInput;
  }
  const bool phase_input = request.which == "moser" || request.which == "fibration" || request.which == "ls";
  try {
    out << "which=" << request.which << '\n';
    if (phase_input) {
      if (!request.q || !request.p) throw invalid("map " + request.which + " needs --q and --p");
      const PhasePoint<double> pt(*request.q, *request.p);
      out << "q=" << join(pt.q()) << '\n' << "p=" << join(pt.p()) << '\n';
      const double energy = kepler_energy(pt);
      SphereCotangentPoint<double> sp = moser_map(pt);
      bool puncture = false;
      if (request.which == "fibration") {
        sp = moser_fibration(pt);
      } else if (request.which == "ls") {
        auto image = ls_map(pt);
        sp = image.point;
        puncture = image.at_puncture;
      }
      const char* a = request.which == "ls" ? "r" : "u";
      const char* b = request.which == "ls" ? "s" : "v";
      out << a << '=' << join(sp.u()) << '\n' << b << '=' << join(sp.v()) << '\n';
      out << "check.norm_" << a << '=' << format_number(sp.u().norm()) << '\n';
      out << "check." << a << "_dot_" << b << '=' << format_number(sp.u().dot(sp.v())) << '\n';
      out << "check.H=" << format_number(energy) << '\n';
      out << "check.H_delaunay=" << (sp.in_T_cross() ? format_number(delaunay_energy(sp)) : "undefined") << '\n';
      if (request.which == "ls") out << "at_puncture=" << (puncture ? "true" : "false") << '\n';
      return kSuccess;
    }

    if (!request.u || !request.v) throw invalid("map " + request.which + " needs --u and --v");
    const SphereCotangentPoint<double> sp(*request.u, *request.v);
    out << "u=" << join(sp.u()) << '\n' << "v=" << join(sp.v()) << '\n';
    PhasePoint<double> pt = request.which == "ls-inverse" ? ls_inverse(sp) : moser_map_inverse(sp);
    out << "q=" << join(pt.q()) << '\n' << "p=" << join(pt.p()) << '\n';
    out << "check.norm_u=" << format_number(sp.u().norm()) << '\n';
    out << "check.u_dot_v=" << format_number(sp.u().dot(sp.v())) << '\n';
    out << "check.H=" << format_number(kepler_energy(pt)) << '\n';
    out << "check.H_delaunay=" << (sp.in_T_cross() ? format_number(delaunay_energy(sp)) : "undefined") << '\n';
    return kSuccess;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << " (" << to_string(e.reason()) << ")\n";
    return kInvalidInput;
  }
}

std::string format_report_line(const SuiteReport& report) {
  return fmt::format("{},{},{},{}", report.name, report.samples, format_number(report.max_defect),
                     report.passed() ? "pass" : "fail");
}

int run_verify(const std::string& suite, Index n, Index samples, std::uint64_t seed,
               std::ostream& out, std::ostream& err) {
  std::vector<std::string> names;
  if (suite == "all") {
    names = suite_names();
  } else if (std::find(suite_names().begin(), suite_names().end(), suite) != suite_names().end()) {
    names.push_back(suite);
  } else {
    err << "error: unknown suite '" << suite << "'\n";
    return kInvalidInput;
  }
  bool all_passed = true;
  for (const auto& name : names) {
    SuiteReport report;
    try {
      report = run_suite(name, n, samples, seed);
    } catch (const DomainError& e) {
      err << "error: " << name << ": " << e.what() << '\n';
      return kInvalidInput;
    }
    out << format_report_line(report) << '\n';
    if (!report.passed()) {
      all_passed = false;
      constexpr std::size_t shown = 5;
      for (std::size_t k = 0; k < std::min(shown, report.failures.size()); ++k) {
        const auto& f = report.failures[k];
        err << name << ": defect " << format_number(f.observed) << " > " << format_number(f.tolerance)
            << " at " << f.input << '\n';
      }
    }
  }
  return all_passed ? kSuccess : kVerificationFailed;
}

}  // namespace kepreg::cli

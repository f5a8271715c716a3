#include "kepreg/harness.hpp"

#include "kepreg/dynamics.hpp"
#include "kepreg/ligon_schaaf.hpp"
#include "kepreg/moser.hpp"
#include "kepreg/stereo.hpp"
#include "kepreg/symmetry.hpp"

#include <Eigen/QR>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

namespace kepreg {
namespace {

// Finite-difference stencils run in extended precision so that rounding
// (~eps/h) stays well below the O(h^2) truncation error being bounded.
using Wide = long double;

constexpr double kExact = 1e-12;
constexpr double kScaling = 1e-10;
constexpr double kOde = 1e-6;
constexpr double kBracket = 1e-8;

// Sampled points stay away from the singular sets.
constexpr double kMinPoleGap = 0.05;
constexpr double kMinPericenter = 0.3;
constexpr double kOdeStep = 1e-5;
constexpr Index kMaxOdeSamples = 100;

std::string describe(const VectorX<double>& a, const VectorX<double>& b, const char* la,
                     const char* lb) {
  return fmt::format("{}=({:.17g}) {}=({:.17g})", la, fmt::join(a, ","), lb, fmt::join(b, ","));
}

std::string describe(const PhasePoint<double>& pt) { return describe(pt.q(), pt.p(), "q", "p"); }

/// Accumulates per-sample defects against a fixed tolerance.
class Collector {
 public:
  Collector(std::string name, double tolerance) {
    report_.name = std::move(name);
    report_.tolerance = tolerance;
  }

  void add(const std::string& input, double defect) {
    if (!(defect <= report_.tolerance)) {
      report_.failures.push_back({input, defect, 0.0, report_.tolerance});
    }
    if (std::isnan(defect)) {
      report_.max_defect = defect;
    } else if (!std::isnan(report_.max_defect)) {
      report_.max_defect = std::max(report_.max_defect, defect);
    }
  }

  SuiteReport finish(Index samples) {
    report_.samples = samples;
    std::sort(report_.failures.begin(), report_.failures.end(),
              [](const SuiteFailure& a, const SuiteFailure& b) { return a.input < b.input; });
    return std::move(report_);
  }

 private:
  SuiteReport report_;
};

double max_abs_diff(const VectorX<double>& a, const VectorX<double>& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

std::vector<PlaneCotangentPoint<double>> sample_plane(Index n, Index count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  std::vector<PlaneCotangentPoint<double>> out;
  for (Index i = 0; i < count; ++i) {
    VectorX<double> x(n), y(n);
    for (Index k = 0; k < n; ++k) x(k) = unit(rng);
    for (Index k = 0; k < n; ++k) y(k) = unit(rng);
    out.emplace_back(std::move(x), std::move(y));
  }
  return out;
}

VectorX<double> gaussian_vector(Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  VectorX<double> v(m);
  for (Index k = 0; k < m; ++k) v(k) = normal(rng);
  return v;
}

/// Points of T_- with |v| in [0.3, 3] whose base point keeps its distance from the pole.
std::vector<SphereCotangentPoint<double>> sample_sphere(Index n, Index count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> speed(0.3, 3.0);
  std::vector<SphereCotangentPoint<double>> out;
  while (static_cast<Index>(out.size()) < count) {
    VectorX<double> u = gaussian_vector(n + 1, rng).normalized();
    VectorX<double> v = gaussian_vector(n + 1, rng);
    v -= u.dot(v) * u;
    v *= speed(rng) / v.norm();
    if (1.0 - u(n) < kMinPoleGap) continue;
    out.push_back(SphereCotangentPoint<double>::projected(std::move(u), std::move(v)));
  }
  return out;
}

bool pole_regular(const PhasePoint<double>& pt) {
  return ls_map(pt).point.north_pole_gap() >= kMinPoleGap &&
         moser_fibration(pt).north_pole_gap() >= kMinPoleGap;
}

double pericenter(const PhasePoint<double>& pt) {
  const double a = -1.0 / (2.0 * kepler_energy(pt));
  return a * (1.0 - lenz_vector(pt).norm());
}

/// P_- samples away from the north-pole fiber on both sides of the LS rotation.
std::vector<PhasePoint<double>> sample_regular(Index n, Index count, std::uint64_t seed) {
  std::vector<PhasePoint<double>> out;
  std::uint64_t batch_seed = seed;
  while (static_cast<Index>(out.size()) < count) {
    for (auto& pt : sample_P_minus(n, count, batch_seed++)) {
      if (static_cast<Index>(out.size()) == count) break;
      if (pole_regular(pt)) out.push_back(std::move(pt));
    }
  }
  return out;
}

/// Regular samples whose orbits keep a pericenter >= kMinPericenter, for ODE checks.
std::vector<PhasePoint<double>> sample_ode(Index n, Index count, std::uint64_t seed) {
  std::vector<PhasePoint<double>> out;
  std::uint64_t batch_seed = seed;
  while (static_cast<Index>(out.size()) < count) {
    for (auto& pt : sample_regular(n, count, batch_seed++)) {
      if (static_cast<Index>(out.size()) == count) break;
      if (pericenter(pt) >= kMinPericenter) out.push_back(std::move(pt));
    }
  }
  return out;
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
MatrixX<double> random_orthogonal(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixX<double> g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<MatrixX<double>> qr(g);
  return qr.householderQ() * MatrixX<double>::Identity(n, n);
}

template <typename Scalar>
VectorX<Scalar> symplectic_gradient(const std::function<Scalar(const VectorX<Scalar>&)>& f,
                                    const VectorX<Scalar>& z, Scalar h) {
  const auto wrapped = [&](const VectorX<Scalar>& at) {
    VectorX<Scalar> out(1);
    out(0) = f(at);
    return out;
  };
  const VectorX<Scalar> grad = jacobian_richardson<Scalar>(wrapped, z, h).row(0).transpose();
  const Index m = z.size() / 2;
  VectorX<Scalar> field(z.size());
  field << grad.tail(m), -grad.head(m);
  return field;
}

// ---------------------------------------------------------------------------

SuiteReport stereo_roundtrip(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  Collector c("stereo-roundtrip", kExact);
  std::mt19937_64 rng(seed);
  for (const auto& pl : sample_plane(n, samples, rng)) {
    const auto back = to_plane(to_sphere(pl), tol.constraint_tol);
    c.add(describe(pl.x(), pl.y(), "x", "y"), max_abs_diff(back.to_vector(), pl.to_vector()));
  }
  for (const auto& sp : sample_sphere(n, samples, rng)) {
    const auto back = to_sphere(to_plane(sp, tol.constraint_tol));
    c.add(describe(sp.u(), sp.v(), "u", "v"), max_abs_diff(back.to_vector(), sp.to_vector()));
  }
  return c.finish(samples);
}

SuiteReport stereo_canonical(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  const Wide h = tol.fd_step;
  Collector c("stereo-canonical", 10.0 * tol.fd_step * tol.fd_step);
  std::mt19937_64 rng(seed);
  const auto map = [](const VectorX<Wide>& z) {
    return to_sphere(PlaneCotangentPoint<Wide>::from_vector(z)).to_vector();
  };
  for (const auto& pl : sample_plane(n, samples, rng)) {
    const Wide defect = symplectic_defect<Wide>(map, pl.to_vector().cast<Wide>(), h);
    c.add(describe(pl.x(), pl.y(), "x", "y"), static_cast<double>(defect));
  }
  return c.finish(samples);
}

SuiteReport metric(Index n, Index samples, std::uint64_t seed, const Tolerances&) {
  Collector c("metric", kExact);
  std::mt19937_64 rng(seed);
  for (const auto& pl : sample_plane(n, samples, rng)) {
    const auto sp = to_sphere(pl);
    const double a = pl.x().squaredNorm() + 1.0;
    const double expected = a * a * pl.y().squaredNorm() / 4.0;
    c.add(describe(pl.x(), pl.y(), "x", "y"), std::abs(sp.v().squaredNorm() - expected));
  }
  return c.finish(samples);
}

SuiteReport moser_symplectic(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  const Wide h = tol.fd_step;
  Collector c("moser-symplectic", 10.0 * tol.fd_step * tol.fd_step);
  const auto map = [](const VectorX<Wide>& z) {
    return moser_map(PhasePoint<Wide>::from_vector(z)).to_vector();
  };
  for (const auto& pt : sample_punctured(n, samples, seed)) {
    const Wide defect = symplectic_defect<Wide>(map, pt.to_vector().cast<Wide>(), h);
    c.add(describe(pt), static_cast<double>(defect));
  }
  return c.finish(samples);
}

SuiteReport fibration_scale(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  Collector c("fibration-scale", kScaling);
  for (const auto& pt : sample_P_minus(n, samples, seed)) {
    const auto fib = moser_fibration(pt).to_vector();
    const auto image = ls_map(pt, tol.constraint_tol).point;
    double defect = 0.0;
    for (const double rho : {0.5, 2.0, 10.0}) {
      const auto scaled = scale_phase(pt, rho);
      defect = std::max(defect, max_abs_diff(moser_fibration(scaled).to_vector(), fib));
      defect = std::max(defect, max_abs_diff(ls_map(scaled, tol.constraint_tol).point.to_vector(),
                                             scale_sphere(image, rho).to_vector()));
    }
    c.add(describe(pt), defect);
  }
  return c.finish(samples);
}

SuiteReport moser_levelset(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  const Wide h = tol.fd_step;
  Collector c("moser-levelset", 10.0 * tol.fd_step * tol.fd_step);
  std::mt19937_64 rng(seed);
  const std::function<Wide(const VectorX<Wide>&)> f = [](const VectorX<Wide>& z) {
    return aux_F(PlaneCotangentPoint<Wide>::from_vector(z));
  };
  const std::function<Wide(const VectorX<Wide>&)> g = [](const VectorX<Wide>& z) {
    return aux_G(PlaneCotangentPoint<Wide>::from_vector(z));
  };
  Index accepted = 0;
  while (accepted < samples) {
    // Put (x, y) on F = 1/2 by choosing |y| = 2/(x^2 + 1).
    const auto base = sample_plane(n, 1, rng).front();
    VectorX<double> y = gaussian_vector(n, rng).normalized() * (2.0 / (base.x().squaredNorm() + 1.0));
    const PlaneCotangentPoint<double> pl(base.x(), std::move(y));
    if (std::abs(aux_G(pl)) >= 1e-12) continue;
    ++accepted;
    const VectorX<Wide> z = pl.to_vector().cast<Wide>();
    const VectorX<Wide> diff = symplectic_gradient<Wide>(f, z, h) - symplectic_gradient<Wide>(g, z, h);
    c.add(describe(pl.x(), pl.y(), "x", "y"), static_cast<double>(diff.cwiseAbs().maxCoeff()));
  }
  return c.finish(samples);
}

SuiteReport ls_symplectic(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  const Wide h = tol.fd_step;
  Collector c("ls-symplectic", 10.0 * tol.fd_step * tol.fd_step);
  const auto map = [&](const VectorX<Wide>& z) {
    return ls_map(PhasePoint<Wide>::from_vector(z), tol.constraint_tol).point.to_vector();
  };
  for (const auto& pt : sample_regular(n, samples, seed)) {
    const Wide defect = symplectic_defect<Wide>(map, pt.to_vector().cast<Wide>(), h);
    c.add(describe(pt), static_cast<double>(defect));
  }
  return c.finish(samples);
}

SuiteReport ls_roundtrip(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  Collector c("ls-roundtrip", kScaling);
  for (const auto& pt : sample_regular(n, samples, seed)) {
    const auto back = ls_inverse(ls_map(pt, tol.constraint_tol).point, tol);
    c.add(describe(pt), max_abs_diff(back.to_vector(), pt.to_vector()));
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  Index accepted = 0;
  while (accepted < samples) {
    const auto sp = sample_sphere(n, 1, rng).front();
    const auto inv = ls_inverse_detailed(sp, tol);
    // Keep the unrotated base point away from the pole as well.
    if (moser_fibration(inv.point).north_pole_gap() < kMinPoleGap) continue;
    ++accepted;
    const auto again = ls_map(inv.point, tol.constraint_tol).point;
    c.add(describe(sp.u(), sp.v(), "r", "s"), max_abs_diff(again.to_vector(), sp.to_vector()));
  }
  return c.finish(samples);
}

SuiteReport ls_equivariance(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  Collector c("ls-equivariance", kExact);
  std::mt19937_64 rng(seed);
  for (const auto& pt : sample_regular(n, samples, seed)) {
    const double h = kepler_energy(pt);
    const auto image = ls_map(pt, tol.constraint_tol).point;

    const MatrixX<double> rot = random_orthogonal(n, rng);
    MatrixX<double> lifted = MatrixX<double>::Identity(n + 1, n + 1);
    lifted.topLeftCorner(n, n) = rot;
    const auto rotated = ls_map(PhasePoint<double>(rot * pt.q(), rot * pt.p()), tol.constraint_tol).point;
    double defect = std::max(max_abs_diff(rotated.u(), lifted * image.u()),
                             max_abs_diff(rotated.v(), lifted * image.v()));

    const auto fib = moser_fibration(pt);
    const double theta = ls_angle(pt).theta();
    const VectorX<double> s_unit = std::sqrt(-2.0 * h) * image.v();
    defect = std::max({defect, std::abs(image.u().dot(fib.u()) - std::cos(theta)),
                       std::abs(image.u().dot(fib.v()) - std::sin(theta)),
                       std::abs(s_unit.dot(fib.u()) + std::sin(theta)),
                       std::abs(s_unit.dot(fib.v()) - std::cos(theta))});

    defect = std::max(defect, std::abs(h + 1.0 / (2.0 * image.v().squaredNorm())));
    c.add(describe(pt), defect);
  }
  return c.finish(samples);
}

SuiteReport intertwine_flows(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  Collector c("intertwine-flows", kOde);
  const Index count = std::min(samples, kMaxOdeSamples);
  for (const auto& pt : sample_ode(n, count, seed)) {
    // Kepler flow vs Delaunay flow at t = 0.1, 1, 5.
    const auto image = ls_map(pt, tol.constraint_tol).point;
    PhasePoint<double> current = pt;
    double elapsed = 0.0;
    double defect = 0.0;
    for (const double t : {0.1, 1.0, 5.0}) {
      current = kepler_integrate(current, t - elapsed, kOdeStep, Index{1} << 40).back();
      elapsed = t;
      const auto direct = ls_map(current, tol.constraint_tol).point.to_vector();
      const auto flowed = delaunay_flow(image, t).to_vector();
      defect = std::max(defect, max_abs_diff(direct, flowed));
    }

    // On H = -1/2: Moser map of the Kepler orbit is the unit-speed great circle in arc time.
    const auto half = scale_phase(pt, std::sqrt(-2.0 * kepler_energy(pt)));
    const auto sphere0 = moser_map(half);
    const auto traj = kepler_integrate(half, 1.0, kOdeStep, 10);
    const double s = arc_time(traj).back().s;
    const auto moved = moser_map(traj.back());
    defect = std::max(defect, max_abs_diff(moved.u(), std::cos(s) * sphere0.u() + std::sin(s) * sphere0.v()));
    defect = std::max(defect, max_abs_diff(moved.v(), std::cos(s) * sphere0.v() - std::sin(s) * sphere0.u()));

    // Along the same orbit dr/dt = s and ds/dt = -r in the Ligon-Schaaf image.
    constexpr double delta = 1e-3;
    const auto mid = kepler_integrate(half, 0.5, kOdeStep, Index{1} << 40).back();
    const auto ahead = kepler_integrate(mid, delta, kOdeStep, Index{1} << 40).back();
    const auto behind = kepler_integrate(PhasePoint<double>(mid.q(), -mid.p()), delta, kOdeStep, Index{1} << 40).back();
    const PhasePoint<double> before(behind.q(), -behind.p());
    const auto rs_mid = ls_map(mid, tol.constraint_tol).point;
    const auto rs_ahead = ls_map(ahead, tol.constraint_tol).point;
    const auto rs_before = ls_map(before, tol.constraint_tol).point;
    const VectorX<double> dr = (rs_ahead.u() - rs_before.u()) / (2.0 * delta);
    const VectorX<double> ds = (rs_ahead.v() - rs_before.v()) / (2.0 * delta);
    defect = std::max(defect, max_abs_diff(dr, rs_mid.v()));
    defect = std::max(defect, max_abs_diff(ds, -rs_mid.u()));

    c.add(describe(pt), defect);
  }
  return c.finish(count);
}

SuiteReport momenta_pullback(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  Collector c("momenta-pullback", kExact);
  for (const auto& pt : sample_P_minus(n, samples, seed)) {
    const auto pulled = sphere_momentum(ls_map(pt, tol.constraint_tol).point);
    const auto direct = extended_momentum(pt);
    c.add(describe(pt), max_abs_diff(pulled.upper(), direct.upper()));
  }
  return c.finish(samples);
}

/// so(m) structure constants in the sign convention {L_ij, L_jk} = L_ki.
double so_bracket_expected(const MomentumMatrix<double>& l, Index i, Index j, Index k, Index m) {
  const auto delta = [](Index a, Index b) { return a == b ? 1.0 : 0.0; };
  return -(delta(j, k) * l(i, m) + delta(i, m) * l(j, k) - delta(i, k) * l(j, m) -
           delta(j, m) * l(i, k));
}

SuiteReport so_brackets(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  Collector c("so(n+1)-brackets", kBracket);
  const Wide h = tol.fd_step;
  std::vector<std::pair<Index, Index>> generators;
  std::vector<ScalarField<Wide>> fields;
  for (Index i = 0; i <= n; ++i)
    for (Index j = i + 1; j <= n; ++j) {
      generators.emplace_back(i, j);
      fields.push_back(momentum_component_field<Wide>(i, j));
    }
  for (const auto& pt : sample_P_minus(n, samples, seed)) {
    const auto l = extended_momentum(pt);
    const auto wide = pt.cast<Wide>();
    double defect = 0.0;
    for (std::size_t a = 0; a < generators.size(); ++a) {
      for (std::size_t b = a + 1; b < generators.size(); ++b) {
        const auto [i, j] = generators[a];
        const auto [k, m] = generators[b];
        const Wide got = poisson_bracket_richardson(fields[a], fields[b], wide, h);
        defect = std::max(defect, std::abs(static_cast<double>(got) - so_bracket_expected(l, i, j, k, m)));
      }
    }
    c.add(describe(pt), defect);
  }
  return c.finish(samples);
}

SuiteReport lenz_brackets(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  Collector c("lenz-brackets", kBracket);
  const Wide h = tol.fd_step;
  std::vector<ScalarField<Wide>> k_fields;
  for (Index i = 0; i < n; ++i) k_fields.push_back(lenz_component_field<Wide>(i));
  for (const auto& pt : sample_punctured(n, samples, seed)) {
    const double energy = kepler_energy(pt);
    const auto l = angular_momentum(pt);
    const auto k = lenz_vector(pt);
    const auto wide = pt.cast<Wide>();
    double defect = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const auto l_field = angular_momentum_field<Wide>(i, j);
        for (Index m = 0; m < n; ++m) {
          const double expected = (i == m ? k(j) : 0.0) - (j == m ? k(i) : 0.0);
          const Wide got = poisson_bracket_richardson(l_field, k_fields[m], wide, h);
          defect = std::max(defect, std::abs(static_cast<double>(got) - expected));
        }
        const Wide kk = poisson_bracket_richardson(k_fields[i], k_fields[j], wide, h);
        defect = std::max(defect, std::abs(static_cast<double>(kk) + 2.0 * energy * l(i, j)));
      }
    }
    c.add(describe(pt), defect);
  }
  return c.finish(samples);
}

SuiteReport mu_squared(Index n, Index samples, std::uint64_t seed, const Tolerances&) {
  Collector c("mu-squared", kExact);
  for (const auto& pt : sample_P_minus(n, samples, seed)) {
    c.add(describe(pt), std::abs(moment_map_norm(pt) * (-2.0 * kepler_energy(pt)) - 1.0));
  }
  return c.finish(samples);
}

SuiteReport conservation(Index n, Index samples, std::uint64_t seed, const Tolerances& tol) {
  Collector c("conservation", kScaling);
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  std::uniform_real_distribution<double> time(0.0, 10.0);
  Index accepted = 0;
  std::uint64_t batch_seed = seed;
  while (accepted < samples) {
    for (const auto& pt : sample_regular(n, samples, batch_seed++)) {
      if (accepted == samples) break;
      const double t = time(rng);
      PhasePoint<double> end = pt;
      try {
        end = regularized_propagate(pt, t, tol);
      } catch (const DomainError&) {
        continue;
      }
      // Near-collision endpoints are ill-conditioned; they are covered by targeted tests.
      if (end.q().norm() < SampleBox{}.min_radius) continue;
      ++accepted;
      const double dh = std::abs(kepler_energy(end) - kepler_energy(pt));
      const double dl = n > 1 ? max_abs_diff(angular_momentum(end).upper(), angular_momentum(pt).upper()) : 0.0;
      const double dk = std::abs(lenz_vector(end).norm() - lenz_vector(pt).norm());
      c.add(describe(pt) + fmt::format(" t={:.17g}", t), std::max({dh, dl, dk}));
    }
  }
  return c.finish(samples);
}

using SuiteFn = SuiteReport (*)(Index, Index, std::uint64_t, const Tolerances&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> suites = {
      {"stereo-roundtrip", stereo_roundtrip},
      {"stereo-canonical", stereo_canonical},
      {"metric", metric},
      {"moser-symplectic", moser_symplectic},
      {"fibration-scale", fibration_scale},
      {"moser-levelset", moser_levelset},
      {"ls-symplectic", ls_symplectic},
      {"ls-roundtrip", ls_roundtrip},
      {"ls-equivariance", ls_equivariance},
      {"intertwine-flows", intertwine_flows},
      {"momenta-pullback", momenta_pullback},
      {"so(n+1)-brackets", so_brackets},
      {"lenz-brackets", lenz_brackets},
      {"mu-squared", mu_squared},
      {"conservation", conservation},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : registry()) out.push_back(entry.first);
    return out;
  }();
  return names;
}

SuiteReport run_suite(const std::string& name, Index n, Index samples, std::uint64_t seed,
                      const Tolerances& tol) {
  tol.validate();
  if (n < 1 || samples < 1) {
    throw DomainError(DomainReason::invalid_argument, "suites need n >= 1 and samples >= 1");
  }
  for (const auto& [key, fn] : registry()) {
    if (key == name) return fn(n, samples, seed, tol);
  }
  throw DomainError(DomainReason::invalid_argument, "unknown suite: " + name);
}

}  // namespace kepreg

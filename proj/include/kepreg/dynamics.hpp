#pragma once

// Kepler and Delaunay flows. The Delaunay Hamiltonian H~ = -1/(2 v^2) only
// depends on |v|, so its flow is the geodesic flow reparametrized by
// dH~/dF = |v|^-4: great circles at angular rate |v|^-3. The regularized
// propagator conjugates that closed form by the Ligon-Schaaf map.

#include "kepreg/ligon_schaaf.hpp"
#include "kepreg/symmetry.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace kepreg {

template <typename Scalar>
struct KeplerField {
  VectorX<Scalar> dq;
  VectorX<Scalar> dp;
};

/// (dq, dp) = (p, -q/|q|^3).
template <typename Scalar>
KeplerField<Scalar> kepler_vector_field(const PhasePoint<Scalar>& point) {
  const Scalar r = point.q().norm();
  if (!(r > Scalar(0))) {
    throw DomainError(DomainReason::collision_point, "q must be nonzero");
  }
  return {point.p(), -point.q() / (r * r * r)};
}

/// 2 pi (-2H)^(-3/2).
template <typename Scalar>
Scalar kepler_period(Scalar energy) {
  using std::pow;
  if (!(energy < Scalar(0))) {
    throw DomainError(DomainReason::nonnegative_energy, "period needs H < 0");
  }
  return Scalar(2) * std::numbers::pi_v<Scalar> * pow(Scalar(-2) * energy, Scalar(-1.5));
}

template <typename Scalar>
struct TrajectorySample {
  Scalar t;
  PhasePoint<Scalar> point;
};

template <typename Scalar>
struct Trajectory {
  std::vector<TrajectorySample<Scalar>> samples;
  std::string integrator;
  Scalar step = Scalar(0);
  /// max |H(t) - H(0)| over every integrator step, recorded or not.
  Scalar energy_drift = Scalar(0);

  const PhasePoint<Scalar>& front() const { return samples.front().point; }
  const PhasePoint<Scalar>& back() const { return samples.back().point; }
};

/// Fixed-step kick-drift-kick leapfrog. The last step is shortened to land on
/// t_end. Records the start, every `record_every`-th step, and the end.
///
/// Throws collision_approach when |q| < 10 dt^2 or when a single drift would
/// exceed the current distance to the origin (dt |p| > |q|); the regularized
/// propagator is the supported path through such encounters.
template <typename Scalar>
Trajectory<Scalar> kepler_integrate(const PhasePoint<Scalar>& start, Scalar t_end, Scalar dt,
                                    Index record_every = 1) {
  using std::abs;
  if (!(dt > Scalar(0))) {
    throw DomainError(DomainReason::invalid_argument, "step dt must be positive");
  }
  if (!(t_end >= Scalar(0))) {
    throw DomainError(DomainReason::invalid_argument, "t_end must be nonnegative");
  }
  if (record_every < 1) record_every = 1;
  const Scalar h0 = kepler_energy(start);

  Trajectory<Scalar> traj;
  traj.integrator = "leapfrog";
  traj.step = dt;
  traj.samples.push_back({Scalar(0), start});

  VectorX<Scalar> q = start.q();
  VectorX<Scalar> p = start.p();
  VectorX<Scalar> acc(q.size());
  auto accel = [&]() {
    const Scalar r = q.norm();
    acc.noalias() = -q / (r * r * r);
  };
  auto guard = [&](Scalar t, Scalar step) {
    const Scalar r = q.norm();
    if (r < Scalar(10) * dt * dt || step * p.norm() > r) {
      throw DomainError(DomainReason::collision_approach,
                        "collision approach near t = " + std::to_string(static_cast<double>(t)));
    }
  };

  guard(Scalar(0), dt);
  accel();
  Scalar t = Scalar(0);
  Index step_count = 0;
  while (t < t_end) {
    Scalar step = dt;
    bool last = false;
    if (t + step >= t_end) {
      step = t_end - t;
      last = true;
    }
    p.noalias() += (step / Scalar(2)) * acc;
    guard(t, step);
    q.noalias() += step * p;
    accel();
    p.noalias() += (step / Scalar(2)) * acc;
    t = last ? t_end : t + step;
    ++step_count;

    const Scalar r = q.norm();
    const Scalar energy = p.squaredNorm() / Scalar(2) - Scalar(1) / r;
    traj.energy_drift = std::max(traj.energy_drift, abs(energy - h0));
    if (last || step_count % record_every == 0) {
      traj.samples.push_back({t, PhasePoint<Scalar>(q, p)});
    }
  }
  return traj;
}

template <typename Scalar>
struct FlowTimes {
  Scalar t;  // Kepler time
  Scalar s;  // arc-length time on the sphere, ds/dt = 1/|q|
};

/// s(t) = integral of 1/|q| by the composite trapezoid rule over the samples.
template <typename Scalar>
std::vector<FlowTimes<Scalar>> arc_time(const Trajectory<Scalar>& traj) {
  std::vector<FlowTimes<Scalar>> out;
  out.reserve(traj.samples.size());
  Scalar s = Scalar(0);
  Scalar prev_rate = Scalar(0);
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const auto& sample = traj.samples[k];
    const Scalar r = sample.point.q().norm();
    if (!(r > Scalar(0))) {
      throw DomainError(DomainReason::collision_point, "trajectory sample has q = 0");
    }
    const Scalar rate = Scalar(1) / r;
    if (k > 0) {
      s += (sample.t - traj.samples[k - 1].t) * (rate + prev_rate) / Scalar(2);
    }
    out.push_back({sample.t, s});
    prev_rate = rate;
  }
  return out;
}

/// H~ = -1/(2 v.v).
template <typename Scalar>
Scalar delaunay_energy(const SphereCotangentPoint<Scalar>& sp) {
  const Scalar vv = sp.v().squaredNorm();
  if (!(vv > Scalar(0))) {
    throw DomainError(DomainReason::zero_covector, "covector must be nonzero");
  }
  return Scalar(-1) / (Scalar(2) * vv);
}

/// Closed-form Delaunay flow: rotation of (u, v/|v|) at rate |v|^-3.
template <typename Scalar>
SphereCotangentPoint<Scalar> delaunay_flow(const SphereCotangentPoint<Scalar>& sp, Scalar t) {
  using std::cos;
  using std::sin;
  const Scalar rho = sp.v().norm();
  if (!(rho > Scalar(0))) {
    throw DomainError(DomainReason::zero_covector, "covector must be nonzero");
  }
  if (t == Scalar(0)) return sp;
  const VectorX<Scalar> v_hat = sp.v() / rho;
  const Scalar angle = t / (rho * rho * rho);
  const Scalar c = cos(angle);
  const Scalar s = sin(angle);
  VectorX<Scalar> u = c * sp.u() + s * v_hat;
  VectorX<Scalar> v = rho * (c * v_hat - s * sp.u());
  return SphereCotangentPoint<Scalar>::projected(std::move(u), std::move(v));
}

/// Smallest t >= 0 at which the Delaunay flow from `sp` reaches the north-pole
/// fiber, if the great circle passes through the pole within `tol`.
template <typename Scalar>
std::optional<Scalar> next_collision(const SphereCotangentPoint<Scalar>& sp,
                                     double tol = Tolerances{}.constraint_tol) {
  using std::atan2;
  using std::hypot;
  using std::fmod;
  const Index n = sp.dim();
  const Scalar rho = sp.v().norm();
  if (!(rho > Scalar(0))) {
    throw DomainError(DomainReason::zero_covector, "covector must be nonzero");
  }
  const Scalar a = sp.u()(n);
  const Scalar b = sp.v()(n) / rho;
  if (static_cast<double>(Scalar(1) - hypot(a, b)) > tol) return std::nullopt;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar phase = atan2(b, a);
  phase = fmod(phase + two_pi, two_pi);
  return phase * rho * rho * rho;
}

/// Kepler flow through collisions: ls_map, closed-form Delaunay flow, ls_inverse.
/// Throws landed_on_collision when the flowed point sits on the north-pole fiber.
template <typename Scalar>
PhasePoint<Scalar> regularized_propagate(const PhasePoint<Scalar>& start, Scalar t,
                                         const Tolerances& tol = {}) {
  const auto image = ls_map(start, tol.constraint_tol);
  const auto flowed = delaunay_flow(image.point, t);
  if (static_cast<double>(flowed.north_pole_gap()) < tol.constraint_tol) {
    throw DomainError(DomainReason::landed_on_collision, "landed on collision");
  }
  return ls_inverse(flowed, tol);
}

}  // namespace kepreg

#pragma once

// The Ligon-Schaaf symplectomorphism P_- -> T_- and its inverse.
//
// Forward: with (u, v) = Pi_M(q, p) and theta = v_{n+1}, rotate the
// orthonormal pair (u, v) by theta in its own plane and rescale the covector:
//   r = cos(theta) u + sin(theta) v
//   s = (-sin(theta) u + cos(theta) v) / sqrt(-2H)
//
// Inverse: theta is recovered as the unique root of
//   f(theta) = sin(theta) r_{n+1} + cos(theta) s^_{n+1} - theta,
// whose derivative u_{n+1}(theta) - 1 is negative off the north pole.

#include "kepreg/moser.hpp"

#include <cmath>
#include <numbers>

namespace kepreg {

/// Phase angle theta = v_{n+1} = -sqrt(-2H) (q.p); |theta| <= 1.
template <typename Scalar>
class LSAngle {
 public:
  explicit LSAngle(Scalar theta, double constraint_tol = Tolerances{}.constraint_tol) : theta_(theta) {
    using std::abs;
    if (!(abs(static_cast<double>(theta)) <= 1.0 + constraint_tol)) {
      throw DomainError(DomainReason::invalid_argument, "LS angle must satisfy |theta| <= 1");
    }
  }
  Scalar theta() const { return theta_; }

 private:
  Scalar theta_;
};

template <typename Scalar>
LSAngle<Scalar> ls_angle(const PhasePoint<Scalar>& point) {
  using std::sqrt;
  const Scalar h = require_P_minus(point);
  return LSAngle<Scalar>(-sqrt(Scalar(-2) * h) * point.q().dot(point.p()));
}

template <typename Scalar>
struct LSImage {
  SphereCotangentPoint<Scalar> point;
  /// True when r sits on the north-pole fiber: a collision completion point of T^x.
  bool at_puncture = false;
};

template <typename Scalar>
LSImage<Scalar> ls_map(const PhasePoint<Scalar>& point,
                       double constraint_tol = Tolerances{}.constraint_tol) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Scalar h = require_P_minus(point);
  const auto fib = moser_fibration(point);
  const Index n = point.dim();
  const Scalar theta = fib.v()(n);
  const Scalar c = cos(theta);
  const Scalar s = sin(theta);
  const Scalar inv_k = Scalar(1) / sqrt(Scalar(-2) * h);

  VectorX<Scalar> r = c * fib.u() + s * fib.v();
  VectorX<Scalar> sv = (-s * fib.u() + c * fib.v()) * inv_k;
  SphereCotangentPoint<Scalar> out(std::move(r), std::move(sv), constraint_tol);
  const bool puncture = static_cast<double>(out.north_pole_gap()) < constraint_tol;
  return {std::move(out), puncture};
}

template <typename Scalar>
struct LSInverseResult {
  PhasePoint<Scalar> point;
  /// The recovered rotation angle theta*.
  Scalar theta;
  /// f(theta*) at exit.
  Scalar residual;
  /// f'(theta*) = u_{n+1}(theta*) - 1; strictly negative on T_-.
  Scalar slope;
  int iterations;
};

/// Inverse of ls_map with root-finder diagnostics.
template <typename Scalar>
LSInverseResult<Scalar> ls_inverse_detailed(const SphereCotangentPoint<Scalar>& sp,
                                            const Tolerances& tol = {}) {
  using std::abs;
  using std::cos;
  using std::sin;
  const Index n = sp.dim();
  const Scalar sigma = sp.v().norm();
  if (!(sigma > Scalar(0))) {
    throw DomainError(DomainReason::zero_covector, "covector s must be nonzero");
  }
  const VectorX<Scalar> s_hat = sp.v() / sigma;
  const Scalar a = sp.u()(n);
  const Scalar b = s_hat(n);

  auto f = [&](Scalar th) { return sin(th) * a + cos(th) * b - th; };
  auto df = [&](Scalar th) { return cos(th) * a - sin(th) * b - Scalar(1); };

  // |theta*| <= sqrt(a^2 + b^2) <= sqrt(2); f is nonincreasing, so f(lo) >= 0 >= f(hi).
  Scalar lo = -std::numbers::sqrt2_v<Scalar>;
  Scalar hi = std::numbers::sqrt2_v<Scalar>;
  Scalar th = Scalar(0);
  Scalar fth = f(th);
  const Scalar root_tol = static_cast<Scalar>(tol.root_tol);
  int iterations = 0;
  constexpr int max_iterations = 200;
  while (abs(fth) > root_tol && iterations < max_iterations) {
    ++iterations;
    if (fth > Scalar(0)) {
      lo = th;
    } else {
      hi = th;
    }
    const Scalar slope = df(th);
    Scalar next = slope < Scalar(0) ? th - fth / slope : (lo + hi) / Scalar(2);
    if (!(next > lo && next < hi)) next = (lo + hi) / Scalar(2);
    if (next == th) break;
    th = next;
    fth = f(th);
  }

  const Scalar c = cos(th);
  const Scalar sn = sin(th);
  VectorX<Scalar> u = c * sp.u() - sn * s_hat;
  VectorX<Scalar> v = sn * sp.u() + c * s_hat;
  if (static_cast<double>(Scalar(1) - u(n)) < tol.constraint_tol) {
    throw DomainError(DomainReason::collision_point,
                      "collision point: unrotated u lies on the north pole fiber");
  }
  const SphereCotangentPoint<Scalar> unit(std::move(u), std::move(v), tol.constraint_tol);
  const PhasePoint<Scalar> on_half = moser_map_inverse(unit, tol.constraint_tol);
  return {scale_phase(on_half, sigma), th, fth, df(th), iterations};
}

template <typename Scalar>
PhasePoint<Scalar> ls_inverse(const SphereCotangentPoint<Scalar>& sp, const Tolerances& tol = {}) {
  return ls_inverse_detailed(sp, tol).point;
}

}  // namespace kepreg

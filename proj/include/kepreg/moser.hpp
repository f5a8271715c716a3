#pragma once

// Moser regularization: geometric Fourier transform, the Moser map and its
// inverse, the scale-invariant Moser fibration, scaling actions, and the
// auxiliary Hamiltonians F, G, Hhat on T*R^n.

#include "kepreg/core.hpp"
#include "kepreg/stereo.hpp"

namespace kepreg {

/// (q, p) -> (x, y) = (p, -q).
template <typename Scalar>
PlaneCotangentPoint<Scalar> fourier(const PhasePoint<Scalar>& point) {
  return PlaneCotangentPoint<Scalar>(point.p(), -point.q());
}

/// (x, y) -> (q, p) = (-y, x).
template <typename Scalar>
PhasePoint<Scalar> fourier_inverse(const PlaneCotangentPoint<Scalar>& pl) {
  return PhasePoint<Scalar>(-pl.y(), pl.x());
}

/// Phi_M = to_sphere o fourier, written out directly.
template <typename Scalar>
SphereCotangentPoint<Scalar> moser_map(const PhasePoint<Scalar>& point) {
  const Index n = point.dim();
  const auto& q = point.q();
  const auto& p = point.p();
  const Scalar pp = p.squaredNorm();
  const Scalar qp = q.dot(p);
  const Scalar denom = pp + Scalar(1);

  VectorX<Scalar> u(n + 1), v(n + 1);
  u.head(n) = Scalar(2) * p / denom;
  u(n) = Scalar(2) * pp / denom - Scalar(1);
  v.head(n) = -denom * q / Scalar(2) + qp * p;
  v(n) = -qp;
  return SphereCotangentPoint<Scalar>(std::move(u), std::move(v));
}

template <typename Scalar>
PhasePoint<Scalar> moser_map_inverse(const SphereCotangentPoint<Scalar>& sp,
                                     double constraint_tol = Tolerances{}.constraint_tol) {
  return fourier_inverse(to_plane(sp, constraint_tol));
}

/// (q, p) -> (rho^2 q, p/rho); H scales by rho^-2 and time by rho^3.
template <typename Scalar>
PhasePoint<Scalar> scale_phase(const PhasePoint<Scalar>& point, Scalar rho) {
  if (!(rho > Scalar(0))) {
    throw DomainError(DomainReason::invalid_argument, "scale factor rho must be positive");
  }
  return PhasePoint<Scalar>(rho * rho * point.q(), point.p() / rho);
}

/// (u, v) -> (u, rho v).
template <typename Scalar>
SphereCotangentPoint<Scalar> scale_sphere(const SphereCotangentPoint<Scalar>& sp, Scalar rho) {
  if (!(rho > Scalar(0))) {
    throw DomainError(DomainReason::invalid_argument, "scale factor rho must be positive");
  }
  return SphereCotangentPoint<Scalar>(sp.u(), rho * sp.v());
}

/// Pi_M: P_- -> T_{-1/2}. Constant along the scale orbits, equal to the
/// Moser map on H = -1/2. Conditioning degrades as H -> 0^- since the
/// factor sqrt(-2H) vanishes there.
template <typename Scalar>
SphereCotangentPoint<Scalar> moser_fibration(const PhasePoint<Scalar>& point) {
  using std::sqrt;
  const Scalar h = require_P_minus(point);
  const Index n = point.dim();
  const auto& q = point.q();
  const auto& p = point.p();
  const Scalar r = q.norm();
  const Scalar k = sqrt(Scalar(-2) * h);
  const Scalar qp = q.dot(p);

  VectorX<Scalar> u(n + 1), v(n + 1);
  u.head(n) = k * r * p;
  u(n) = r * p.squaredNorm() - Scalar(1);
  v.head(n) = -q / r + qp * p;
  v(n) = -k * qp;
  return SphereCotangentPoint<Scalar>(std::move(u), std::move(v));
}

template <typename Scalar>
struct AuxHamiltonians {
  Scalar F;
  Scalar G;
  Scalar Hhat;
};

/// F = (x^2+1)^2 y^2 / 8.
template <typename Scalar>
Scalar aux_F(const PlaneCotangentPoint<Scalar>& pl) {
  const Scalar a = pl.x().squaredNorm() + Scalar(1);
  return a * a * pl.y().squaredNorm() / Scalar(8);
}

/// G = sqrt(2F) - 1 = (x^2+1)|y|/2 - 1.
template <typename Scalar>
Scalar aux_G(const PlaneCotangentPoint<Scalar>& pl) {
  return (pl.x().squaredNorm() + Scalar(1)) * pl.y().norm() / Scalar(2) - Scalar(1);
}

/// Hhat = G/|y| - 1/2 = x^2/2 - 1/|y|; needs y != 0.
template <typename Scalar>
Scalar aux_Hhat(const PlaneCotangentPoint<Scalar>& pl) {
  const Scalar ny = pl.y().norm();
  if (!(ny > Scalar(0))) {
    throw DomainError(DomainReason::collision_point, "Hhat needs y nonzero");
  }
  return pl.x().squaredNorm() / Scalar(2) - Scalar(1) / ny;
}

template <typename Scalar>
AuxHamiltonians<Scalar> aux_hamiltonians(const PlaneCotangentPoint<Scalar>& pl) {
  return {aux_F(pl), aux_G(pl), aux_Hhat(pl)};
}

}  // namespace kepreg

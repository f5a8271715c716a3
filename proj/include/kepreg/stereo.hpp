#pragma once

// Cotangent lift of stereographic projection from the north pole
// n = (0, ..., 0, 1) between T*S^n and T*R^n.

#include "kepreg/core.hpp"

namespace kepreg {

/// (u, v) -> (x, y): x_k = u_k/(1-u_{n+1}), y_k = v_k(1-u_{n+1}) + v_{n+1}u_k.
/// Rejects points whose gap 1 - u_{n+1} falls below `constraint_tol`.
template <typename Scalar>
PlaneCotangentPoint<Scalar> to_plane(const SphereCotangentPoint<Scalar>& sp,
                                     double constraint_tol = Tolerances{}.constraint_tol) {
  const Index n = sp.dim();
  const Scalar gap = sp.north_pole_gap();
  if (static_cast<double>(gap) < constraint_tol) {
    throw DomainError(DomainReason::north_pole_fiber, "north pole fiber");
  }
  const auto u = sp.u().head(n);
  const auto v = sp.v().head(n);
  const Scalar v_last = sp.v()(n);
  VectorX<Scalar> x = u / gap;
  VectorX<Scalar> y = v * gap + v_last * u;
  return PlaneCotangentPoint<Scalar>(std::move(x), std::move(y));
}

/// (x, y) -> (u, v), defined on all of T*R^n.
template <typename Scalar>
SphereCotangentPoint<Scalar> to_sphere(const PlaneCotangentPoint<Scalar>& pl) {
  const Index n = pl.dim();
  const auto& x = pl.x();
  const auto& y = pl.y();
  const Scalar xx = x.squaredNorm();
  const Scalar xy = x.dot(y);
  const Scalar denom = xx + Scalar(1);

  VectorX<Scalar> u(n + 1), v(n + 1);
  u.head(n) = Scalar(2) * x / denom;
  u(n) = (xx - Scalar(1)) / denom;
  v.head(n) = denom * y / Scalar(2) - xy * x;
  v(n) = xy;
  return SphereCotangentPoint<Scalar>(std::move(u), std::move(v));
}

}  // namespace kepreg

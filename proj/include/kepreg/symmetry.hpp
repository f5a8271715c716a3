#pragma once

// Conserved momenta of the Kepler problem and a finite-difference Poisson
// bracket engine. Matrix indices are zero-based; index n stands for the
// extra (n+1)-th axis of so(n+1).

#include "kepreg/core.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace kepreg {

/// L_ij = q_i p_j - q_j p_i.
template <typename Scalar>
MomentumMatrix<Scalar> angular_momentum(const PhasePoint<Scalar>& point) {
  const Index n = point.dim();
  const auto& q = point.q();
  const auto& p = point.p();
  MomentumMatrix<Scalar> out(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) out.set(i, j, q(i) * p(j) - q(j) * p(i));
  return out;
}

/// K = (p^2 - 1/|q|) q - (q.p) p; |K| is the eccentricity.
template <typename Scalar>
VectorX<Scalar> lenz_vector(const PhasePoint<Scalar>& point) {
  const auto& q = point.q();
  const auto& p = point.p();
  const Scalar r = q.norm();
  if (!(r > Scalar(0))) {
    throw DomainError(DomainReason::collision_point, "q must be nonzero");
  }
  return (p.squaredNorm() - Scalar(1) / r) * q - q.dot(p) * p;
}

/// so(n+1) momentum on P_-: angular momentum block plus L_{i,n+1} = K_i / sqrt(-2H).
template <typename Scalar>
MomentumMatrix<Scalar> extended_momentum(const PhasePoint<Scalar>& point) {
  using std::sqrt;
  const Scalar h = require_P_minus(point);
  const Index n = point.dim();
  const auto l = angular_momentum(point);
  const VectorX<Scalar> k = lenz_vector(point) / sqrt(Scalar(-2) * h);
  MomentumMatrix<Scalar> out(n + 1);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) out.set(i, j, l(i, j));
    out.set(i, n, k(i));
  }
  return out;
}

/// M_ij = r_i s_j - r_j s_i on T*S^n.
template <typename Scalar>
MomentumMatrix<Scalar> sphere_momentum(const SphereCotangentPoint<Scalar>& sp) {
  const Index m = sp.dim() + 1;
  const auto& r = sp.u();
  const auto& s = sp.v();
  MomentumMatrix<Scalar> out(m);
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) out.set(i, j, r(i) * s(j) - r(j) * s(i));
  return out;
}

/// mu^2 = L^2 + K^2/(-2H); equals 1/(-2H) on P_-.
template <typename Scalar>
Scalar moment_map_norm(const PhasePoint<Scalar>& point) {
  return extended_momentum(point).squared_norm();
}

/// mu~^2 = |M|^2; equals 1/(-2 H~) = |s|^2 on T^x.
template <typename Scalar>
Scalar moment_map_norm(const SphereCotangentPoint<Scalar>& sp) {
  if (!sp.in_T_cross()) {
    throw DomainError(DomainReason::zero_covector, "covector must be nonzero");
  }
  return sphere_momentum(sp).squared_norm();
}

/// A smooth function on phase space together with the set it is defined on.
template <typename Scalar>
struct ScalarField {
  std::string name;
  std::function<Scalar(const PhasePoint<Scalar>&)> value;
  std::function<bool(const PhasePoint<Scalar>&)> domain = [](const PhasePoint<Scalar>&) { return true; };
};

namespace detail {

template <typename Scalar>
VectorX<Scalar> field_gradient(const ScalarField<Scalar>& f, const VectorX<Scalar>& z, Scalar h) {
  VectorX<Scalar> grad(z.size());
  VectorX<Scalar> stencil = z;
  for (Index k = 0; k < z.size(); ++k) {
    stencil(k) = z(k) + h;
    const auto plus = PhasePoint<Scalar>::from_vector(stencil);
    stencil(k) = z(k) - h;
    const auto minus = PhasePoint<Scalar>::from_vector(stencil);
    stencil(k) = z(k);
    if (!f.domain(plus) || !f.domain(minus)) {
      throw DomainError(DomainReason::stencil,
                        "stencil point leaves the domain of " + f.name);
    }
    grad(k) = (f.value(plus) - f.value(minus)) / (Scalar(2) * h);
  }
  return grad;
}

}  // namespace detail

/// Central-difference estimate of {f, g} = sum_k df/dq_k dg/dp_k - df/dp_k dg/dq_k.
template <typename Scalar>
Scalar poisson_bracket(const ScalarField<Scalar>& f, const ScalarField<Scalar>& g,
                       const PhasePoint<Scalar>& point, Scalar h) {
  if (!(h > Scalar(0))) {
    throw DomainError(DomainReason::invalid_argument, "finite-difference step must be positive");
  }
  const Index n = point.dim();
  const VectorX<Scalar> z = point.to_vector();
  const VectorX<Scalar> df = detail::field_gradient(f, z, h);
  const VectorX<Scalar> dg = detail::field_gradient(g, z, h);
  return df.head(n).dot(dg.tail(n)) - df.tail(n).dot(dg.head(n));
}

/// Richardson extrapolation of poisson_bracket over steps h and h/2.
template <typename Scalar>
Scalar poisson_bracket_richardson(const ScalarField<Scalar>& f, const ScalarField<Scalar>& g,
                                  const PhasePoint<Scalar>& point, Scalar h) {
  const Scalar coarse = poisson_bracket(f, g, point, h);
  const Scalar fine = poisson_bracket(f, g, point, h / Scalar(2));
  return (Scalar(4) * fine - coarse) / Scalar(3);
}

/// Component (i, j) of the extended so(n+1) momentum as a scalar field on P_-.
template <typename Scalar>
ScalarField<Scalar> momentum_component_field(Index i, Index j) {
  return {"L" + std::to_string(i + 1) + std::to_string(j + 1),
          [i, j](const PhasePoint<Scalar>& pt) { return extended_momentum(pt)(i, j); },
          [](const PhasePoint<Scalar>& pt) { return in_P_minus(pt); }};
}

/// Angular momentum L_ij on all of T*R^n.
template <typename Scalar>
ScalarField<Scalar> angular_momentum_field(Index i, Index j) {
  return {"L" + std::to_string(i + 1) + std::to_string(j + 1),
          [i, j](const PhasePoint<Scalar>& pt) {
            return pt.q()(i) * pt.p()(j) - pt.q()(j) * pt.p()(i);
          }};
}

/// Lenz component K_i on q != 0.
template <typename Scalar>
ScalarField<Scalar> lenz_component_field(Index i) {
  return {"K" + std::to_string(i + 1),
          [i](const PhasePoint<Scalar>& pt) { return lenz_vector(pt)(i); },
          [](const PhasePoint<Scalar>& pt) { return pt.q().norm() > Scalar(0); }};
}

}  // namespace kepreg

#pragma once

// Verification machinery: central-difference Jacobians, the symplectic
// defect |J^T Omega J - Omega|_max, and named property suites.

#include "kepreg/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kepreg {

/// Standard form on R^(2m) with coordinates (positions..., momenta...):
/// [[0, I], [-I, 0]].
template <typename Scalar>
MatrixX<Scalar> symplectic_form(Index m) {
  MatrixX<Scalar> omega = MatrixX<Scalar>::Zero(2 * m, 2 * m);
  omega.topRightCorner(m, m).setIdentity();
  omega.bottomLeftCorner(m, m) = -MatrixX<Scalar>::Identity(m, m);
  return omega;
}

/// Central-difference Jacobian of `map` at `point`, error O(h^2). A domain
/// error raised at a stencil point is rethrown naming the coordinate and sign.
template <typename Scalar, typename Map>
MatrixX<Scalar> jacobian(Map&& map, const VectorX<Scalar>& point, Scalar h) {
  if (!(h > Scalar(0))) {
    throw DomainError(DomainReason::invalid_argument, "finite-difference step must be positive");
  }
  VectorX<Scalar> stencil = point;
  MatrixX<Scalar> jac;
  for (Index k = 0; k < point.size(); ++k) {
    VectorX<Scalar> plus, minus;
    try {
      stencil(k) = point(k) + h;
      plus = map(stencil);
      stencil(k) = point(k) - h;
      minus = map(stencil);
    } catch (const DomainError& e) {
      throw DomainError(DomainReason::stencil,
                        "stencil point (coordinate " + std::to_string(k) + ", " +
                            (stencil(k) > point(k) ? "+h" : "-h") + ") left the domain: " + e.what());
    }
    stencil(k) = point(k);
    if (k == 0) jac.resize(plus.size(), point.size());
    jac.col(k) = (plus - minus) / (Scalar(2) * h);
  }
  return jac;
}

/// Richardson combination (4 J(h/2) - J(h)) / 3 of two central-difference
/// Jacobians; cancels the h^2 truncation term.
template <typename Scalar, typename Map>
MatrixX<Scalar> jacobian_richardson(Map&& map, const VectorX<Scalar>& point, Scalar h) {
  const MatrixX<Scalar> coarse = jacobian<Scalar>(map, point, h);
  const MatrixX<Scalar> fine = jacobian<Scalar>(map, point, h / Scalar(2));
  return (Scalar(4) * fine - coarse) / Scalar(3);
}

/// max-norm of J^T Omega_out J - Omega_in for a map R^(2a) -> R^(2b), with J
/// from jacobian_richardson at base step h.
template <typename Scalar, typename Map>
Scalar symplectic_defect(Map&& map, const VectorX<Scalar>& point, Scalar h) {
  const MatrixX<Scalar> jac = jacobian_richardson<Scalar>(map, point, h);
  const MatrixX<Scalar> pulled = jac.transpose() * symplectic_form<Scalar>(jac.rows() / 2) * jac;
  return (pulled - symplectic_form<Scalar>(point.size() / 2)).cwiseAbs().maxCoeff();
}

struct SuiteFailure {
  std::string input;
  double observed;
  double expected;
  double tolerance;
};

struct SuiteReport {
  std::string name;
  Index samples = 0;
  double max_defect = 0.0;
  double tolerance = 0.0;
  /// Sorted by input description; empty iff max_defect <= tolerance.
  std::vector<SuiteFailure> failures;

  bool passed() const { return failures.empty(); }
};

/// Every registered suite name, in registry order.
const std::vector<std::string>& suite_names();

/// Runs one named property suite. Deterministic per (name, n, samples, seed, tol).
/// Throws DomainError(invalid_argument) on an unknown name.
SuiteReport run_suite(const std::string& name, Index n, Index samples, std::uint64_t seed,
                      const Tolerances& tol = {});

}  // namespace kepreg

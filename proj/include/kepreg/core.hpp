#pragma once

// Domain types shared by every kepreg module. All quantities use Kepler units
// with GM = 1, so H = p^2/2 - 1/|q|.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kepreg {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Reason attached to every DomainError; names the violated predicate.
enum class DomainReason {
  invalid_argument,
  collision_point,     // |q| = 0
  nonnegative_energy,  // H >= 0 where P_- is required
  north_pole_fiber,    // u at (0,...,0,1)
  zero_covector,       // |v| = 0
  constraint_violated, // |u| != 1 or u.v != 0
  landed_on_collision,
  collision_approach,  // direct integrator too close to q = 0
  sampling_exhausted,
  stencil,             // finite-difference stencil left the domain
};

std::string to_string(DomainReason reason);

class DomainError : public std::domain_error {
 public:
  DomainError(DomainReason reason, const std::string& message)
      : std::domain_error(message), reason_(reason) {}

  DomainReason reason() const noexcept { return reason_; }

 private:
  DomainReason reason_;
};

struct Tolerances {
  double constraint_tol = 1e-10;
  double fd_step = 1e-6;
  double root_tol = 1e-14;
  double ode_tol = 1e-10;

  /// Throws DomainError unless every field is strictly positive.
  void validate() const;
};

namespace detail {

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(static_cast<double>(m(i)))) return false;
  }
  return true;
}

}  // namespace detail

/// A point (q, p) of the Kepler phase space T*R^n.
template <typename Scalar>
class PhasePoint {
 public:
  using Vector = VectorX<Scalar>;

  PhasePoint(Vector q, Vector p) : q_(std::move(q)), p_(std::move(p)) {
    if (q_.size() < 1 || q_.size() != p_.size()) {
      throw DomainError(DomainReason::invalid_argument,
                        "q and p must have the same length n >= 1");
    }
    if (!detail::all_finite(q_) || !detail::all_finite(p_)) {
      throw DomainError(DomainReason::invalid_argument,
                        "phase point entries must be finite");
    }
  }

  /// Packs (q, p) as one 2n vector, positions first.
  static PhasePoint from_vector(const Vector& qp) {
    const Index n = qp.size() / 2;
    return PhasePoint(qp.head(n), qp.tail(n));
  }

  Index dim() const { return q_.size(); }
  const Vector& q() const { return q_; }
  const Vector& p() const { return p_; }

  Vector to_vector() const {
    Vector out(2 * dim());
    out << q_, p_;
    return out;
  }

  template <typename Other>
  PhasePoint<Other> cast() const {
    return PhasePoint<Other>(q_.template cast<Other>(), p_.template cast<Other>());
  }

 private:
  Vector q_;
  Vector p_;
};

/// A point (x, y) of T*R^n used as the stereographic chart.
template <typename Scalar>
class PlaneCotangentPoint {
 public:
  using Vector = VectorX<Scalar>;

  PlaneCotangentPoint(Vector x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() < 1 || x_.size() != y_.size()) {
      throw DomainError(DomainReason::invalid_argument,
                        "x and y must have the same length n >= 1");
    }
    if (!detail::all_finite(x_) || !detail::all_finite(y_)) {
      throw DomainError(DomainReason::invalid_argument,
                        "plane point entries must be finite");
    }
  }

  static PlaneCotangentPoint from_vector(const Vector& xy) {
    const Index n = xy.size() / 2;
    return PlaneCotangentPoint(xy.head(n), xy.tail(n));
  }

  Index dim() const { return x_.size(); }
  const Vector& x() const { return x_; }
  const Vector& y() const { return y_; }
  bool y_nonzero() const { return y_.squaredNorm() > Scalar(0); }

  Vector to_vector() const {
    Vector out(2 * dim());
    out << x_, y_;
    return out;
  }

 private:
  Vector x_;
  Vector y_;
};

/// A point (u, v) of T*S^n embedded in R^(n+1) x R^(n+1): |u| = 1, u.v = 0.
template <typename Scalar>
class SphereCotangentPoint {
 public:
  using Vector = VectorX<Scalar>;

  /// Validates the sphere constraints to within `constraint_tol`.
  SphereCotangentPoint(Vector u, Vector v, double constraint_tol = Tolerances{}.constraint_tol)
      : u_(std::move(u)), v_(std::move(v)) {
    if (u_.size() < 2 || u_.size() != v_.size()) {
      throw DomainError(DomainReason::invalid_argument,
                        "u and v must have the same length n+1 >= 2");
    }
    if (!detail::all_finite(u_) || !detail::all_finite(v_)) {
      throw DomainError(DomainReason::invalid_argument,
                        "sphere point entries must be finite");
    }
    using std::abs;
    if (abs(static_cast<double>(u_.squaredNorm() - Scalar(1))) > constraint_tol) {
      throw DomainError(DomainReason::constraint_violated, "|u| must equal 1");
    }
    if (abs(static_cast<double>(u_.dot(v_))) > constraint_tol) {
      throw DomainError(DomainReason::constraint_violated, "u.v must vanish");
    }
  }

  /// Re-projects onto the constraint set: u normalized, v orthogonalized against u.
  static SphereCotangentPoint projected(Vector u, Vector v) {
    u.normalize();
    v -= u.dot(v) * u;
    return SphereCotangentPoint(std::move(u), std::move(v));
  }

  static SphereCotangentPoint from_vector(const Vector& uv) {
    const Index m = uv.size() / 2;
    return SphereCotangentPoint(uv.head(m), uv.tail(m));
  }

  /// Dimension n of the sphere S^n (vectors have length n+1).
  Index dim() const { return u_.size() - 1; }
  const Vector& u() const { return u_; }
  const Vector& v() const { return v_; }

  /// Distance-like gap 1 - u_{n+1} from the north pole.
  Scalar north_pole_gap() const { return Scalar(1) - u_(dim()); }

  bool in_T_cross() const { return v_.squaredNorm() > Scalar(0); }
  bool in_T_minus(double tol = Tolerances{}.constraint_tol) const {
    return in_T_cross() && static_cast<double>(north_pole_gap()) >= tol;
  }
  bool in_T_half(double tol = Tolerances{}.constraint_tol) const {
    using std::abs;
    return static_cast<double>(north_pole_gap()) >= tol &&
           abs(static_cast<double>(v_.norm() - Scalar(1))) <= tol;
  }

  Vector to_vector() const {
    Vector out(2 * u_.size());
    out << u_, v_;
    return out;
  }

  template <typename Other>
  SphereCotangentPoint<Other> cast() const {
    return SphereCotangentPoint<Other>(u_.template cast<Other>(), v_.template cast<Other>());
  }

 private:
  Vector u_;
  Vector v_;
};

/// Antisymmetric dim x dim matrix; only the strict upper triangle is stored.
template <typename Scalar>
class MomentumMatrix {
 public:
  explicit MomentumMatrix(Index dim) : dim_(dim), upper_(VectorX<Scalar>::Zero(dim * (dim - 1) / 2)) {}

  static MomentumMatrix from_dense(const MatrixX<Scalar>& m) {
    MomentumMatrix out(m.rows());
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = i + 1; j < m.cols(); ++j) out.set(i, j, m(i, j));
    return out;
  }

  Index dim() const { return dim_; }

  /// Zero-based entry (i, j); reads below the diagonal reflect with a sign flip.
  Scalar operator()(Index i, Index j) const {
    if (i == j) return Scalar(0);
    return i < j ? upper_(slot(i, j)) : -upper_(slot(j, i));
  }

  /// Sets entry (i, j) and, implicitly, (j, i) = -value.
  void set(Index i, Index j, Scalar value) {
    if (i == j) {
      throw DomainError(DomainReason::invalid_argument, "diagonal of a momentum matrix is zero");
    }
    if (i < j) {
      upper_(slot(i, j)) = value;
    } else {
      upper_(slot(j, i)) = -value;
    }
  }

  /// Independent entries in (0,1), (0,2), ..., (dim-2, dim-1) order.
  const VectorX<Scalar>& upper() const { return upper_; }

  /// Sum over i < j of entry^2.
  Scalar squared_norm() const { return upper_.squaredNorm(); }

  MatrixX<Scalar> to_dense() const {
    MatrixX<Scalar> m(dim_, dim_);
    for (Index i = 0; i < dim_; ++i)
      for (Index j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

 private:
  Index slot(Index i, Index j) const { return i * (2 * dim_ - i - 1) / 2 + (j - i - 1); }

  Index dim_;
  VectorX<Scalar> upper_;
};

/// H = p.p/2 - 1/|q|.
template <typename Scalar>
Scalar kepler_energy(const PhasePoint<Scalar>& point) {
  const Scalar r = point.q().norm();
  if (!(r > Scalar(0))) {
    throw DomainError(DomainReason::collision_point, "q must be nonzero");
  }
  return point.p().squaredNorm() / Scalar(2) - Scalar(1) / r;
}

template <typename Scalar>
bool in_P_minus(const PhasePoint<Scalar>& point) {
  return point.q().norm() > Scalar(0) && kepler_energy(point) < Scalar(0);
}

template <typename Scalar>
bool in_P_half(const PhasePoint<Scalar>& point, double tol = Tolerances{}.constraint_tol) {
  using std::abs;
  return point.q().norm() > Scalar(0) &&
         abs(static_cast<double>(kepler_energy(point) + Scalar(0.5))) <= tol;
}

/// Throws unless the point lies in P_-; returns its energy.
template <typename Scalar>
Scalar require_P_minus(const PhasePoint<Scalar>& point) {
  const Scalar h = kepler_energy(point);
  if (!(h < Scalar(0))) {
    throw DomainError(DomainReason::nonnegative_energy, "energy must be negative (H < 0)");
  }
  return h;
}

struct SampleBox {
  double q_half_width = 2.0;
  double p_half_width = 1.2;
  double min_radius = 0.1;
  double max_energy = -0.05;
};

/// Seed-reproducible rejection sample of points with |q| >= 0.1 and H <= -0.05.
std::vector<PhasePoint<double>> sample_P_minus(Index n, Index count, std::uint64_t seed,
                                               const SampleBox& box = {});

/// Seed-reproducible sample of points with |q| >= box.min_radius and no energy constraint.
std::vector<PhasePoint<double>> sample_punctured(Index n, Index count, std::uint64_t seed,
                                                 const SampleBox& box = {});

}  // namespace kepreg

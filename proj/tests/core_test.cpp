#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kepreg/core.hpp"

using namespace kepreg;

namespace {

VectorX<double> vec(std::initializer_list<double> values) {
  VectorX<double> v(static_cast<Index>(values.size()));
  Index k = 0;
  for (double x : values) v(k++) = x;
  return v;
}

}  // namespace

TEST_CASE("kepler_energy by direct substitution") {
  CHECK(kepler_energy(PhasePoint<double>(vec({1, 0}), vec({0, 1}))) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(kepler_energy(PhasePoint<double>(vec({1, 0}), vec({0, 0}))) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(kepler_energy(PhasePoint<double>(vec({1, 0}), vec({0, 0.5}))) == doctest::Approx(-7.0 / 8.0).epsilon(1e-15));
}

TEST_CASE("kepler_energy is undefined at collision") {
  const PhasePoint<double> origin(vec({0, 0}), vec({0, 1}));
  CHECK_THROWS_AS(kepler_energy(origin), DomainError);
  try {
    kepler_energy(origin);
  } catch (const DomainError& e) {
    CHECK(e.reason() == DomainReason::collision_point);
  }
}

TEST_CASE("phase points validate shape and finiteness") {
  CHECK_THROWS_AS(PhasePoint<double>(vec({1, 0}), vec({0})), DomainError);
  CHECK_THROWS_AS(PhasePoint<double>(vec({1, NAN}), vec({0, 0})), DomainError);
  const PhasePoint<double> pt(vec({1, 2}), vec({3, 4}));
  CHECK(PhasePoint<double>::from_vector(pt.to_vector()).q() == pt.q());
}

TEST_CASE("domain predicates") {
  CHECK(in_P_minus(PhasePoint<double>(vec({1, 0}), vec({0, 1}))));
  CHECK_FALSE(in_P_minus(PhasePoint<double>(vec({1, 0}), vec({0, 2}))));
  CHECK(in_P_half(PhasePoint<double>(vec({1, 0}), vec({0, 1}))));
  CHECK_FALSE(in_P_half(PhasePoint<double>(vec({1, 0}), vec({0, 0}))));
}

TEST_CASE("sphere cotangent points enforce the constraints") {
  CHECK_NOTHROW(SphereCotangentPoint<double>(vec({0, 1, 0}), vec({-1, 0, 0})));
  CHECK_THROWS_AS(SphereCotangentPoint<double>(vec({0, 1.1, 0}), vec({-1, 0, 0})), DomainError);
  CHECK_THROWS_AS(SphereCotangentPoint<double>(vec({0, 1, 0}), vec({-1, 0.5, 0})), DomainError);

  const SphereCotangentPoint<double> sp(vec({0, 1, 0}), vec({-1, 0, 0}));
  CHECK(sp.in_T_cross());
  CHECK(sp.in_T_minus());
  CHECK(sp.in_T_half());

  const SphereCotangentPoint<double> pole(vec({0, 0, 1}), vec({1, 0, 0}));
  CHECK(pole.in_T_cross());
  CHECK_FALSE(pole.in_T_minus());
  CHECK_FALSE(pole.in_T_half());

  const SphereCotangentPoint<double> zero(vec({1, 0, 0}), vec({0, 0, 0}));
  CHECK_FALSE(zero.in_T_cross());

  const auto projected = SphereCotangentPoint<double>::projected(vec({0, 2, 0}), vec({-1, 0.3, 0}));
  CHECK(projected.u()(1) == 1.0);
  CHECK(projected.v()(1) == 0.0);
}

TEST_CASE("momentum matrices are antisymmetric by construction") {
  MomentumMatrix<double> m(4);
  m.set(0, 2, 1.5);
  m.set(3, 1, -2.0);
  CHECK(m(0, 2) == 1.5);
  CHECK(m(2, 0) == -1.5);
  CHECK(m(1, 3) == 2.0);
  CHECK(m(3, 1) == -2.0);
  CHECK(m(2, 2) == 0.0);
  CHECK(m.squared_norm() == doctest::Approx(1.5 * 1.5 + 4.0));
  const auto dense = m.to_dense();
  CHECK((dense + dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(m.set(1, 1, 1.0), DomainError);
  CHECK(MomentumMatrix<double>::from_dense(dense).upper() == m.upper());
}

TEST_CASE("tolerances must be positive") {
  CHECK_NOTHROW(Tolerances{}.validate());
  Tolerances bad;
  bad.fd_step = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("sample_P_minus postconditions") {
  const auto one = sample_P_minus(2, 1, 42);
  REQUIRE(one.size() == 1);
  CHECK(kepler_energy(one[0]) < 0.0);
  CHECK(one[0].q().norm() > 0.0);

  const auto many = sample_P_minus(3, 100, 7);
  REQUIRE(many.size() == 100);
  for (const auto& pt : many) {
    CHECK(in_P_minus(pt));
    CHECK(pt.q().norm() >= 0.1);
    CHECK(kepler_energy(pt) <= -0.05);
    CHECK(pt.dim() == 3);
  }
}

TEST_CASE("sampling is seed-reproducible") {
  for (Index n = 1; n <= 4; ++n) {
    const auto a = sample_P_minus(n, 50, 123);
    const auto b = sample_P_minus(n, 50, 123);
    const auto c = sample_P_minus(n, 50, 124);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].to_vector() == b[i].to_vector());
      differs = differs || a[i].to_vector() != c[i].to_vector();
    }
    CHECK(differs);
  }
}

TEST_CASE("sampling rejects bad parameters") {
  CHECK_THROWS_AS(sample_P_minus(0, 1, 1), DomainError);
  CHECK_THROWS_AS(sample_P_minus(2, 0, 1), DomainError);
  SampleBox impossible;
  impossible.max_energy = -100.0;  // H >= -1/0.1 = -10 on the box
  CHECK_THROWS_AS(sample_P_minus(2, 1, 1, impossible), DomainError);
}

TEST_CASE("punctured sampling covers both energy signs") {
  const auto pts = sample_punctured(2, 200, 5);
  bool negative = false, positive = false;
  for (const auto& pt : pts) {
    CHECK(pt.q().norm() >= 0.1);
    (kepler_energy(pt) < 0 ? negative : positive) = true;
  }
  CHECK(negative);
  CHECK(positive);
}

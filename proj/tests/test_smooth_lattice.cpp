#include <cmath>

#include "doctest.h"
#include "mstate/errors.hpp"
#include "mstate/lattice.hpp"
#include "mstate/smooth.hpp"

using namespace mstate;

namespace {

SubspaceLattice two_lines() {
  return generate_lattice({Subspace::from_rows({{1, 0}}, 2), Subspace::from_rows({{0, 1}}, 2)}, 2);
}

}  // namespace

TEST_CASE("unit step is monotone and saturates") {
  CHECK(unit_step(-0.5).value == 0.0);
  CHECK(unit_step(1.5).value == 1.0);
  CHECK(unit_step(0.5).value == doctest::Approx(0.5));
  double prev = 0.0;
  for (int i = 1; i < 100; ++i) {
    const Jet1 j = unit_step(i / 100.0);
    CHECK(j.value >= prev);
    CHECK(j.d1 >= 0.0);
    prev = j.value;
  }
}

TEST_CASE("unit step derivatives match finite differences") {
  const double h = 1e-6;
  for (double t : {0.2, 0.4, 0.7, 0.9}) {
    const double fd1 = (unit_step(t + h).value - unit_step(t - h).value) / (2 * h);
    const double fd2 = (unit_step(t + h).d1 - unit_step(t - h).d1) / (2 * h);
    CHECK(unit_step(t).d1 == doctest::Approx(fd1).epsilon(1e-6));
    CHECK(unit_step(t).d2 == doctest::Approx(fd2).epsilon(1e-5));
  }
}

TEST_CASE("plateau bump") {
  const SmoothBump f(1.5, 0.05, 0.1);
  CHECK(f(1.5) == 1.0);
  CHECK(f(1.54) == 1.0);
  CHECK(f(1.46) == 1.0);
  CHECK(f(1.6) == 0.0);
  CHECK(f(1.39) == 0.0);
  CHECK(f(1.575) > 0.0);
  CHECK(f(1.575) < 1.0);
  CHECK(f(1.575) == doctest::Approx(f(1.425)));
  CHECK(f.lower() == doctest::Approx(1.4));
  CHECK(f.upper() == doctest::Approx(1.6));
}

TEST_CASE("radial blend switches between 1/4 and 1/2") {
  CHECK(radial_blend(0.2).value == 0.0);
  CHECK(radial_blend(0.6).value == 1.0);
  CHECK(radial_blend(0.375).value == doctest::Approx(0.5));
}

TEST_CASE("mollified abs equals |z| outside the smoothing band and is convex") {
  const MollifiedAbs m(0.2);
  CHECK(m(0.5).value == doctest::Approx(0.5));
  CHECK(m(-0.3).value == doctest::Approx(0.3));
  CHECK(m(0.5).d1 == doctest::Approx(1.0));
  CHECK(m(-0.5).d1 == doctest::Approx(-1.0));
  for (int i = -50; i <= 50; ++i) {
    const double z = i * 0.004;
    CHECK(m(z).d2 >= 0.0);
    CHECK(m(z).value >= std::abs(z) - 1e-12);
  }
  // second derivative integrates to 2 (jump of the slope of |z|)
  double integral = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) integral += m(-0.2 + 0.4 * (i + 0.5) / n).d2 * 0.4 / n;
  CHECK(integral == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("two-line lattice structure") {
  const SubspaceLattice lat = two_lines();
  REQUIRE(lat.size() == 4);
  CHECK(lat.element(lat.a_min()).dim() == 2);
  CHECK(lat.element(lat.a_max()).dim() == 0);
  for (int a = 0; a < lat.size(); ++a) {
    CHECK(lat.leq(lat.a_min(), a));
    CHECK(lat.leq(a, lat.a_max()));
    CHECK(lat.leq(a, a));
  }
  CHECK_FALSE(lat.leq(1, 2));
  CHECK_FALSE(lat.leq(2, 1));
  CHECK(lat.find(Subspace::from_rows({{2, 0}}, 2)) >= 0);
  CHECK(lat.find(Subspace::from_rows({{1, 1}}, 2)) == -1);
}

TEST_CASE("lattice projectors are complementary orthogonal projections") {
  const SubspaceLattice lat = two_lines();
  for (int a = 0; a < lat.size(); ++a) {
    const ProjectorPair p = lat.projectors(a);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    CHECK((p.onto_Xa + p.onto_Xperp - I).norm() < 1e-12);
    CHECK((p.onto_Xa * p.onto_Xa - p.onto_Xa).norm() < 1e-12);
    CHECK((p.onto_Xa * p.onto_Xperp).norm() < 1e-12);
    CHECK((p.onto_Xa - p.onto_Xa.transpose()).norm() < 1e-12);
  }
}

TEST_CASE("lattice is closed under intersection in 3D") {
  const SubspaceLattice lat = generate_lattice(
      {Subspace::from_rows({{1, 0, 0}, {0, 1, 0}}, 3), Subspace::from_rows({{0, 1, 0}, {0, 0, 1}}, 3),
       Subspace::from_rows({{1, 0, 0}, {0, 0, 1}}, 3)},
      3);
  for (int a = 0; a < lat.size(); ++a) {
    for (int b = 0; b < lat.size(); ++b) {
      CHECK(lat.find(lat.element(a).intersect(lat.element(b))) >= 0);
    }
  }
  // X, three planes, three axes, {0}
  CHECK(lat.size() == 8);
}

TEST_CASE("lattice errors") {
  CHECK_THROWS_AS(Subspace::from_rows({{1, 0}, {2, 0}}, 2), Error);
  try {
    generate_lattice({Subspace::from_rows({{1, 0}}, 2)}, 2);
    FAIL("expected NonTrivialIntersection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonTrivialIntersection);
  }
}

TEST_CASE("lattice json round trip") {
  const SubspaceLattice lat = two_lines();
  const SubspaceLattice back = SubspaceLattice::from_json(lat.to_json());
  REQUIRE(back.size() == lat.size());
  for (int a = 0; a < lat.size(); ++a) {
    CHECK(back.element(a).same_as(lat.element(a)));
    for (int b = 0; b < lat.size(); ++b) CHECK(back.leq(a, b) == lat.leq(a, b));
  }
}

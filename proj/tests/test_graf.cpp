#include <cmath>
#include <random>

#include "doctest.h"
#include "mstate/errors.hpp"
#include "mstate/graf.hpp"

using namespace mstate;

namespace {

SubspaceLattice two_lines() {
  return generate_lattice({Subspace::from_rows({{1, 0}}, 2), Subspace::from_rows({{0, 1}}, 2)}, 2);
}

}  // namespace

TEST_CASE("Graf field on the two-line lattice") {
  const GrafField G = build_graf_G(two_lines(), 0.1);
  const GrafReport r = check_graf(G);
  CHECK(std::isfinite(r.C1));
  CHECK(std::isfinite(r.C2));
  CHECK(r.C1 > 0.0);
  CHECK(r.min_hessian_eigenvalue >= -1e-8);
  CHECK(r.delta > 0.0);
  CHECK(r.derivatives_bounded);
}

TEST_CASE("Graf field gradient and Hessian match finite differences") {
  const GrafField G = build_graf_G(two_lines(), 0.3);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double h = 1e-5;
  for (int s = 0; s < 50; ++s) {
    Eigen::VectorXd x(2);
    x << u(rng), u(rng);
    const GrafJet j = G.jet(x);
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      CHECK(j.gradient(k) == doctest::Approx((G.value(xp) - G.value(xm)) / (2 * h)).epsilon(1e-5));
      const Eigen::VectorXd dg = (G.gradient(xp) - G.gradient(xm)) / (2 * h);
      CHECK((j.hessian.col(k) - dg).norm() < 1e-4);
    }
  }
}

TEST_CASE("Graf field is flat along X^a near X_a") {
  const GrafField G = build_graf_G(two_lines(), 0.1);
  // near the x-axis, dG/dy vanishes
  for (double x : {-6.0, -1.0, 0.3, 2.0, 8.0}) {
    Eigen::VectorXd p(2);
    p << x, 0.2;
    CHECK(std::abs(G.gradient(p)(1)) < 1e-12);
  }
  // near the origin G is constant
  Eigen::VectorXd o(2);
  o << 0.2, -0.3;
  CHECK(G.gradient(o).norm() < 1e-12);
}

TEST_CASE("a lattice without {0} is rejected") {
  try {
    build_graf_G(generate_lattice({}, 2), 0.1);
    FAIL("expected NonTrivialIntersection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonTrivialIntersection);
  }
}

TEST_CASE("Graf construction rejects bad inputs") {
  CHECK_THROWS_AS(build_graf_G(two_lines(), 0.0), Error);
  CHECK_THROWS_AS(build_graf_G(two_lines(), 0.1, {1.0, 2.0}), Error);
}

TEST_CASE("flatness fails when the smoothing swallows the offsets") {
  try {
    check_graf(build_graf_G(two_lines(), 0.5));
    FAIL("expected PropertyViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PropertyViolated);
  }
}

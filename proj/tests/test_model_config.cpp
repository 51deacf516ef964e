#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mstate/config.hpp"
#include "mstate/errors.hpp"
#include "mstate/model.hpp"

using namespace mstate;
using json = nlohmann::json;

namespace {

ProblemSpec two_cosines() {
  return spec_from_json(json::parse(R"({"ambient_dim":2,"mode":"homogeneous","channels":[
     {"homogeneous":{"preset":"cosine_homogeneous","params":{"amplitude":1}}},
     {"homogeneous":{"preset":"cosine_homogeneous","params":{"amplitude":1,"phase":0.7853981633974483}}}]})"));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoFailure;
}

Point pt(double a, double b) {
  Point x(2);
  x << a, b;
  return x;
}

}  // namespace

TEST_CASE("crossings of cos(theta) and cos(theta - pi/4) at 0.3") {
  const CrossingSet c = find_crossings(two_cosines(), 0.3);
  // independent oracle: acos
  const double a = std::acos(0.3);
  const double q = std::numbers::pi / 4;
  std::vector<double> expected{-a, q - a, a, q + a};
  std::sort(expected.begin(), expected.end());
  std::vector<double> got = c.angles;
  std::sort(got.begin(), got.end());
  REQUIRE(got.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-9));
}

TEST_CASE("gradient condition margins are positive for distinct crossings") {
  const ProblemSpec spec = two_cosines();
  const GradientConditionReport r = check_gradient_condition(find_crossings(spec, 0.3), spec);
  CHECK(r.all_passed());
  // single-channel membership: margin = g'(theta)^2 = 1 - 0.3^2
  CHECK(r.min_margin() == doctest::Approx(0.91).epsilon(1e-6));
}

TEST_CASE("energy at an extremum of the profile is a critical value") {
  CHECK(code_of([] { find_crossings(two_cosines(), 1.0); }) == ErrorCode::CriticalValue);
}

TEST_CASE("homogeneous potential is degree zero outside the unit ball") {
  const ProblemSpec spec = two_cosines();
  const auto& v = spec.potentials[0];
  for (double th : {0.1, 1.0, 2.5, -2.0}) {
    const Point x = pt(std::cos(th), std::sin(th));
    CHECK(v.value(2.0 * x) == doctest::Approx(v.value(7.0 * x)));
    CHECK(v.value(3.0 * x) == doctest::Approx(std::cos(th)));
    // Euler: x . grad V = 0
    CHECK(std::abs((3.0 * x).dot(v.gradient(3.0 * x))) < 1e-12);
  }
  CHECK(v.value(pt(0.1, 0.1)) == 0.0);
}

TEST_CASE("potential gradients match finite differences") {
  const ProblemSpec spec = spec_from_json(json::parse(R"({"ambient_dim":2,"mode":"decaying","channels":[
      {"decaying":{"preset":"coulomb_like","params":{"strength":-3,"rho":1.5,"center":[0.5,-0.2]}}},
      {"decaying":{"preset":"gaussian","params":{"strength":2,"width":1.3}}}]})"));
  const double h = 1e-6;
  for (const auto& p : spec.potentials) {
    for (const Point& x : {pt(0.3, 0.7), pt(-1.2, 2.0), pt(3.0, -0.5)}) {
      const Point g = p.gradient(x);
      for (int k = 0; k < 2; ++k) {
        Point xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        CHECK(g(k) == doctest::Approx((p.value(xp) - p.value(xm)) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("weight a: dilation limit and Hessian bound after auto beta") {
  const ProblemSpec spec = two_cosines();
  const auto cut = build_cutoffs(find_crossings(spec, 0.3), 2, 0.3);
  const Weight w0 = dilation_weight();
  CHECK(w0.value(pt(2, 1)) == doctest::Approx(1.25));
  const double beta = auto_beta(spec, cut, {pt(1, 0), pt(0, 5)});
  CHECK(beta > 0.0);
  const Weight w = weight_a(spec, cut, beta);
  // property: Hess a >= 1/4 on a ring finer than the one used by auto_beta
  double lo = 1e9;
  for (double r : {0.75, 3.0, 12.0}) {
    for (int i = 0; i < 3000; ++i) {
      const double th = 2 * std::numbers::pi * (i + 0.37) / 3000;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.hessian(pt(r * std::cos(th), r * std::sin(th))));
      lo = std::min(lo, es.eigenvalues()(0));
    }
  }
  CHECK(lo >= 0.25 - 1e-6);
  // gradient consistency
  const double h = 1e-6;
  const Point x = pt(1.3, -2.1);
  for (int k = 0; k < 2; ++k) {
    Point xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    CHECK(w.gradient(x)(k) == doctest::Approx((w.value(xp) - w.value(xm)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("cutoff width must stay below half the crossing separation") {
  const ProblemSpec spec = two_cosines();
  const CrossingSet c = find_crossings(spec, 0.3);
  CHECK(code_of([&] { build_cutoffs(c, 2, 2.0); }) == ErrorCode::WidthTooLarge);
  CHECK(code_of([&] { build_cutoffs(c, 2, 0.0); }) == ErrorCode::WidthTooLarge);
}

TEST_CASE("config: channel indices are 1-based and unknown keys are rejected") {
  const ProblemSpec s = spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"decaying",
      "channels":[{"constant":0},{"constant":1}],
      "couplings":[{"j":1,"k":2,"preset":"gaussian","params":{"strength":0.5}}]})"));
  REQUIRE(s.couplings.size() == 1);
  CHECK(s.couplings[0].j == 0);
  CHECK(s.couplings[0].k == 1);
  CHECK(s.potentials[1].constant == 1.0);
  CHECK(code_of([] { spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"decaying","channels":[{"konstant":0}]})")); }) ==
        ErrorCode::SpecInvalid);
  CHECK(code_of([] {
          spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"decaying","channels":[{"constant":0}],
            "couplings":[{"j":1,"k":3}]})"));
        }) == ErrorCode::SpecInvalid);
  CHECK(code_of([] { spec_from_json(json::parse(R"({"ambient_dim":"one"})")); }) == ErrorCode::SpecInvalid);
}

TEST_CASE("config: mode constraints") {
  // homogeneous mode in one dimension
  CHECK(code_of([] {
          spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"homogeneous",
            "channels":[{"homogeneous":{"preset":"constant","params":{"value":1}}}]})"));
        }) == ErrorCode::SpecInvalid);
  // many-body mode without lattice
  CHECK(code_of([] { spec_from_json(json::parse(R"({"ambient_dim":2,"mode":"manybody","channels":[{"constant":0}]})")); }) ==
        ErrorCode::SpecInvalid);
}

TEST_CASE("config: missing file") {
  CHECK(code_of([] { load_spec("/nonexistent/spec.json"); }) == ErrorCode::IoFailure);
}

TEST_CASE("assumption report for a short-range well") {
  const ProblemSpec spec = spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"decaying",
      "channels":[{"decaying":{"preset":"gaussian","params":{"strength":-8,"width":1}}}]})"));
  const AssumptionReport r = validate_assumptions(spec, -1.2);
  CHECK(r.all_passed());
}

TEST_CASE("assumption report flags a slowly decaying coupling") {
  const ProblemSpec spec = spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"decaying",
      "channels":[{"constant":0},{"constant":1}],
      "couplings":[{"j":1,"k":2,"preset":"constant","params":{"value":0.5}}]})"));
  const AssumptionReport r = validate_assumptions(spec, 1.5);
  CHECK_FALSE(r.all_passed());
}

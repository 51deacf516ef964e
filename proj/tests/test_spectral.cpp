#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mstate/config.hpp"
#include "mstate/discretize.hpp"
#include "mstate/errors.hpp"
#include "mstate/spectral.hpp"

using namespace mstate;
using json = nlohmann::json;

namespace {

ProblemSpec well_1d(double strength) {
  json j = json::parse(R"({"ambient_dim":1,"mode":"decaying",
      "channels":[{"decaying":{"preset":"gaussian","params":{"strength":-8,"width":1}}}]})");
  j["channels"][0]["decaying"]["params"]["strength"] = strength;
  return spec_from_json(j);
}

ProblemSpec free_two_channel() {
  return spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"decaying","channels":[{"constant":0},{"constant":1}]})"));
}

// independent oracle: symmetric tridiagonal -d^2/dx^2 + V on the vertex grid
Eigen::VectorXd tridiagonal_eigenvalues(const Grid& g, const std::function<double(double)>& V) {
  const int n = g.size();
  const double h = g.spacing();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    H(i, i) = 2.0 / (h * h) + V(g.coordinate(i));
    if (i > 0) H(i, i - 1) = H(i - 1, i) = -1.0 / (h * h);
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace

TEST_CASE("shift-invert Lanczos agrees with dense diagonalization") {
  const Grid g(1, 20.0, 800);
  const DiscreteOperator P = build_P(well_1d(-8.0), g);
  EigenOptions lanczos;
  lanczos.dense_cap = 10;
  const EigenPairs it = eigenpairs_in(P, -6.0, 0.3, lanczos);
  const EigenPairs dn = dense_eigenpairs(P);
  int k = 0;
  for (int i = 0; i < dn.size(); ++i) {
    if (dn.values(i) > -6.0 && dn.values(i) < 0.3) {
      REQUIRE(k < it.size());
      CHECK(it.values(k) == doctest::Approx(dn.values(i)).epsilon(1e-10));
      ++k;
    }
  }
  CHECK(k == it.size());
  CHECK((it.vectors.adjoint() * it.vectors - Eigen::MatrixXcd::Identity(k, k)).norm() < 1e-8);
  CHECK(count_below(P, 0.3) - count_below(P, -6.0) == k);
}

TEST_CASE("lowest eigenpairs in 2D with degeneracies") {
  const Grid g(2, 3.0, 40);
  const DiscreteOperator L = build_laplacian(g);
  EigenOptions lanczos;
  lanczos.dense_cap = 10;
  const EigenPairs low = lowest_eigenpairs(L, 12, lanczos);
  const double h = g.spacing();
  std::vector<double> exact;
  for (int a = 1; a < 40; ++a) {
    for (int b = 1; b < 40; ++b) {
      exact.push_back(4.0 / (h * h) *
                      (std::pow(std::sin(a * std::numbers::pi / 80), 2) + std::pow(std::sin(b * std::numbers::pi / 80), 2)));
    }
  }
  std::sort(exact.begin(), exact.end());
  REQUIRE(low.size() >= 12);
  for (int i = 0; i < 12; ++i) CHECK(low.values(i) == doctest::Approx(exact[i]).epsilon(1e-10));
}

TEST_CASE("window projection is an orthogonal projector") {
  const Grid g(1, 10.0, 128);
  const DiscreteOperator P = build_P(well_1d(-8.0), g);
  const WindowProjection E = window_projection(P, SpectralWindow(0.5, 0.4));
  const Eigen::MatrixXcd M = E.projector();
  CHECK((M * M - M).norm() < 1e-10);
  CHECK((M - M.adjoint()).norm() < 1e-12);
  CHECK(std::abs(M.trace().real() - E.rank()) < 1e-10);
}

TEST_CASE("spectral and Chebyshev filters agree") {
  const Grid g(1, 10.0, 256);
  const DiscreteOperator P = build_P(free_two_channel(), g);
  const SmoothBump f(1.5, 0.2, 0.4);
  const SpectralFilter a = smooth_filter(P, f, FilterMethod::Spectral);
  const SpectralFilter b = smooth_filter(P, f, FilterMethod::Chebyshev);
  CVec u(P.size());
  for (int i = 0; i < P.size(); ++i) u(i) = std::exp(-std::pow(g.coordinate(i % g.size()), 2) / 4.0);
  CHECK((a.apply(u) - b.apply(u)).norm() / a.apply(u).norm() < 1e-6);
  CHECK(b.chebyshev_degree() > 0);
}

TEST_CASE("free-channel Mourre bound 2(lambda - c_j - delta)") {
  const ProblemSpec spec = free_two_channel();
  const MourreBuilder b = [&](const Grid& g) {
    DiscreteOperator P = build_P(spec, g);
    DiscreteOperator C = mourre_form(P, g, dilation_weight());
    return std::make_pair(std::move(P), std::move(C));
  };
  const MourreReport r = mourre_report(b, {Grid(1, 40.0, 1024)}, SpectralWindow(1.5, 0.1), 0.75);
  CHECK(r.pure_bound);
  CHECK(r.negative_modes() == 0);
  CHECK(r.rayleigh_min() >= 0.75);
  // frozen from the reference run: restricted form minimum on L = 40, N = 1024
  CHECK(r.rayleigh_min() == doctest::Approx(0.8911).epsilon(1e-3));
  CHECK(r.verdict == "pure Mourre bound");
}

TEST_CASE("bound states below the window give localized negative modes") {
  const ProblemSpec spec = well_1d(-8.0);
  const MourreBuilder b = [&](const Grid& g) {
    DiscreteOperator P = build_P(spec, g);
    DiscreteOperator C = mourre_form(P, g, dilation_weight());
    return std::make_pair(std::move(P), std::move(C));
  };
  const MourreReport r =
      mourre_report(b, {Grid(1, 40.0, 1024), Grid(1, 80.0, 2048)}, SpectralWindow(-1.2, 0.45), 0.5);
  CHECK_FALSE(r.pure_bound);
  CHECK(r.stable);
  CHECK(r.localized);
  CHECK(r.verdict == "Mourre-compatible");
}

TEST_CASE("thresholds of the two-line lattice match an independent tridiagonal solve") {
  const ProblemSpec spec = spec_from_json(json::parse(R"({"ambient_dim":2,"mode":"manybody",
      "lattice":{"generators":[[[1,0]],[[0,1]]]},
      "channels":[{"constant":0,"manybody":[{"subspace":[[1,0]],"preset":"gaussian","params":{"strength":-8}}]},
                  {"constant":1}]})"));
  const ThresholdSet T = thresholds(spec, spec.lattice->a_max());
  const Eigen::VectorXd ev =
      tridiagonal_eigenvalues(Grid(1, 40.0, 1024), [](double x) { return -8.0 * std::exp(-x * x); });
  std::vector<double> expected{0.0, 1.0};
  for (int i = 0; i < ev.size() && ev(i) < 0.0; ++i) expected.push_back(ev(i));
  std::sort(expected.begin(), expected.end());
  const std::vector<double> got = T.energies();
  REQUIRE(got.size() == expected.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-9));
  CHECK(T.sigma == doctest::Approx(expected.front()));
  CHECK(d_lambda(T, 1.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(d_lambda(T, T.sigma - 1.0), Error);
}

TEST_CASE("thresholds without bound states are the channel constants") {
  const ProblemSpec spec = spec_from_json(json::parse(R"({"ambient_dim":2,"mode":"manybody",
      "lattice":{"generators":[[[1,0]],[[0,1]]]},
      "channels":[{"constant":0,"manybody":[{"subspace":[[1,0]],"preset":"gaussian","params":{"strength":2}}]},
                  {"constant":1}]})"));
  const std::vector<double> got = thresholds(spec, spec.lattice->a_max()).energies();
  REQUIRE(got.size() == 2);
  CHECK(got[0] == 0.0);
  CHECK(got[1] == 1.0);
}

TEST_CASE("d(lambda) picks the nearest threshold below") {
  ThresholdSet T;
  T.values = {{-2.0, "a"}, {0.0, "b"}, {1.0, "c"}};
  T.sigma = -2.0;
  CHECK(d_lambda(T, 1.5) == doctest::Approx(0.5));
  CHECK(d_lambda(T, 0.25) == doctest::Approx(0.25));
  CHECK(d_lambda(T, -1.0) == doctest::Approx(1.0));
}

TEST_CASE("Weyl residual shrinks when the scale doubles") {
  const ProblemSpec spec = spec_from_json(json::parse(R"({"ambient_dim":2,"mode":"homogeneous",
      "channels":[{"homogeneous":{"preset":"cosine_homogeneous","params":{"offset":2,"amplitude":1,"power":2}}}]})"));
  const Eigen::Vector2d w = minimizing_direction(spec, 0);
  CHECK(std::abs(w(0)) < 1e-3);
  const Grid g(2, 24.0, 256);
  const double r2 = weyl_residual(spec, g, 0, 3.0, 2.0);
  const double r4 = weyl_residual(spec, g, 0, 3.0, 4.0);
  CHECK(r2 / r4 >= 1.7);
  CHECK_THROWS_AS(weyl_residual(spec, g, 0, 1.0, 2.0), Error);
  CHECK_THROWS_AS(weyl_residual(spec, g, 0, 3.0, 5.0), Error);
}

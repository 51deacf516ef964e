#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mstate/config.hpp"
#include "mstate/discretize.hpp"
#include "mstate/eigensolver.hpp"
#include "mstate/errors.hpp"

using namespace mstate;
using json = nlohmann::json;

namespace {

CVec random_vector(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

ProblemSpec coupled_1d() {
  return spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"decaying",
      "channels":[{"decaying":{"preset":"coulomb_like","params":{"strength":-3,"rho":1}}},{"constant":-2}],
      "couplings":[{"j":1,"k":2,"preset":"coulomb_like","params":{"strength":0.3,"rho":1}},
                   {"j":1,"k":2,"kind":"first_order","preset":"gaussian","params":{"strength":0.2},"direction":[1]}]})"));
}

double max_abs(const SpMat& m) {
  double r = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SpMat::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  }
  return r;
}

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g(2, 5.0, 10);
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.axis_size() == 9);
  CHECK(g.size() == 81);
  CHECK(g.coordinate(0) == doctest::Approx(-4.0));
  CHECK(g.coordinate(4) == doctest::Approx(0.0));
  for (int p : {0, 13, 80}) CHECK(g.flatten(g.unflatten(p)) == p);
  CHECK(g.stride(1) == 1);
  CHECK(g.stride(0) == 9);
  CHECK_THROWS_AS(Grid(3, 1.0, 8), Error);
  CHECK_THROWS_AS(Grid(1, 1.0, 7), Error);
}

TEST_CASE("Dirichlet Laplacian eigenvalues match the closed form") {
  const Grid g(1, 3.0, 24);
  const EigenPairs e = dense_eigenpairs(build_laplacian(g));
  const double h = g.spacing();
  for (int k = 1; k < 24; ++k) {
    const double exact = 4.0 / (h * h) * std::pow(std::sin(k * std::numbers::pi / (2.0 * 24)), 2);
    CHECK(e.values(k - 1) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("Dirichlet positivity of -Delta_h") {
  const Grid g(2, 4.0, 16);
  const DiscreteOperator L = build_laplacian(g);
  for (unsigned s = 0; s < 5; ++s) {
    const CVec u = random_vector(g.size(), s);
    CHECK(std::real(u.dot(L.apply(u))) >= 0.0);
  }
}

TEST_CASE("assembled operators are Hermitian") {
  const Grid g(1, 10.0, 64);
  const DiscreteOperator P = build_P(coupled_1d(), g);
  CHECK(P.hermitian_defect() <= 1e-10);
  const DiscreteOperator A = build_A(g);
  CHECK(A.hermitian_defect() <= 1e-12);
  const ProblemSpec h = spec_from_json(json::parse(R"({"ambient_dim":2,"mode":"homogeneous","channels":[
     {"homogeneous":{"preset":"cosine_homogeneous","params":{"amplitude":1}}},
     {"homogeneous":{"preset":"cosine_homogeneous","params":{"amplitude":1,"phase":0.5}}}],
     "couplings":[{"j":2,"k":1,"kind":"first_order","preset":"gaussian","direction":[1,0.5]}]})"));
  CHECK(build_P(h, Grid(2, 5.0, 12)).hermitian_defect() <= 1e-10);
}

TEST_CASE("without couplings the spectrum is the union of channel spectra") {
  const Grid g(1, 6.0, 40);
  const ProblemSpec two = spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"decaying",
      "channels":[{"decaying":{"preset":"gaussian","params":{"strength":-4}}},{"constant":0.7}]})"));
  const ProblemSpec one = spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"decaying",
      "channels":[{"decaying":{"preset":"gaussian","params":{"strength":-4}}}]})"));
  std::vector<double> all;
  const EigenPairs full = dense_eigenpairs(build_P(two, g));
  const EigenPairs a = dense_eigenpairs(build_P(one, g));
  const EigenPairs b = dense_eigenpairs(build_laplacian(g));
  for (int i = 0; i < a.size(); ++i) all.push_back(a.values(i));
  for (int i = 0; i < b.size(); ++i) all.push_back(b.values(i) + 0.7);
  std::sort(all.begin(), all.end());
  REQUIRE(static_cast<int>(all.size()) == full.size());
  for (int i = 0; i < full.size(); ++i) CHECK(full.values(i) == doctest::Approx(all[i]).epsilon(1e-9));
}

TEST_CASE("beta = 0 turns A_V into A") {
  const Grid g(2, 4.0, 12);
  const SpMat d = build_AV(g, dilation_weight()).matrix() - build_A(g).matrix();
  CHECK(max_abs(d) < 1e-12);
}

TEST_CASE("commutator of an operator with itself vanishes") {
  const Grid g(1, 5.0, 32);
  const DiscreteOperator P = build_P(coupled_1d(), g);
  CHECK(max_abs(commutator(P, P).matrix()) < 1e-12);
  CHECK_THROWS_AS(commutator(P, build_laplacian(g)), Error);
}

TEST_CASE("i[-Delta_h, A_h] approximates 2(-Delta_h) with second-order error") {
  std::vector<double> errs;
  for (int n : {128, 256}) {
    const Grid g(1, 16.0, n);
    const DiscreteOperator L = build_laplacian(g);
    const DiscreteOperator C = commutator(L, build_A(g));
    CVec u(g.size());
    for (int p = 0; p < g.size(); ++p) {
      const double x = g.coordinate(p);
      u(p) = std::exp(-x * x / 8.0) * std::exp(cplx(0.0, 1.5 * x));
    }
    const CVec ref = 2.0 * L.apply(u);
    errs.push_back((C.apply(u) - ref).norm() / ref.norm());
    CHECK(errs.back() <= 5.0 * g.spacing());
  }
  CHECK(errs[1] < errs[0] / 3.5);
}

TEST_CASE("i[V, A] approximates -x . grad V with second-order error") {
  const ScalarField v = gaussian(1.0, 1.5, Point::Zero(1));
  std::vector<double> errs;
  for (int n : {256, 512}) {
    const Grid g(1, 12.0, n);
    DiscreteOperator V(channel_kron(SpMat(diagonal(g, v.value).cast<cplx>()), 1), 1);
    const DiscreteOperator C = commutator(V, build_A(g));
    CVec u(g.size()), ref(g.size());
    for (int p = 0; p < g.size(); ++p) {
      const Point x = g.point(p);
      u(p) = std::exp(-x.squaredNorm() / 4.0);
      ref(p) = -x.dot(v.gradient(x)) * u(p);
    }
    errs.push_back((C.apply(u) - ref).norm() / ref.norm());
  }
  CHECK(errs[1] < 5e-3);
  CHECK(errs[1] < errs[0] / 3.5);
}

TEST_CASE("kinetic commutator of the dilation weight is exactly 2(-Delta_h)") {
  const Grid g(2, 4.0, 10);
  const SpMat d = kinetic_commutator(g, dilation_weight()).matrix() - 2.0 * build_laplacian(g).matrix();
  CHECK(max_abs(d) < 1e-10);
}

TEST_CASE("subsystem on a line equals the directly built 1D operator") {
  const ProblemSpec mb = spec_from_json(json::parse(R"({"ambient_dim":2,"mode":"manybody",
      "lattice":{"generators":[[[1,0]],[[0,1]]]},
      "channels":[{"constant":0,"manybody":[{"subspace":[[1,0]],"preset":"gaussian","params":{"strength":-8}}]},
                  {"constant":1}]})"));
  const ProblemSpec ref = spec_from_json(json::parse(R"({"ambient_dim":1,"mode":"decaying",
      "channels":[{"decaying":{"preset":"gaussian","params":{"strength":-8}}},{"constant":1}]})"));
  const Grid g(1, 10.0, 64);
  const int b = mb.lattice->find(Subspace::from_rows({{1, 0}}, 2));
  CHECK(max_abs(build_subsystem(mb, g, b).matrix() - build_P(ref, g).matrix()) < 1e-12);
  // the full-space element has no internal coordinates
  CHECK_THROWS_AS(build_subsystem(mb, g, mb.lattice->a_min()), Error);
  try {
    build_subsystem(ref, g, 0);
    FAIL("expected NotManyBody");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotManyBody);
  }
}

TEST_CASE("channel-major layout of the coupling blocks") {
  const Grid g(1, 5.0, 16);
  const DiscreteOperator P = build_P(coupled_1d(), g);
  const Eigen::MatrixXcd D = P.dense();
  const int n = g.size();
  CHECK((D.block(0, n, n, n) - D.block(n, 0, n, n).adjoint()).norm() < 1e-12);
  CHECK(D.block(0, n, n, n).norm() > 0.0);
}

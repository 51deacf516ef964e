#pragma once

#include <Eigen/Dense>
#include <vector>

#include "json.hpp"
#include "mstate/lattice.hpp"

namespace mstate {

struct GrafJet {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Smooth convex G built as an iterated pairwise smooth maximum of the
/// quadratics q_a(x) = |x_a|^2/2 + r_a over all lattice elements, where x_a is
/// the component of x in X_a. smax(u, v) = (u + v)/2 + m((u - v)/2) with m the
/// mollified |z|, so smax = max whenever |u - v| >= 2 * smoothing.
class GrafField {
 public:
  /// Empty offsets select r_a = dim(X^a) / 2.
  GrafField(const SubspaceLattice& lattice, double smoothing, std::vector<double> offsets = {});

  GrafJet jet(const Eigen::VectorXd& x) const;
  double value(const Eigen::VectorXd& x) const { return jet(x).value; }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return jet(x).gradient; }

  const SubspaceLattice& lattice() const { return lattice_; }
  const std::vector<double>& offsets() const { return offsets_; }
  double smoothing() const { return smoothing_; }

 private:
  SubspaceLattice lattice_;
  double smoothing_;
  std::vector<double> offsets_;
  std::vector<Eigen::MatrixXd> proj_;  // Pi_a
};

struct GrafCheckOptions {
  int samples = 10000;
  double radius = 10.0;
  unsigned seed = 20240611;
  double psd_tol = 1e-8;
  double flat_tol = 1e-10;
};

struct GrafReport {
  int samples = 0;
  double C1 = 0.0;  // min of 2G over the samples
  double C2 = 0.0;  // max of 2G - x^2
  double min_hessian_eigenvalue = 0.0;
  double derivative_sup_inner = 0.0;  // sup |d^alpha (2G - x^2)|, |alpha| = 1, 2 on |x| <= R
  double derivative_sup_outer = 0.0;  // same on 4R <= |x| <= 8R
  bool derivatives_bounded = false;
  double delta = 0.0;  // min over elements with X_a != X of the measured flatness radius
  std::vector<double> delta_per_element;

  nlohmann::json to_json() const;
};

GrafField build_graf_G(const SubspaceLattice& lattice, double smoothing, std::vector<double> offsets = {});

/// Samples the three Graf properties; throws PropertyViolated with the
/// offending point if the lower/upper bound or Hessian positivity fails.
GrafReport check_graf(const GrafField& g, const GrafCheckOptions& options = {});

}  // namespace mstate

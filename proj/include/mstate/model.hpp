#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mstate/lattice.hpp"

namespace mstate {

using Point = Eigen::VectorXd;

/// Real scalar function on the ambient space with its gradient.
struct ScalarField {
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;
  std::string preset;
  double decay_rate = 0.0;

  double operator()(const Point& x) const { return value(x); }
};

/// Vector-valued coefficient (first-order coupling r-tilde).
struct VectorField {
  std::function<Point(const Point&)> value;
  std::string preset;
  double decay_rate = 0.0;
};

/// Function on the unit circle, parametrized by the polar angle.
struct AngularProfile {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::string preset;
};

/// s(|x|) g(x/|x|): degree-zero homogeneous for |x| >= 1/2, switched off
/// smoothly inside |x| <= 1/4. In one dimension the sphere is {+1, -1}, which
/// maps to the angles 0 and pi.
class HomogeneousPotential {
 public:
  explicit HomogeneousPotential(AngularProfile profile) : profile_(std::move(profile)) {}

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  double on_sphere(double theta) const { return profile_.value(theta); }
  double tangential_derivative(double theta) const { return profile_.derivative(theta); }
  const AngularProfile& profile() const { return profile_; }

 private:
  AngularProfile profile_;
};

/// v_j^b evaluated through the coordinates C^T x, where the columns of C are
/// expected to lie in X^b.
struct ManyBodyTerm {
  int element = 0;
  Eigen::MatrixXd coordinates;
  ScalarField field;  // already composed with the coordinate map
};

struct ChannelPotential {
  std::optional<HomogeneousPotential> homogeneous;
  std::optional<ScalarField> decaying;
  double constant = 0.0;
  std::vector<ManyBodyTerm> manybody_terms;

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  /// Sum of the many-body terms with element b satisfying pred(b), plus c_j.
  double value_restricted(const Point& x, const std::function<bool(int)>& pred) const;
};

/// r_jk = r_tilde . grad + r_hat, assembled in symmetric form by discretize.
struct CouplingTerm {
  int j = 0;
  int k = 1;
  std::optional<VectorField> r_tilde;
  std::optional<ScalarField> r_hat;
  std::optional<int> element;
  Eigen::MatrixXd coordinates;  // many-body case: coordinates the coefficients read
  double decay_rate = 0.0;
};

enum class Mode { Decaying, Homogeneous, ManyBody };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& s);

struct ProblemSpec {
  int channels = 1;
  int ambient_dim = 1;
  Mode mode = Mode::Decaying;
  std::vector<ChannelPotential> potentials;
  std::vector<CouplingTerm> couplings;
  std::optional<SubspaceLattice> lattice;

  /// Structural checks (sizes, indices, mode constraints). Throws SpecInvalid.
  void validate() const;
};

struct CrossingSet {
  double energy = 0.0;
  std::vector<double> angles;
  std::vector<Eigen::Vector2d> directions;
  std::vector<std::vector<int>> memberships;

  std::size_t size() const { return angles.size(); }
};

struct CrossingOptions {
  int scan_points = 4096;
  double angular_tol = 1e-12;
  double critical_threshold = 1e-6;
};

CrossingSet find_crossings(const ProblemSpec& spec, double energy, const CrossingOptions& options = {});

struct GradientMargin {
  int direction = 0;
  int channel = 0;
  double margin = 0.0;
  bool passed = false;
};

struct GradientConditionReport {
  std::vector<GradientMargin> margins;
  bool all_passed() const;
  double min_margin() const;
};

GradientConditionReport check_gradient_condition(const CrossingSet& crossings, const ProblemSpec& spec);

/// Degree-zero angular cutoff chi_j.
class Cutoff {
 public:
  Cutoff() = default;
  Cutoff(std::vector<double> owned, double width);

  double on_sphere(double theta) const;
  double derivative(double theta) const;
  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  bool is_zero() const { return owned_.empty(); }

 private:
  std::vector<double> owned_;
  double width_ = 0.0;
};

std::vector<Cutoff> build_cutoffs(const CrossingSet& crossings, int channels, double width);

/// Weight function a(x) of the modified conjugate operator and its derivatives.
struct Weight {
  double beta = 0.0;
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;
  std::function<Eigen::MatrixXd(const Point&)> hessian_exact;  // optional
  std::function<double(const Point&)> bilaplacian_exact;      // optional

  Eigen::MatrixXd hessian(const Point& x) const;
  double bilaplacian(const Point& x) const;
};

/// a(x) = |x|^2 / 4, which turns A_V into the dilation generator.
Weight dilation_weight();

/// a(x) = (1 - 2 beta sum_j V~_j chi_j) |x|^2 / 4. Throws BetaTooLarge if the
/// prefactor drops below 1/2 on sampled directions.
Weight weight_a(const ProblemSpec& spec, const std::vector<Cutoff>& cutoffs, double beta);

/// Halves beta from 0.5 until the prefactor stays >= 1/2 and the Hessian of a
/// is >= 1/4 at every sample point. Returns the accepted beta.
double auto_beta(const ProblemSpec& spec, const std::vector<Cutoff>& cutoffs,
                 const std::vector<Point>& samples, double beta_start = 0.5, int max_halvings = 20);

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  std::vector<std::pair<double, double>> samples;  // (radius, sampled max)
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
  const AssumptionCheck* find(const std::string& name) const;
};

struct AssumptionOptions {
  double box_radius = 40.0;
  int rays = 8;
  double decay_ratio = 0.25;
};

AssumptionReport validate_assumptions(const ProblemSpec& spec, double energy, const AssumptionOptions& options = {});

/// Angle of a point in the plane (0 for the origin).
double polar_angle(const Point& x);
/// Signed angular distance wrapped to (-pi, pi].
double angular_difference(double a, double b);

}  // namespace mstate

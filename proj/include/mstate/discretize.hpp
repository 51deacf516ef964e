#pragma once

#include <Eigen/Sparse>
#include <string>

#include "mstate/grid.hpp"
#include "mstate/model.hpp"

namespace mstate {

using SpMat = Eigen::SparseMatrix<cplx>;
using RealSpMat = Eigen::SparseMatrix<double>;

/// Sparse complex matrix acting on channel-stacked grid functions.
class DiscreteOperator {
 public:
  DiscreteOperator() = default;
  DiscreteOperator(SpMat matrix, int channels, std::string label = "");

  CVec apply(const CVec& u) const { return matrix_ * u; }
  DiscreteState apply(const DiscreteState& u) const { return DiscreteState(apply(u.values), u.channels); }
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix_); }
  const SpMat& matrix() const { return matrix_; }
  int size() const { return static_cast<int>(matrix_.rows()); }
  int channels() const { return channels_; }
  const std::string& label() const { return label_; }

  /// max |O - O*| over entries.
  double hermitian_defect() const;
  /// Defect measured before re-Hermitization (commutators only, else 0).
  double recorded_defect() const { return recorded_defect_; }
  void set_recorded_defect(double d) { recorded_defect_ = d; }
  bool is_real() const;
  RealSpMat real_part() const;

  /// Coordinate-format text export: one "row col re im" line per nonzero.
  void export_coo(const std::string& path) const;

 private:
  SpMat matrix_;
  int channels_ = 1;
  std::string label_;
  double recorded_defect_ = 0.0;
};

/// Central difference along axis k (antisymmetric, Dirichlet).
RealSpMat central_difference(const Grid& grid, int k);
/// Forward difference from the N-1 unknowns to the N edges along axis k.
RealSpMat forward_difference(const Grid& grid, int k);
/// Midpoint of every edge of forward_difference(grid, k).
std::vector<Eigen::VectorXd> edge_midpoints(const Grid& grid, int k);
RealSpMat diagonal(const Grid& grid, const std::function<double(const Point&)>& f);
/// I_m (x) O for a single-channel operator.
SpMat channel_kron(const SpMat& op, int m);

DiscreteOperator build_laplacian(const Grid& grid);
DiscreteOperator build_P(const ProblemSpec& spec, const Grid& grid);
/// -i (x.D + D.x)/2 on one channel.
DiscreteOperator build_A(const Grid& grid);
/// -i sum_k (d_k a D_k + D_k d_k a) on one channel.
DiscreteOperator build_AV(const Grid& grid, const Weight& weight);
/// i(O1 O2 - O2 O1), re-Hermitized; the pre-symmetrization defect is recorded.
DiscreteOperator commutator(const DiscreteOperator& o1, const DiscreteOperator& o2);

/// Discretization of the continuum identity i[-Delta, A_V] = -4 d_k a_kl d_l - Delta^2 a
/// on one channel. Diagonal Hessian terms use the staggered forward-difference
/// form so that a = |x|^2/4 gives exactly 2(-Delta_h).
DiscreteOperator kinetic_commutator(const Grid& grid, const Weight& weight);

/// Quadratic form of i[P, A_V (x) I_m]: kinetic part from kinetic_commutator,
/// potentials and couplings through the plain matrix commutator.
DiscreteOperator mourre_form(const DiscreteOperator& P, const Grid& grid, const Weight& weight);

/// P^a on a grid over the coordinates of X^a (basis: complement of X_a).
/// Throws NotManyBody outside manybody mode and ShapeMismatch when the grid
/// dimension differs from dim X^a (in particular for a_min).
DiscreteOperator build_subsystem(const ProblemSpec& spec, const Grid& grid, int element);

}  // namespace mstate

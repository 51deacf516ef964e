#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "json.hpp"

namespace mstate {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;

/// Uniform Dirichlet box [-L, L]^n with spacing h = 2L/N. The unknowns sit on
/// the interior vertices x_i = -L + i h, i = 1..N-1, so the origin is a grid
/// point and the boundary values are zero.
class Grid {
 public:
  Grid(int dim, double half_width, int points_per_axis);

  int dim() const { return dim_; }
  double half_width() const { return L_; }
  int points_per_axis() const { return N_; }
  double spacing() const { return 2.0 * L_ / N_; }
  /// Interior unknowns per axis (N - 1).
  int axis_size() const { return N_ - 1; }
  /// Unknowns per channel, (N - 1)^n.
  int size() const;
  double coordinate(int i) const { return -L_ + (i + 1) * spacing(); }
  std::vector<double> axis() const;

  /// Multi-index of a flat (row-major) index.
  std::vector<int> unflatten(int flat) const;
  int flatten(const std::vector<int>& idx) const;
  Eigen::VectorXd point(int flat) const;
  /// Stride of axis k in the flat index.
  int stride(int k) const;

  nlohmann::json to_json() const;

 private:
  int dim_;
  double L_;
  int N_;
};

/// Channel-stacked grid function; block j occupies [j*size, (j+1)*size).
struct DiscreteState {
  CVec values;
  int channels = 1;
  int block_size = 0;

  DiscreteState() = default;
  DiscreteState(CVec v, int m);

  double norm() const { return values.norm(); }
  auto block(int j) { return values.segment(static_cast<Eigen::Index>(j) * block_size, block_size); }
  auto block(int j) const { return values.segment(static_cast<Eigen::Index>(j) * block_size, block_size); }
  double channel_mass(int j) const { return block(j).squaredNorm(); }
};

}  // namespace mstate

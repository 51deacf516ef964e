#include "mstate/grid.hpp"

#include "mstate/errors.hpp"

namespace mstate {

Grid::Grid(int dim, double half_width, int points_per_axis) : dim_(dim), L_(half_width), N_(points_per_axis) {
  if (dim < 1 || dim > 2) throw Error(ErrorCode::ShapeMismatch, "grids are 1D or 2D");
  if (!(half_width > 0.0)) throw Error(ErrorCode::ShapeMismatch, "half width must be positive");
  if (points_per_axis < 4 || points_per_axis % 2 != 0) {
    throw Error(ErrorCode::ShapeMismatch, "points per axis must be even and >= 4");
  }
}

int Grid::size() const {
  int s = 1;
  for (int k = 0; k < dim_; ++k) s *= axis_size();
  return s;
}

std::vector<double> Grid::axis() const {
  std::vector<double> a(axis_size());
  for (int i = 0; i < axis_size(); ++i) a[i] = coordinate(i);
  return a;
}

int Grid::stride(int k) const {
  int s = 1;
  for (int q = dim_ - 1; q > k; --q) s *= axis_size();
  return s;
}

std::vector<int> Grid::unflatten(int flat) const {
  std::vector<int> idx(dim_);
  for (int k = dim_ - 1; k >= 0; --k) {
    idx[k] = flat % axis_size();
    flat /= axis_size();
  }
  return idx;
}

int Grid::flatten(const std::vector<int>& idx) const {
  int flat = 0;
  for (int k = 0; k < dim_; ++k) flat = flat * axis_size() + idx[k];
  return flat;
}

Eigen::VectorXd Grid::point(int flat) const {
  const auto idx = unflatten(flat);
  Eigen::VectorXd x(dim_);
  for (int k = 0; k < dim_; ++k) x(k) = coordinate(idx[k]);
  return x;
}

nlohmann::json Grid::to_json() const {
  return {{"dim", dim_},
          {"half_width", L_},
          {"points_per_axis", N_},
          {"spacing", spacing()},
          {"interior_points_per_axis", axis_size()},
          {"unknowns_per_channel", size()},
          {"layout", "channel-major, row-major within a channel"}};
}

DiscreteState::DiscreteState(CVec v, int m) : values(std::move(v)), channels(m) {
  if (m < 1 || values.size() % m != 0) throw Error(ErrorCode::ShapeMismatch, "state length not divisible by channels");
  block_size = static_cast<int>(values.size() / m);
  if (!values.allFinite()) throw Error(ErrorCode::ToleranceFailure, "state has non-finite entries");
}

}  // namespace mstate

#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "mstate/discretize.hpp"

namespace mstate {

struct EigenOptions {
  /// Matrices up to this dimension are diagonalized densely.
  int dense_cap = 1500;
  /// Maximum eigenvalue count handled by one shift-invert slice.
  int max_slice = 40;
  double residual_tol = 1e-8;
  std::uint64_t seed = 7;
};

/// Eigenvalues ascending, eigenvectors in matching columns (orthonormal).
struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
  std::string method;

  int size() const { return static_cast<int>(values.size()); }
};

/// Number of eigenvalues strictly below sigma (Sylvester inertia of P - sigma).
long count_below(const DiscreteOperator& P, double sigma);

/// All eigenpairs with eigenvalue in (lo, hi). Dense below the cap, otherwise
/// shift-invert Lanczos on slices whose size is known from inertia counts.
/// Throws EigensolverFailure if the count cannot be matched.
EigenPairs eigenpairs_in(const DiscreteOperator& P, double lo, double hi, const EigenOptions& options = {});

/// The k lowest eigenpairs.
EigenPairs lowest_eigenpairs(const DiscreteOperator& P, int k, const EigenOptions& options = {});

/// Full dense diagonalization regardless of size.
EigenPairs dense_eigenpairs(const DiscreteOperator& P);

/// Gershgorin enclosure [lo, hi] of the spectrum.
std::pair<double, double> gershgorin_bounds(const DiscreteOperator& P);

}  // namespace mstate

#pragma once

#include <Eigen/Dense>
#include "json.hpp"
#include <vector>

namespace mstate {

/// Linear subspace of R^n stored by an orthonormal basis (columns).
class Subspace {
 public:
  /// Empty subspace {0} of R^n.
  explicit Subspace(int ambient_dim);

  /// Span of the given columns. Throws DegenerateGenerator if the columns are
  /// not linearly independent.
  static Subspace from_spanning(const Eigen::MatrixXd& columns);
  /// Span of the given rows (convenience for literal construction).
  static Subspace from_rows(const std::vector<std::vector<double>>& rows, int ambient_dim);
  static Subspace whole(int ambient_dim);

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  Eigen::MatrixXd projector() const { return basis_ * basis_.transpose(); }

  /// Orthonormal basis of the orthogonal complement, canonicalized.
  Subspace complement() const;
  Subspace intersect(const Subspace& other) const;
  bool contains(const Subspace& other) const;
  bool same_as(const Subspace& other) const;

 private:
  explicit Subspace(Eigen::MatrixXd basis) : basis_(std::move(basis)) {}
  static Subspace canonical_from_projector(const Eigen::MatrixXd& projector);

  Eigen::MatrixXd basis_;
};

struct ProjectorPair {
  Eigen::MatrixXd onto_Xa;     // Pi_a
  Eigen::MatrixXd onto_Xperp;  // Pi^a
};

/// Intersection-closed family of subspaces ordered by reverse inclusion:
/// a <= b iff X_a contains X_b. Immutable after construction.
class SubspaceLattice {
 public:
  int ambient_dim() const { return ambient_dim_; }
  int size() const { return static_cast<int>(elements_.size()); }
  const Subspace& element(int a) const { return elements_.at(a); }
  const std::vector<Subspace>& elements() const { return elements_; }
  int a_min() const { return 0; }
  int a_max() const { return size() - 1; }

  bool leq(int a, int b) const { return order_.at(a).at(b); }
  /// Index of the element equal to s, or -1.
  int find(const Subspace& s) const;
  ProjectorPair projectors(int a) const;

  nlohmann::json to_json() const;
  static SubspaceLattice from_json(const nlohmann::json& j);

  friend SubspaceLattice generate_lattice(const std::vector<Subspace>& generators, int ambient_dim);

 private:
  int ambient_dim_ = 0;
  std::vector<Subspace> elements_;
  std::vector<std::vector<bool>> order_;
};

/// Smallest intersection-closed family containing X and the generators.
/// Throws NonTrivialIntersection if the smallest element is not {0}.
SubspaceLattice generate_lattice(const std::vector<Subspace>& generators, int ambient_dim);

bool leq(const SubspaceLattice& lattice, int a, int b);
ProjectorPair projectors(const SubspaceLattice& lattice, int a);

}  // namespace mstate

#include "mstate/lattice.hpp"

#include <algorithm>

#include "mstate/errors.hpp"

namespace mstate {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kSameTol = 1e-10;

}  // namespace

Subspace::Subspace(int ambient_dim) : basis_(Eigen::MatrixXd::Zero(ambient_dim, 0)) {}

Subspace Subspace::whole(int ambient_dim) {
  return Subspace(Eigen::MatrixXd::Identity(ambient_dim, ambient_dim));
}

Subspace Subspace::from_spanning(const Eigen::MatrixXd& columns) {
  const int n = static_cast<int>(columns.rows());
  if (columns.cols() == 0) return Subspace(n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double scale = std::max(1.0, sv(0));
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) <= kRankTol * scale) {
      throw Error(ErrorCode::DegenerateGenerator, "generator basis is not full rank");
    }
  }
  const Eigen::MatrixXd u = svd.matrixU().leftCols(columns.cols());
  return canonical_from_projector(u * u.transpose());
}

Subspace Subspace::from_rows(const std::vector<std::vector<double>>& rows, int ambient_dim) {
  Eigen::MatrixXd cols(ambient_dim, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    if (static_cast<int>(rows[c].size()) != ambient_dim) {
      throw Error(ErrorCode::SpecInvalid, "basis vector has wrong length");
    }
    for (int r = 0; r < ambient_dim; ++r) cols(r, static_cast<Eigen::Index>(c)) = rows[c][r];
  }
  return from_spanning(cols);
}

// Gram-Schmidt over the projector columns in order; the result depends on the
// subspace only, which makes element ordering deterministic.
Subspace Subspace::canonical_from_projector(const Eigen::MatrixXd& projector) {
  const int n = static_cast<int>(projector.rows());
  std::vector<Eigen::VectorXd> basis;
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXd v = projector.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) v -= b.dot(v) * b;
    }
    const double norm = v.norm();
    if (norm > 1e-8) basis.push_back(v / norm);
  }
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = basis[i];
  return Subspace(m);
}

Subspace Subspace::complement() const {
  const int n = ambient_dim();
  return canonical_from_projector(Eigen::MatrixXd::Identity(n, n) - projector());
}

Subspace Subspace::intersect(const Subspace& other) const {
  const int n = ambient_dim();
  if (other.ambient_dim() != n) throw Error(ErrorCode::ShapeMismatch, "ambient dimensions differ");
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd stacked(2 * n, n);
  stacked << id - projector(), id - other.projector();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  std::vector<int> null_cols;
  for (int i = 0; i < n; ++i) {
    if (sv(i) <= kRankTol) null_cols.push_back(i);
  }
  if (null_cols.empty()) return Subspace(n);
  Eigen::MatrixXd v(n, static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t i = 0; i < null_cols.size(); ++i) {
    v.col(static_cast<Eigen::Index>(i)) = svd.matrixV().col(null_cols[i]);
  }
  return canonical_from_projector(v * v.transpose());
}

bool Subspace::contains(const Subspace& other) const {
  const Eigen::MatrixXd pa = projector();
  const Eigen::MatrixXd pb = other.projector();
  return (pa * pb - pb).cwiseAbs().maxCoeff() <= kSameTol;
}

bool Subspace::same_as(const Subspace& other) const {
  if (dim() != other.dim()) return false;
  if (dim() == 0) return true;
  return (projector() - other.projector()).cwiseAbs().maxCoeff() <= kSameTol;
}

int SubspaceLattice::find(const Subspace& s) const {
  for (int i = 0; i < size(); ++i) {
    if (elements_[i].same_as(s)) return i;
  }
  return -1;
}

ProjectorPair SubspaceLattice::projectors(int a) const {
  const Eigen::MatrixXd pa = element(a).projector();
  return {pa, Eigen::MatrixXd::Identity(ambient_dim_, ambient_dim_) - pa};
}

SubspaceLattice generate_lattice(const std::vector<Subspace>& generators, int ambient_dim) {
  std::vector<Subspace> family{Subspace::whole(ambient_dim)};
  const auto add_unique = [&family](const Subspace& s) {
    for (const auto& e : family) {
      if (e.same_as(s)) return false;
    }
    family.push_back(s);
    return true;
  };
  for (const auto& g : generators) {
    if (g.ambient_dim() != ambient_dim) {
      throw Error(ErrorCode::SpecInvalid, "generator lives in a different ambient space");
    }
    add_unique(g);
  }
  bool grew = true;
  while (grew) {
    grew = false;
    const std::size_t count = family.size();
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = i + 1; j < count; ++j) {
        if (add_unique(family[i].intersect(family[j]))) grew = true;
      }
    }
  }

  // Canonical order: dimension descending, then projector entries.
  std::vector<std::pair<Eigen::MatrixXd, Subspace>> keyed;
  for (const auto& s : family) keyed.emplace_back(s.projector(), s);
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) {
    if (x.second.dim() != y.second.dim()) return x.second.dim() > y.second.dim();
    const Eigen::Index total = x.first.size();
    for (Eigen::Index i = 0; i < total; ++i) {
      const double a = x.first.data()[i];
      const double b = y.first.data()[i];
      if (std::abs(a - b) > 1e-9) return a > b;
    }
    return false;
  });

  SubspaceLattice lattice;
  lattice.ambient_dim_ = ambient_dim;
  for (auto& k : keyed) lattice.elements_.push_back(k.second);
  if (lattice.elements_.back().dim() != 0) {
    throw Error(ErrorCode::NonTrivialIntersection,
                "intersection of all elements has dimension " +
                    std::to_string(lattice.elements_.back().dim()));
  }
  const int size = lattice.size();
  lattice.order_.assign(size, std::vector<bool>(size, false));
  for (int a = 0; a < size; ++a) {
    for (int b = 0; b < size; ++b) {
      lattice.order_[a][b] = lattice.elements_[a].contains(lattice.elements_[b]);
    }
  }
  return lattice;
}

bool leq(const SubspaceLattice& lattice, int a, int b) { return lattice.leq(a, b); }

ProjectorPair projectors(const SubspaceLattice& lattice, int a) { return lattice.projectors(a); }

nlohmann::json SubspaceLattice::to_json() const {
  nlohmann::json elems = nlohmann::json::array();
  for (const auto& e : elements_) {
    nlohmann::json basis = nlohmann::json::array();
    for (int c = 0; c < e.dim(); ++c) {
      std::vector<double> v(e.basis().col(c).data(), e.basis().col(c).data() + ambient_dim_);
      basis.push_back(v);
    }
    elems.push_back({{"dim", e.dim()}, {"basis", basis}});
  }
  nlohmann::json order = nlohmann::json::array();
  for (int a = 0; a < size(); ++a) {
    std::vector<int> above;
    for (int b = 0; b < size(); ++b) {
      if (b != a && order_[a][b]) above.push_back(b);
    }
    order.push_back(above);
  }
  return {{"ambient_dim", ambient_dim_}, {"elements", elems}, {"order", order}};
}

SubspaceLattice SubspaceLattice::from_json(const nlohmann::json& j) {
  const int n = j.at("ambient_dim").get<int>();
  std::vector<Subspace> gens;
  for (const auto& e : j.at("elements")) {
    gens.push_back(Subspace::from_rows(e.at("basis").get<std::vector<std::vector<double>>>(), n));
  }
  return generate_lattice(gens, n);
}

}  // namespace mstate

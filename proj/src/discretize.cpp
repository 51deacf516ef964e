#include "mstate/discretize.hpp"

#include <fstream>

#include "mstate/errors.hpp"

namespace mstate {

namespace {

using RealTriplet = Eigen::Triplet<double>;
using Triplet = Eigen::Triplet<cplx>;

SpMat to_complex(const RealSpMat& m) { return m.cast<cplx>(); }

SpMat hermitize(const SpMat& m) {
  SpMat adj = m.adjoint();
  SpMat out = 0.5 * (m + adj);
  out.prune(cplx(0.0, 0.0));
  return out;
}

double max_abs(const SpMat& m) {
  double v = 0.0;
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SpMat::InnerIterator it(m, c); it; ++it) v = std::max(v, std::abs(it.value()));
  }
  return v;
}

// Single-channel operator of the given channel potential and couplings,
// evaluated on points produced by `embed`.
SpMat assemble(const Grid& grid, int m, const std::function<double(int, const Point&)>& potential,
               const std::vector<CouplingTerm>& couplings, const std::function<Point(const Point&)>& embed,
               const Eigen::MatrixXd& to_local) {
  const int ng = grid.size();
  const RealSpMat lap = build_laplacian(grid).real_part();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(m) * (lap.nonZeros() + ng));
  for (int j = 0; j < m; ++j) {
    for (int c = 0; c < lap.outerSize(); ++c) {
      for (RealSpMat::InnerIterator it(lap, c); it; ++it) {
        trip.emplace_back(j * ng + it.row(), j * ng + it.col(), it.value());
      }
    }
    for (int p = 0; p < ng; ++p) trip.emplace_back(j * ng + p, j * ng + p, potential(j, embed(grid.point(p))));
  }

  std::vector<RealSpMat> diffs;
  for (int k = 0; k < grid.dim(); ++k) diffs.push_back(central_difference(grid, k));
  for (const auto& c : couplings) {
    RealSpMat block(ng, ng);
    if (c.r_hat) {
      block += diagonal(grid, [&](const Point& y) { return c.r_hat->value(embed(y)); });
    }
    if (c.r_tilde) {
      for (int k = 0; k < grid.dim(); ++k) {
        const RealSpMat coef = diagonal(grid, [&](const Point& y) {
          const Point r = to_local * c.r_tilde->value(embed(y));
          return r(k);
        });
        block += 0.5 * (coef * diffs[k] + diffs[k] * coef);
      }
    }
    SpMat cb = to_complex(block);
    if (c.j == c.k) cb = hermitize(cb);
    const SpMat adj = cb.adjoint();
    for (int col = 0; col < cb.outerSize(); ++col) {
      for (SpMat::InnerIterator it(cb, col); it; ++it) {
        trip.emplace_back(c.j * ng + it.row(), c.k * ng + it.col(), it.value());
      }
    }
    if (c.j != c.k) {
      for (int col = 0; col < adj.outerSize(); ++col) {
        for (SpMat::InnerIterator it(adj, col); it; ++it) {
          trip.emplace_back(c.k * ng + it.row(), c.j * ng + it.col(), it.value());
        }
      }
    }
  }
  SpMat P(static_cast<Eigen::Index>(m) * ng, static_cast<Eigen::Index>(m) * ng);
  P.setFromTriplets(trip.begin(), trip.end());
  P.prune(cplx(0.0, 0.0));
  return P;
}

}  // namespace

DiscreteOperator::DiscreteOperator(SpMat matrix, int channels, std::string label)
    : matrix_(std::move(matrix)), channels_(channels), label_(std::move(label)) {
  matrix_.makeCompressed();
  if (matrix_.rows() != matrix_.cols()) throw Error(ErrorCode::ShapeMismatch, "operator must be square");
  if (channels < 1 || matrix_.rows() % channels != 0) {
    throw Error(ErrorCode::ShapeMismatch, "operator size not divisible by channel count");
  }
}

double DiscreteOperator::hermitian_defect() const {
  SpMat adj = matrix_.adjoint();
  return max_abs(SpMat(matrix_ - adj));
}

bool DiscreteOperator::is_real() const {
  for (int c = 0; c < matrix_.outerSize(); ++c) {
    for (SpMat::InnerIterator it(matrix_, c); it; ++it) {
      if (it.value().imag() != 0.0) return false;
    }
  }
  return true;
}

RealSpMat DiscreteOperator::real_part() const { return matrix_.real(); }

void DiscreteOperator::export_coo(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out.precision(17);
  for (int c = 0; c < matrix_.outerSize(); ++c) {
    for (SpMat::InnerIterator it(matrix_, c); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

RealSpMat central_difference(const Grid& grid, int k) {
  const int ng = grid.size();
  const int n = grid.axis_size();
  const int stride = grid.stride(k);
  const double c = 0.5 / grid.spacing();
  std::vector<RealTriplet> trip;
  trip.reserve(2 * static_cast<std::size_t>(ng));
  for (int p = 0; p < ng; ++p) {
    const int i = (p / stride) % n;
    if (i + 1 < n) trip.emplace_back(p, p + stride, c);
    if (i > 0) trip.emplace_back(p, p - stride, -c);
  }
  RealSpMat d(ng, ng);
  d.setFromTriplets(trip.begin(), trip.end());
  return d;
}

// Edges along axis k are indexed by the flat index of the unknown on their
// upper side, with an extra row of edges touching the upper boundary.
RealSpMat forward_difference(const Grid& grid, int k) {
  const int ng = grid.size();
  const int n = grid.axis_size();
  const int stride = grid.stride(k);
  const int edges = ng / n * (n + 1);
  const double c = 1.0 / grid.spacing();
  std::vector<RealTriplet> trip;
  int row = 0;
  for (int p = 0; p < ng; ++p) {
    const int i = (p / stride) % n;
    // edge below p: (u_p - u_{p-stride}) / h
    trip.emplace_back(row, p, c);
    if (i > 0) trip.emplace_back(row, p - stride, -c);
    ++row;
    if (i == n - 1) {
      trip.emplace_back(row, p, -c);
      ++row;
    }
  }
  RealSpMat g(edges, ng);
  g.setFromTriplets(trip.begin(), trip.end());
  return g;
}

std::vector<Eigen::VectorXd> edge_midpoints(const Grid& grid, int k) {
  const int n = grid.axis_size();
  const int stride = grid.stride(k);
  const double h = grid.spacing();
  std::vector<Eigen::VectorXd> mids;
  for (int p = 0; p < grid.size(); ++p) {
    const int i = (p / stride) % n;
    Eigen::VectorXd x = grid.point(p);
    x(k) -= 0.5 * h;
    mids.push_back(x);
    if (i == n - 1) {
      x(k) += h;
      mids.push_back(x);
    }
  }
  return mids;
}

RealSpMat diagonal(const Grid& grid, const std::function<double(const Point&)>& f) {
  const int ng = grid.size();
  std::vector<RealTriplet> trip;
  trip.reserve(ng);
  for (int p = 0; p < ng; ++p) {
    const double v = f(grid.point(p));
    if (v != 0.0) trip.emplace_back(p, p, v);
  }
  RealSpMat d(ng, ng);
  d.setFromTriplets(trip.begin(), trip.end());
  return d;
}

SpMat channel_kron(const SpMat& op, int m) {
  const Eigen::Index n = op.rows();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(m) * op.nonZeros());
  for (int j = 0; j < m; ++j) {
    for (int c = 0; c < op.outerSize(); ++c) {
      for (SpMat::InnerIterator it(op, c); it; ++it) trip.emplace_back(j * n + it.row(), j * n + it.col(), it.value());
    }
  }
  SpMat out(m * n, m * n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

DiscreteOperator build_laplacian(const Grid& grid) {
  RealSpMat lap(grid.size(), grid.size());
  for (int k = 0; k < grid.dim(); ++k) {
    const RealSpMat g = forward_difference(grid, k);
    lap += RealSpMat(g.transpose() * g);
  }
  return DiscreteOperator(to_complex(lap), 1, "-Delta_h");
}

DiscreteOperator build_P(const ProblemSpec& spec, const Grid& grid) {
  spec.validate();
  if (grid.dim() != spec.ambient_dim) throw Error(ErrorCode::ShapeMismatch, "grid dimension differs from spec");
  const auto potential = [&spec](int j, const Point& x) { return spec.potentials[j].value(x); };
  const auto embed = [](const Point& x) { return x; };
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(grid.dim(), grid.dim());
  return DiscreteOperator(assemble(grid, spec.channels, potential, spec.couplings, embed, id), spec.channels, "P");
}

DiscreteOperator build_A(const Grid& grid) {
  RealSpMat s(grid.size(), grid.size());
  for (int k = 0; k < grid.dim(); ++k) {
    const RealSpMat d = central_difference(grid, k);
    const RealSpMat x = diagonal(grid, [k](const Point& p) { return p(k); });
    s += 0.5 * RealSpMat(x * d + d * x);
  }
  return DiscreteOperator(SpMat(cplx(0.0, -1.0) * to_complex(s)), 1, "A");
}

DiscreteOperator build_AV(const Grid& grid, const Weight& weight) {
  std::vector<Eigen::VectorXd> grads(grid.size());
  for (int p = 0; p < grid.size(); ++p) grads[p] = weight.gradient(grid.point(p));
  RealSpMat s(grid.size(), grid.size());
  for (int k = 0; k < grid.dim(); ++k) {
    const RealSpMat d = central_difference(grid, k);
    std::vector<RealTriplet> trip;
    for (int p = 0; p < grid.size(); ++p) trip.emplace_back(p, p, grads[p](k));
    RealSpMat g(grid.size(), grid.size());
    g.setFromTriplets(trip.begin(), trip.end());
    s += RealSpMat(g * d + d * g);
  }
  return DiscreteOperator(SpMat(cplx(0.0, -1.0) * to_complex(s)), 1, "A_V");
}

DiscreteOperator commutator(const DiscreteOperator& o1, const DiscreteOperator& o2) {
  if (o1.size() != o2.size()) throw Error(ErrorCode::ShapeMismatch, "commutator of operators of different size");
  const SpMat& a = o1.matrix();
  const SpMat& b = o2.matrix();
  SpMat c = cplx(0.0, 1.0) * SpMat(a * b - b * a);
  const SpMat adj = c.adjoint();
  const double defect = max_abs(SpMat(c - adj));
  DiscreteOperator out(hermitize(c), std::max(o1.channels(), o2.channels()), "i[" + o1.label() + "," + o2.label() + "]");
  out.set_recorded_defect(defect);
  return out;
}

DiscreteOperator kinetic_commutator(const Grid& grid, const Weight& weight) {
  const int ng = grid.size();
  RealSpMat k(ng, ng);
  for (int q = 0; q < grid.dim(); ++q) {
    const RealSpMat g = forward_difference(grid, q);
    const auto mids = edge_midpoints(grid, q);
    std::vector<RealTriplet> trip;
    for (std::size_t e = 0; e < mids.size(); ++e) {
      trip.emplace_back(static_cast<int>(e), static_cast<int>(e), 4.0 * weight.hessian(mids[e])(q, q));
    }
    RealSpMat w(g.rows(), g.rows());
    w.setFromTriplets(trip.begin(), trip.end());
    k += RealSpMat(g.transpose() * w * g);
  }
  if (grid.dim() == 2) {
    const RealSpMat d0 = central_difference(grid, 0);
    const RealSpMat d1 = central_difference(grid, 1);
    const RealSpMat a01 = diagonal(grid, [&weight](const Point& x) { return weight.hessian(x)(0, 1); });
    k += -4.0 * RealSpMat(d0 * a01 * d1 + d1 * a01 * d0);
  }
  k -= diagonal(grid, [&weight](const Point& x) { return weight.bilaplacian(x); });
  return DiscreteOperator(to_complex(k), 1, "i[-Delta,A_V]");
}

DiscreteOperator mourre_form(const DiscreteOperator& P, const Grid& grid, const Weight& weight) {
  const int m = P.channels();
  if (P.size() != m * grid.size()) throw Error(ErrorCode::ShapeMismatch, "P does not live on this grid");
  const SpMat lap = channel_kron(build_laplacian(grid).matrix(), m);
  const DiscreteOperator remainder(SpMat(P.matrix() - lap), m, "P-(-Delta)");
  const DiscreteOperator av(channel_kron(build_AV(grid, weight).matrix(), m), m, "A_V");
  const DiscreteOperator rest = commutator(remainder, av);
  DiscreteOperator out(SpMat(channel_kron(kinetic_commutator(grid, weight).matrix(), m) + rest.matrix()), m,
                       "i[P,A_V]");
  out.set_recorded_defect(rest.recorded_defect());
  return out;
}

DiscreteOperator build_subsystem(const ProblemSpec& spec, const Grid& grid, int element) {
  if (spec.mode != Mode::ManyBody || !spec.lattice) throw Error(ErrorCode::NotManyBody, "spec is not many-body");
  const auto& lattice = *spec.lattice;
  if (element < 0 || element >= lattice.size()) throw Error(ErrorCode::SpecInvalid, "element out of range");
  const Eigen::MatrixXd basis = lattice.element(element).complement().basis();
  if (basis.cols() != grid.dim()) {
    throw Error(ErrorCode::ShapeMismatch, "grid dimension " + std::to_string(grid.dim()) + " differs from dim X^a = " +
                                              std::to_string(basis.cols()));
  }
  const auto below = [&lattice, element](int b) { return lattice.leq(b, element); };
  const auto potential = [&spec, below](int j, const Point& x) {
    return spec.potentials[j].value_restricted(x, below);
  };
  std::vector<CouplingTerm> couplings;
  for (const auto& c : spec.couplings) {
    if (c.element && below(*c.element)) couplings.push_back(c);
  }
  const auto embed = [basis](const Point& y) -> Point { return basis * y; };
  return DiscreteOperator(assemble(grid, spec.channels, potential, couplings, embed, basis.transpose()),
                          spec.channels, "P^a");
}

}  // namespace mstate

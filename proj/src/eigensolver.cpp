#include "mstate/eigensolver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <random>

#include "mstate/errors.hpp"

namespace mstate {

namespace {

template <typename S>
using Sparse = Eigen::SparseMatrix<S>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
Sparse<S> shifted(const Sparse<S>& P, double sigma) {
  Sparse<S> id(P.rows(), P.cols());
  id.setIdentity();
  return P - S(sigma) * id;
}

template <typename S>
struct ShiftInvert {
  Eigen::SimplicialLDLT<Sparse<S>, Eigen::Lower> ldlt;
  long negative = 0;

  ShiftInvert(const Sparse<S>& P, double sigma) {
    // An exactly singular shift (sigma on an eigenvalue) is nudged aside.
    for (int attempt = 0;; ++attempt) {
      ldlt.compute(shifted(P, sigma));
      if (ldlt.info() == Eigen::Success) break;
      if (attempt == 4) throw Error(ErrorCode::EigensolverFailure, "LDLT factorization failed");
      sigma += 1.618e-8 * std::max(1.0, std::abs(sigma)) * (attempt + 1);
    }
    const auto d = ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (std::real(d(i)) < 0.0) ++negative;
    }
  }
};

template <typename S>
long inertia(const Sparse<S>& P, double sigma) {
  return ShiftInvert<S>(P, sigma).negative;
}

template <typename S>
Vec<S> random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec<S> v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if constexpr (std::is_same_v<S, double>) {
      v(i) = normal(rng);
    } else {
      v(i) = S(normal(rng), normal(rng));
    }
  }
  return v;
}

template <typename S>
void orthogonalize(Vec<S>& w, const Mat<S>& basis, Eigen::Index cols) {
  if (cols == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Vec<S> c = basis.leftCols(cols).adjoint() * w;
    w -= basis.leftCols(cols) * c;
  }
}

// Shift-invert Lanczos with full reorthogonalization and restarts that deflate
// the already locked vectors, so degenerate eigenvalues are picked up one
// copy per restart.
template <typename S>
void slice_eigenpairs(const Sparse<S>& P, double lo, double hi, long expected, const EigenOptions& options,
                      std::mt19937_64& rng, std::vector<double>& values, std::vector<Vec<S>>& vectors) {
  const Eigen::Index n = P.rows();
  double sigma = 0.5 * (lo + hi);
  sigma += 1.234567e-7 * std::max(1.0, std::abs(sigma));
  const ShiftInvert<S> op(P, sigma);

  Mat<S> locked(n, expected);
  Eigen::Index nlocked = 0;
  std::vector<double> found;
  const int max_restarts = static_cast<int>(expected) + 8;
  const Eigen::Index max_krylov = std::min<Eigen::Index>(n, std::max<Eigen::Index>(4 * expected + 100, 150));

  for (int restart = 0; restart < max_restarts && nlocked < expected; ++restart) {
    Mat<S> Q(n, max_krylov + 1);
    std::vector<double> alpha, beta;
    Vec<S> q = random_vector<S>(rng, n);
    orthogonalize<S>(q, locked, nlocked);
    q.normalize();
    Q.col(0) = q;
    Eigen::Index m = 0;
    std::vector<std::pair<double, Vec<S>>> candidates;
    bool invariant = false;
    while (m < max_krylov) {
      Vec<S> w = op.ldlt.solve(Q.col(m));
      orthogonalize<S>(w, locked, nlocked);
      const double a = std::real(Q.col(m).dot(w));
      alpha.push_back(a);
      orthogonalize<S>(w, Q, m + 1);
      const double b = w.norm();
      beta.push_back(b);
      ++m;
      invariant = b < 1e-12 * std::max(1.0, std::abs(a));
      if (!invariant) Q.col(m) = w / b;

      if (m % 10 != 0 && !invariant && m != max_krylov) continue;
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (Eigen::Index i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      candidates.clear();
      int converged_in_window = 0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double theta = es.eigenvalues()(i);
        if (theta == 0.0) continue;
        const double lambda = sigma + 1.0 / theta;
        if (lambda <= lo || lambda >= hi) continue;
        const double resid = std::abs(beta[m - 1] * es.eigenvectors()(m - 1, i));
        if (resid <= 1e-10 * std::abs(theta) || invariant) {
          ++converged_in_window;
          const Vec<S> v = Q.leftCols(m) * es.eigenvectors().col(i).template cast<S>();
          candidates.emplace_back(lambda, v);
        }
      }
      if (nlocked + converged_in_window >= expected || invariant) break;
    }
    for (auto& [lambda, v] : candidates) {
      Vec<S> u = v;
      orthogonalize<S>(u, locked, nlocked);
      const double keep = u.norm();
      if (keep < 0.5) continue;
      u /= keep;
      // Rayleigh quotient refinement and residual check on P itself.
      const Vec<S> pu = P * u;
      const double rq = std::real(u.dot(pu));
      const double res = (pu - S(rq) * u).norm();
      if (res > options.residual_tol * std::max(1.0, std::abs(rq))) continue;
      if (rq <= lo || rq >= hi) continue;
      if (nlocked == expected) break;
      locked.col(nlocked++) = u;
      found.push_back(rq);
    }
  }
  if (nlocked != expected) {
    throw Error(ErrorCode::EigensolverFailure, "found " + std::to_string(nlocked) + " of " + std::to_string(expected) +
                                                   " eigenvalues in (" + std::to_string(lo) + ", " +
                                                   std::to_string(hi) + ")");
  }
  // Rotate the locked block to the Ritz basis of P so that clustered
  // eigenvalues get properly separated eigenvectors.
  const Mat<S> B = locked.leftCols(nlocked);
  const Mat<S> H = B.adjoint() * (P * B);
  Eigen::SelfAdjointEigenSolver<Mat<S>> es(0.5 * (H + H.adjoint()));
  const Mat<S> R = B * es.eigenvectors();
  for (Eigen::Index i = 0; i < nlocked; ++i) {
    values.push_back(es.eigenvalues()(i));
    vectors.push_back(R.col(i));
  }
}

template <typename S>
void collect(const Sparse<S>& P, double lo, double hi, long count_lo, long count_hi, const EigenOptions& options,
             std::mt19937_64& rng, std::vector<double>& values, std::vector<Vec<S>>& vectors) {
  const long count = count_hi - count_lo;
  if (count <= 0) return;
  if (count > options.max_slice && hi - lo > 1e-9 * std::max(1.0, std::abs(lo))) {
    const double mid = 0.5 * (lo + hi);
    const long count_mid = inertia(P, mid);
    collect(P, lo, mid, count_lo, count_mid, options, rng, values, vectors);
    collect(P, mid, hi, count_mid, count_hi, options, rng, values, vectors);
    return;
  }
  slice_eigenpairs(P, lo, hi, count, options, rng, values, vectors);
}

template <typename S>
EigenPairs iterative(const Sparse<S>& P, double lo, double hi, const EigenOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::vector<double> values;
  std::vector<Vec<S>> vectors;
  collect(P, lo, hi, inertia(P, lo), inertia(P, hi), options, rng, values, vectors);
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  EigenPairs out;
  out.method = "shift-invert-lanczos";
  out.values.resize(values.size());
  out.vectors.resize(P.rows(), values.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.values(i) = values[order[i]];
    out.vectors.col(i) = vectors[order[i]].template cast<cplx>();
  }
  return out;
}

EigenPairs select(const EigenPairs& all, double lo, double hi) {
  std::vector<int> idx;
  for (int i = 0; i < all.size(); ++i) {
    if (all.values(i) > lo && all.values(i) < hi) idx.push_back(i);
  }
  EigenPairs out;
  out.method = all.method;
  out.values.resize(idx.size());
  out.vectors.resize(all.vectors.rows(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.values(i) = all.values(idx[i]);
    out.vectors.col(i) = all.vectors.col(idx[i]);
  }
  return out;
}

}  // namespace

long count_below(const DiscreteOperator& P, double sigma) {
  if (P.is_real()) return inertia<double>(P.real_part(), sigma);
  return inertia<cplx>(P.matrix(), sigma);
}

EigenPairs dense_eigenpairs(const DiscreteOperator& P) {
  EigenPairs out;
  out.method = "dense";
  if (P.is_real()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(P.real_part()));
    if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolverFailure, "dense eigensolver failed");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(P.dense());
    if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolverFailure, "dense eigensolver failed");
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
  }
  return out;
}

EigenPairs eigenpairs_in(const DiscreteOperator& P, double lo, double hi, const EigenOptions& options) {
  if (!(hi > lo)) throw Error(ErrorCode::EigensolverFailure, "empty interval");
  if (P.size() <= options.dense_cap) return select(dense_eigenpairs(P), lo, hi);
  if (P.is_real()) return iterative<double>(P.real_part(), lo, hi, options);
  return iterative<cplx>(P.matrix(), lo, hi, options);
}

EigenPairs lowest_eigenpairs(const DiscreteOperator& P, int k, const EigenOptions& options) {
  if (k < 1 || k > P.size()) throw Error(ErrorCode::EigensolverFailure, "invalid eigenpair count");
  const auto [glo, ghi] = gershgorin_bounds(P);
  if (P.size() <= options.dense_cap) {
    const EigenPairs all = dense_eigenpairs(P);
    return select(all, glo - 1.0, all.values(k - 1) + 1e-12 * std::max(1.0, std::abs(all.values(k - 1))));
  }
  const double lo = glo - 1.0;
  // bisection on the inertia count for an upper cut with k..k+10 below it
  double a = glo - 1.0, b = ghi + 1.0;
  for (int it = 0; it < 200; ++it) {
    const long cb = count_below(P, b);
    if (cb <= k + 10 || b - a < 1e-10 * std::max(1.0, std::abs(b))) break;
    const double mid = 0.5 * (a + b);
    if (count_below(P, mid) >= k) {
      b = mid;
    } else {
      a = mid;
    }
  }
  EigenPairs pairs = eigenpairs_in(P, lo, b, options);
  EigenPairs out;
  out.method = pairs.method;
  out.values = pairs.values.head(std::min(k, pairs.size()));
  out.vectors = pairs.vectors.leftCols(out.values.size());
  return out;
}

std::pair<double, double> gershgorin_bounds(const DiscreteOperator& P) {
  const SpMat& m = P.matrix();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m.rows());
  Eigen::VectorXd radius = Eigen::VectorXd::Zero(m.rows());
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SpMat::InnerIterator it(m, c); it; ++it) {
      if (it.row() == it.col()) {
        diag(it.row()) = it.value().real();
      } else {
        radius(it.row()) += std::abs(it.value());
      }
    }
  }
  return {(diag - radius).minCoeff(), (diag + radius).maxCoeff()};
}

}  // namespace mstate

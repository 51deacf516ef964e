#include "mstate/graf.hpp"

#include <random>
#include <sstream>

#include "mstate/errors.hpp"
#include "mstate/smooth.hpp"

namespace mstate {

namespace {

std::string describe(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os.precision(10);
  os << "(";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

Eigen::VectorXd random_point(std::mt19937_64& rng, int n, double r_lo, double r_hi) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::VectorXd dir(n);
  for (int i = 0; i < n; ++i) dir(i) = normal(rng);
  dir.normalize();
  // uniform in the annulus volume
  const double u = uni(rng);
  const double r = std::pow(std::pow(r_lo, n) + u * (std::pow(r_hi, n) - std::pow(r_lo, n)), 1.0 / n);
  return r * dir;
}

}  // namespace

GrafField::GrafField(const SubspaceLattice& lattice, double smoothing, std::vector<double> offsets)
    : lattice_(lattice), smoothing_(smoothing), offsets_(std::move(offsets)) {
  if (!(smoothing > 0.0)) throw Error(ErrorCode::SpecInvalid, "Graf smoothing must be positive");
  if (offsets_.empty()) {
    for (int a = 0; a < lattice.size(); ++a) {
      offsets_.push_back(0.5 * (lattice.ambient_dim() - lattice.element(a).dim()));
    }
  }
  if (static_cast<int>(offsets_.size()) != lattice.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one Graf offset per lattice element required");
  }
  for (int a = 0; a < lattice.size(); ++a) proj_.push_back(lattice.element(a).projector());
}

GrafJet GrafField::jet(const Eigen::VectorXd& x) const {
  const MollifiedAbs m(smoothing_);
  GrafJet acc;
  for (int a = 0; a < lattice_.size(); ++a) {
    GrafJet q;
    q.gradient = proj_[a] * x;
    q.value = 0.5 * x.dot(q.gradient) + offsets_[a];
    q.hessian = proj_[a];
    if (a == 0) {
      acc = q;
      continue;
    }
    const Jet1 mz = m(0.5 * (acc.value - q.value));
    const Eigen::VectorXd dg = acc.gradient - q.gradient;
    GrafJet out;
    out.value = 0.5 * (acc.value + q.value) + mz.value;
    out.gradient = 0.5 * (acc.gradient + q.gradient) + 0.5 * mz.d1 * dg;
    out.hessian = 0.5 * (acc.hessian + q.hessian) + 0.5 * mz.d1 * (acc.hessian - q.hessian) +
                  0.25 * mz.d2 * dg * dg.transpose();
    acc = std::move(out);
  }
  return acc;
}

nlohmann::json GrafReport::to_json() const {
  return {{"samples", samples},
          {"C1", C1},
          {"C2", C2},
          {"min_hessian_eigenvalue", min_hessian_eigenvalue},
          {"derivative_sup_inner", derivative_sup_inner},
          {"derivative_sup_outer", derivative_sup_outer},
          {"derivatives_bounded", derivatives_bounded},
          {"delta", delta},
          {"delta_per_element", delta_per_element}};
}

GrafField build_graf_G(const SubspaceLattice& lattice, double smoothing, std::vector<double> offsets) {
  return GrafField(lattice, smoothing, std::move(offsets));
}

GrafReport check_graf(const GrafField& g, const GrafCheckOptions& options) {
  const auto& lattice = g.lattice();
  const int n = lattice.ambient_dim();
  std::mt19937_64 rng(options.seed);
  GrafReport rep;
  rep.samples = options.samples;
  rep.C1 = std::numeric_limits<double>::infinity();
  rep.C2 = -std::numeric_limits<double>::infinity();
  rep.min_hessian_eigenvalue = std::numeric_limits<double>::infinity();

  const auto derivative_dev = [&](const Eigen::VectorXd& x, const GrafJet& j) {
    const double d1 = (2.0 * j.gradient - 2.0 * x).cwiseAbs().maxCoeff();
    const double d2 = (2.0 * j.hessian - 2.0 * Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    return std::max(d1, d2);
  };

  for (int s = 0; s < options.samples; ++s) {
    const Eigen::VectorXd x = random_point(rng, n, 0.0, options.radius);
    const GrafJet j = g.jet(x);
    const double two_g = 2.0 * j.value;
    const double x2 = x.squaredNorm();
    // exact inequality 2G >= x^2 up to rounding
    if (two_g < x2 - 1e-9 * std::max(1.0, x2)) {
      throw Error(ErrorCode::PropertyViolated, "2G < x^2 at " + describe(x));
    }
    rep.C1 = std::min(rep.C1, two_g);
    rep.C2 = std::max(rep.C2, two_g - x2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j.hessian, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    rep.min_hessian_eigenvalue = std::min(rep.min_hessian_eigenvalue, lo);
    if (lo < -options.psd_tol) throw Error(ErrorCode::PropertyViolated, "Hessian of G not PSD at " + describe(x));
    rep.derivative_sup_inner = std::max(rep.derivative_sup_inner, derivative_dev(x, j));
  }
  if (!(rep.C1 > 0.0) || !std::isfinite(rep.C2)) {
    throw Error(ErrorCode::PropertyViolated, "Graf bounds constants are not finite and positive");
  }
  for (int s = 0; s < options.samples / 10; ++s) {
    const Eigen::VectorXd x = random_point(rng, n, 4.0 * options.radius, 8.0 * options.radius);
    const GrafJet j = g.jet(x);
    if (2.0 * j.value - x.squaredNorm() > rep.C2 + 1e-9 * x.squaredNorm()) {
      throw Error(ErrorCode::PropertyViolated, "2G - x^2 exceeds C2 far out at " + describe(x));
    }
    rep.derivative_sup_outer = std::max(rep.derivative_sup_outer, derivative_dev(x, j));
  }
  rep.derivatives_bounded = rep.derivative_sup_outer <= 1.5 * rep.derivative_sup_inner + 1.0;

  // Flatness: along X^a, G is locally constant near X_a.
  rep.delta = std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int a = 0; a < lattice.size(); ++a) {
    const Subspace& xa = lattice.element(a);
    const Eigen::MatrixXd inner = xa.basis();
    const Eigen::MatrixXd outer = xa.complement().basis();
    if (outer.cols() == 0) {
      rep.delta_per_element.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const Eigen::MatrixXd pi_upper = outer * outer.transpose();
    double delta_a = 0.0;
    const int steps = 200;
    const double t_max = 4.0;
    for (int k = 1; k <= steps; ++k) {
      const double t = t_max * k / steps;
      bool ok = true;
      for (int s = 0; s < 64 && ok; ++s) {
        Eigen::VectorXd dir(outer.cols());
        for (int i = 0; i < dir.size(); ++i) dir(i) = uni(rng);
        if (dir.norm() < 1e-3) dir(0) = 1.0;
        dir.normalize();
        Eigen::VectorXd x = t * (outer * dir);
        if (inner.cols() > 0) {
          Eigen::VectorXd y(inner.cols());
          for (int i = 0; i < y.size(); ++i) y(i) = options.radius * uni(rng);
          x += inner * y;
        }
        ok = (pi_upper * g.gradient(x)).norm() <= options.flat_tol;
      }
      if (!ok) break;
      delta_a = t;
    }
    rep.delta_per_element.push_back(delta_a);
    rep.delta = std::min(rep.delta, delta_a);
  }
  if (!(rep.delta > 0.0)) throw Error(ErrorCode::PropertyViolated, "no flatness radius delta > 0 found");
  return rep;
}

}  // namespace mstate

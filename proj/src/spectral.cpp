#include "mstate/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "mstate/errors.hpp"

namespace mstate {

using nlohmann::json;

SpectralWindow::SpectralWindow(double c, double hw) : center(c), half_width(hw) {
  if (!(hw > 0.0)) throw Error(ErrorCode::SpecInvalid, "window half width must be positive");
}

double localization(const Grid& grid, const CVec& u, double fraction) {
  const int ng = grid.size();
  const int m = static_cast<int>(u.size() / ng);
  const double r2 = std::pow(fraction * grid.half_width(), 2);
  double inside = 0.0, total = 0.0;
  for (int p = 0; p < ng; ++p) {
    double mass = 0.0;
    for (int j = 0; j < m; ++j) mass += std::norm(u(static_cast<Eigen::Index>(j) * ng + p));
    total += mass;
    if (grid.point(p).squaredNorm() <= r2) inside += mass;
  }
  return total > 0.0 ? inside / total : 0.0;
}

WindowProjection window_projection(const DiscreteOperator& P, const SpectralWindow& window,
                                   const EigenOptions& options) {
  return WindowProjection{eigenpairs_in(P, window.lo(), window.hi(), options)};
}

CVec SpectralFilter::apply(const CVec& u) const {
  if (method_ == FilterMethod::Spectral) {
    if (pairs_.size() == 0) return CVec::Zero(u.size());
    const CVec c = pairs_.vectors.adjoint() * u;
    return pairs_.vectors * (weights_.cast<cplx>().asDiagonal() * c);
  }
  // three-term recurrence on X = (P - center) / scale
  const auto X = [this](const CVec& v) -> CVec { return (P_->apply(v) - center_ * v) / scale_; };
  CVec t_prev = u;
  CVec out = coefficients_[0] * u;
  if (coefficients_.size() == 1) return out;
  CVec t_cur = X(u);
  out += coefficients_[1] * t_cur;
  for (std::size_t k = 2; k < coefficients_.size(); ++k) {
    CVec t_next = 2.0 * X(t_cur) - t_prev;
    out += coefficients_[k] * t_next;
    t_prev = std::move(t_cur);
    t_cur = std::move(t_next);
  }
  return out;
}

namespace {

std::vector<double> chebyshev_coefficients(const SmoothBump& f, double center, double scale, int degree) {
  const int nodes = 2 * degree;
  std::vector<double> c(degree + 1, 0.0);
  for (int j = 0; j < nodes; ++j) {
    const double theta = std::numbers::pi * (j + 0.5) / nodes;
    const double fx = f(center + scale * std::cos(theta));
    if (fx == 0.0) continue;
    for (int k = 0; k <= degree; ++k) c[k] += fx * std::cos(k * theta);
  }
  for (auto& v : c) v *= 2.0 / nodes;
  c[0] *= 0.5;
  return c;
}

}  // namespace

SpectralFilter smooth_filter(const DiscreteOperator& P, const SmoothBump& f, FilterMethod method,
                             const EigenOptions& options) {
  SpectralFilter filter;
  filter.method_ = method;
  filter.P_ = &P;
  if (method == FilterMethod::Spectral) {
    filter.pairs_ = eigenpairs_in(P, f.lower(), f.upper(), options);
    filter.weights_.resize(filter.pairs_.size());
    for (int i = 0; i < filter.pairs_.size(); ++i) filter.weights_(i) = f(filter.pairs_.values(i));
    return filter;
  }
  const auto [lo, hi] = gershgorin_bounds(P);
  filter.center_ = 0.5 * (lo + hi);
  filter.scale_ = 0.5 * (hi - lo) * (1.0 + 1e-12) + 1e-300;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CVec probe(P.size());
  for (auto& v : probe) v = cplx(normal(rng), normal(rng));
  probe.normalize();
  filter.coefficients_ = chebyshev_coefficients(f, filter.center_, filter.scale_, 128);
  CVec previous = filter.apply(probe);
  for (int degree = 256; degree <= (1 << 20); degree *= 2) {
    filter.coefficients_ = chebyshev_coefficients(f, filter.center_, filter.scale_, degree);
    CVec current = filter.apply(probe);
    if ((current - previous).norm() <= 1e-8) return filter;
    previous = std::move(current);
  }
  throw Error(ErrorCode::EigensolverFailure, "Chebyshev filter did not converge");
}

json MourreReport::to_json() const {
  json r = json::array();
  for (const auto& g : rungs) {
    r.push_back({{"half_width", g.half_width},
                 {"points_per_axis", g.points_per_axis},
                 {"rank", g.rank},
                 {"empty_window", g.rank == 0},
                 {"rayleigh_min", g.rayleigh_min},
                 {"negative_modes", g.negative_modes},
                 {"negative_values", g.negative_values},
                 {"localization", g.localization},
                 {"gamma_nonlocal", g.gamma_nonlocal ? json(*g.gamma_nonlocal) : json(nullptr)},
                 {"commutator_defect", g.commutator_defect}});
  }
  return {{"window", {{"center", window.center}, {"half_width", window.half_width}}},
          {"gamma_target", gamma_target},
          {"tol", tol},
          {"rayleigh_min", rungs.empty() ? 0.0 : rayleigh_min()},
          {"negative_modes", rungs.empty() ? 0 : negative_modes()},
          {"rungs", r},
          {"pure_bound", pure_bound},
          {"stable", stable},
          {"localized", localized},
          {"mourre_compatible", mourre_compatible},
          {"verdict", verdict}};
}

MourreRung mourre_rung(const DiscreteOperator& P, const DiscreteOperator& form, const Grid& grid,
                       const SpectralWindow& window, double gamma_target, const MourreOptions& options) {
  if (P.size() != form.size()) throw Error(ErrorCode::ShapeMismatch, "P and commutator form differ in size");
  MourreRung rung;
  rung.half_width = grid.half_width();
  rung.points_per_axis = grid.points_per_axis();
  rung.commutator_defect = form.recorded_defect();
  const EigenPairs pairs = eigenpairs_in(P, window.lo(), window.hi(), options.eigen);
  rung.rank = pairs.size();
  if (rung.rank == 0) return rung;
  Eigen::MatrixXcd cv(P.size(), rung.rank);
  for (int i = 0; i < rung.rank; ++i) cv.col(i) = form.apply(CVec(pairs.vectors.col(i)));
  Eigen::MatrixXcd H = pairs.vectors.adjoint() * cv;
  H = 0.5 * (H + H.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  rung.rayleigh_min = es.eigenvalues()(0);
  for (int i = 0; i < rung.rank; ++i) {
    const double theta = es.eigenvalues()(i);
    const CVec u = pairs.vectors * es.eigenvectors().col(i);
    const double loc = localization(grid, u, options.localization_radius);
    if (theta < gamma_target - options.tol) {
      ++rung.negative_modes;
      rung.negative_values.push_back(theta);
      rung.localization.push_back(loc);
    }
    if (loc < options.nonlocalized_threshold && !rung.gamma_nonlocal) rung.gamma_nonlocal = theta;
  }
  return rung;
}

MourreReport mourre_report(const MourreBuilder& builder, const std::vector<Grid>& ladder,
                           const SpectralWindow& window, double gamma_target, const MourreOptions& options) {
  if (ladder.empty()) throw Error(ErrorCode::SpecInvalid, "Mourre ladder needs at least one grid");
  MourreReport report;
  report.window = window;
  report.gamma_target = gamma_target;
  report.tol = options.tol;
  for (const auto& grid : ladder) {
    const auto [P, form] = builder(grid);
    report.rungs.push_back(mourre_rung(P, form, grid, window, gamma_target, options));
  }
  report.pure_bound = std::all_of(report.rungs.begin(), report.rungs.end(),
                                  [](const MourreRung& r) { return r.negative_modes == 0; });
  const std::size_t n = report.rungs.size();
  report.stable = n < 2 || report.rungs[n - 1].negative_modes == report.rungs[n - 2].negative_modes;
  report.localized = true;
  for (const auto& r : report.rungs) {
    for (double loc : r.localization) report.localized = report.localized && loc >= options.localized_threshold;
  }
  report.mourre_compatible = report.stable && report.localized;
  if (report.pure_bound) {
    report.verdict = "pure Mourre bound";
  } else if (report.mourre_compatible) {
    report.verdict = "Mourre-compatible";
  } else if (!report.stable) {
    report.verdict = "not certified: negative-mode count changes with the box";
  } else {
    report.verdict = "not certified: delocalized negative mode";
  }
  return report;
}

std::vector<double> ThresholdSet::energies() const {
  std::vector<double> e;
  for (const auto& t : values) e.push_back(t.value);
  return e;
}

json ThresholdSet::to_json() const {
  json v = json::array();
  for (const auto& t : values) v.push_back({{"value", t.value}, {"provenance", t.provenance}});
  return {{"values", v}, {"sigma", sigma}};
}

namespace {

ThresholdSet thresholds_rec(const ProblemSpec& spec, int a, int depth, const ThresholdOptions& options,
                            std::map<int, ThresholdSet>& cache) {
  const auto& lattice = *spec.lattice;
  if (depth > lattice.size()) throw Error(ErrorCode::RecursionDepth, "threshold recursion too deep");
  if (auto it = cache.find(a); it != cache.end()) return it->second;
  ThresholdSet set;
  for (int j = 0; j < spec.channels; ++j) {
    set.values.push_back({spec.potentials[j].constant, "c_" + std::to_string(j + 1)});
  }
  for (int b = 0; b < lattice.size(); ++b) {
    if (b == a || b == lattice.a_min() || !lattice.leq(b, a)) continue;
    const double sigma_b = thresholds_rec(spec, b, depth + 1, options, cache).sigma;
    const int dim = lattice.ambient_dim() - lattice.element(b).dim();
    const Grid grid = dim == 1 ? Grid(1, options.half_width_1d, options.points_1d)
                               : Grid(dim, options.half_width_2d, options.points_2d);
    const DiscreteOperator Pb = build_subsystem(spec, grid, b);
    const double lo = gershgorin_bounds(Pb).first - 1.0;
    const double hi = sigma_b - options.margin;
    if (hi <= lo) continue;
    const EigenPairs pairs = eigenpairs_in(Pb, lo, hi, options.eigen);
    for (int i = 0; i < pairs.size(); ++i) {
      set.values.push_back({pairs.values(i), "sigma_pp(P^b), b = element " + std::to_string(b) +
                                                 " (dim X^b = " + std::to_string(dim) + ")"});
    }
  }
  std::sort(set.values.begin(), set.values.end(), [](const Threshold& x, const Threshold& y) { return x.value < y.value; });
  set.sigma = set.values.front().value;
  cache[a] = set;
  return set;
}

}  // namespace

ThresholdSet thresholds(const ProblemSpec& spec, int element, const ThresholdOptions& options) {
  if (spec.mode != Mode::ManyBody || !spec.lattice) throw Error(ErrorCode::NotManyBody, "thresholds need a lattice");
  if (element < 0 || element >= spec.lattice->size()) throw Error(ErrorCode::SpecInvalid, "element out of range");
  std::map<int, ThresholdSet> cache;
  return thresholds_rec(spec, element, 0, options, cache);
}

double d_lambda(const ThresholdSet& T, double lambda) {
  if (T.values.empty()) throw Error(ErrorCode::BelowSigma, "empty threshold set");
  if (lambda < T.sigma) throw Error(ErrorCode::BelowSigma, "lambda lies below Sigma");
  double d = std::numeric_limits<double>::infinity();
  for (const auto& t : T.values) {
    if (t.value <= lambda) d = std::min(d, lambda - t.value);
  }
  return d;
}

json SigmaEssEstimate::to_json() const {
  return {{"analytic", analytic}, {"onsets", onsets}, {"half_widths", half_widths}, {"difference", difference}};
}

ProblemSpec channel_spec(const ProblemSpec& spec, int j) {
  ProblemSpec s;
  s.channels = 1;
  s.ambient_dim = spec.ambient_dim;
  s.mode = spec.mode;
  s.lattice = spec.lattice;
  s.potentials = {spec.potentials.at(j)};
  return s;
}

Eigen::Vector2d minimizing_direction(const ProblemSpec& spec, int j) {
  const auto& hp = spec.potentials.at(j).homogeneous;
  if (!hp || spec.ambient_dim != 2) throw Error(ErrorCode::SpecInvalid, "channel has no homogeneous part in 2D");
  double best = std::numeric_limits<double>::infinity(), best_theta = 0.0;
  for (int i = 0; i < 4096; ++i) {
    const double th = 2.0 * std::numbers::pi * i / 4096;
    const double v = hp->on_sphere(th);
    if (v < best) {
      best = v;
      best_theta = th;
    }
  }
  return {std::cos(best_theta), std::sin(best_theta)};
}

SigmaEssEstimate sigma_ess_bottom(const ProblemSpec& spec, const std::vector<Grid>& ladder, int j,
                                  const MourreOptions& options) {
  if (spec.mode != Mode::Homogeneous) throw Error(ErrorCode::SpecInvalid, "sigma_ess_bottom needs homogeneous mode");
  SigmaEssEstimate est;
  const Eigen::Vector2d w = minimizing_direction(spec, j);
  est.analytic = spec.potentials[j].homogeneous->on_sphere(std::atan2(w(1), w(0))) + spec.potentials[j].constant;
  const ProblemSpec single = channel_spec(spec, j);
  for (const auto& grid : ladder) {
    const DiscreteOperator P = build_P(single, grid);
    double onset = std::numeric_limits<double>::quiet_NaN();
    for (int k = 8; k <= std::min(512, P.size()) && std::isnan(onset); k *= 2) {
      const EigenPairs low = lowest_eigenpairs(P, std::min(k, P.size()), options.eigen);
      for (int i = 0; i < low.size(); ++i) {
        if (localization(grid, low.vectors.col(i), options.localization_radius) < options.nonlocalized_threshold) {
          onset = low.values(i);
          break;
        }
      }
    }
    est.onsets.push_back(onset);
    est.half_widths.push_back(grid.half_width());
  }
  est.difference = std::abs(est.onsets.back() - est.analytic);
  return est;
}

double weyl_residual(const ProblemSpec& spec, const Grid& grid, int j, double lambda, double k) {
  const Eigen::Vector2d w = minimizing_direction(spec, j);
  const double sigma = spec.potentials[j].homogeneous->on_sphere(std::atan2(w(1), w(0))) + spec.potentials[j].constant;
  if (lambda < sigma) throw Error(ErrorCode::BelowSigma, "Weyl states need lambda >= Sigma_j");
  if (k * k + k > 0.9 * grid.half_width()) {
    throw Error(ErrorCode::BoxTooSmall, "Weyl bump at scale k = " + std::to_string(k) + " leaves the inner 90% box");
  }
  const double p = std::sqrt(lambda - sigma);
  const SmoothBump phi(0.0, 0.5, 1.0);
  const Eigen::Vector2d c = k * k * w;
  CVec u(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const Eigen::Vector2d x = grid.point(i);
    u(i) = std::polar(phi((x - c).norm() / k), p * x.dot(w));
  }
  const DiscreteOperator P = build_P(channel_spec(spec, j), grid);
  return (P.apply(u) - lambda * u).norm() / u.norm();
}

json EigencountReport::to_json() const { return {{"counts", counts}, {"stable", stable}}; }

EigencountReport eigencount_window(const OperatorBuilder& builder, const std::vector<Grid>& ladder,
                                   const SpectralWindow& window, const MourreOptions& options) {
  EigencountReport rep;
  for (const auto& grid : ladder) {
    const DiscreteOperator P = builder(grid);
    const EigenPairs pairs = eigenpairs_in(P, window.lo(), window.hi(), options.eigen);
    int count = 0;
    for (int i = 0; i < pairs.size(); ++i) {
      if (localization(grid, pairs.vectors.col(i), options.localization_radius) >= options.localized_threshold) ++count;
    }
    rep.counts.push_back(count);
  }
  const std::size_t n = rep.counts.size();
  rep.stable = n < 2 || rep.counts[n - 1] == rep.counts[n - 2];
  return rep;
}

}  // namespace mstate

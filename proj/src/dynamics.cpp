#include "mstate/dynamics.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <fstream>

#include "mstate/errors.hpp"

namespace mstate {

using nlohmann::json;

double PropagationTrace::max_norm_drift() const {
  double d = 0.0;
  for (double n : norm) d = std::max(d, std::abs(n - norm.front()));
  return d;
}

double PropagationTrace::max_energy_drift() const {
  double d = 0.0;
  for (double e : energy) d = std::max(d, std::abs(e - energy.front()));
  return d;
}

void PropagationTrace::require_guard() const {
  if (truncated) {
    throw Error(ErrorCode::BoundaryBreach, "boundary shell mass exceeded the guard at t = " + std::to_string(breach_time));
  }
}

json PropagationTrace::summary() const {
  return {{"samples", times.size()},
          {"t_end", times.empty() ? 0.0 : times.back()},
          {"max_norm_drift", max_norm_drift()},
          {"max_energy_drift", max_energy_drift()},
          {"max_boundary_mass", boundary_mass.empty() ? 0.0 : *std::max_element(boundary_mass.begin(), boundary_mass.end())},
          {"truncated", truncated},
          {"breach_time", truncated ? json(breach_time) : json(nullptr)},
          {"grid", grid.to_json()}};
}

ChebyshevPropagator::ChebyshevPropagator(const DiscreteOperator& P, double tol, double max_phase)
    : P_(P), tol_(tol), max_phase_(max_phase) {
  const auto [lo, hi] = gershgorin_bounds(P);
  center_ = 0.5 * (lo + hi);
  scale_ = std::max(0.5 * (hi - lo) * 1.01, 1e-12);
}

CVec ChebyshevPropagator::expand(const CVec& u, double tau) const {
  const double z = tau * scale_;
  const double az = std::abs(z);
  // J_k(-z) = (-1)^k J_k(z)
  std::vector<cplx> coef;
  for (int k = 0;; ++k) {
    double jk = std::cyl_bessel_j(static_cast<double>(k), az);
    if (z < 0.0 && (k % 2 == 1)) jk = -jk;
    const cplx phase = std::pow(cplx(0.0, -1.0), k);
    coef.push_back((k == 0 ? 1.0 : 2.0) * phase * jk);
    if (k > az + 10 && std::abs(jk) < 1e-3 * tol_) break;
  }
  const auto X = [this](const CVec& v) -> CVec { return (P_.apply(v) - center_ * v) / scale_; };
  CVec t_prev = u;
  CVec out = coef[0] * u;
  CVec t_cur = X(u);
  out += coef[1] * t_cur;
  for (std::size_t k = 2; k < coef.size(); ++k) {
    CVec t_next = 2.0 * X(t_cur) - t_prev;
    out += coef[k] * t_next;
    t_prev = std::move(t_cur);
    t_cur = std::move(t_next);
  }
  return std::polar(1.0, -tau * center_) * out;
}

CVec ChebyshevPropagator::step(const CVec& u, double dt) const {
  if (dt == 0.0) return u;
  const int substeps = std::max(1, static_cast<int>(std::ceil(std::abs(dt) * scale_ / max_phase_)));
  CVec v = u;
  for (int s = 0; s < substeps; ++s) v = expand(v, dt / substeps);
  return v;
}

namespace {

void record(PropagationTrace& trace, const DiscreteOperator& P, const CVec& psi, double t,
            const std::vector<bool>& shell) {
  const int ng = trace.grid.size();
  Eigen::VectorXd density = Eigen::VectorXd::Zero(ng);
  std::vector<double> pops(trace.channels, 0.0);
  for (int j = 0; j < trace.channels; ++j) {
    for (int p = 0; p < ng; ++p) {
      const double w = std::norm(psi(static_cast<Eigen::Index>(j) * ng + p));
      density(p) += w;
      pops[j] += w;
    }
  }
  double boundary = 0.0;
  for (int p = 0; p < ng; ++p) {
    if (shell[p]) boundary += density(p);
  }
  trace.times.push_back(t);
  trace.densities.push_back(std::move(density));
  trace.channel_populations.push_back(std::move(pops));
  trace.boundary_mass.push_back(boundary);
  trace.norm.push_back(psi.norm());
  trace.energy.push_back(std::real(psi.dot(P.apply(psi))));
}

}  // namespace

PropagationTrace propagate(const DiscreteOperator& P, const Grid& grid, const DiscreteState& psi0,
                           const std::vector<double>& times, const PropagationOptions& options) {
  if (psi0.values.size() != P.size()) throw Error(ErrorCode::ShapeMismatch, "state and operator differ in size");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw Error(ErrorCode::ToleranceFailure, "initial state must be normalized");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw Error(ErrorCode::ToleranceFailure, "time grid must be increasing");
  }
  PropagationTrace trace;
  trace.grid = grid;
  trace.channels = P.channels();
  std::vector<bool> shell(grid.size());
  for (int p = 0; p < grid.size(); ++p) {
    shell[p] = grid.point(p).cwiseAbs().maxCoeff() > options.guard_fraction * grid.half_width();
  }
  const ChebyshevPropagator prop(P, options.tol, options.max_phase);
  CVec psi = psi0.values;
  double t = 0.0;
  for (double target : times) {
    psi = prop.step(psi, target - t);
    t = target;
    record(trace, P, psi, t, shell);
    if (trace.boundary_mass.back() > options.guard_threshold) {
      trace.truncated = true;
      trace.breach_time = t;
      // drop the offending sample so every reported time respects the guard
      trace.times.pop_back();
      trace.densities.pop_back();
      trace.channel_populations.pop_back();
      trace.boundary_mass.pop_back();
      trace.norm.pop_back();
      trace.energy.pop_back();
      break;
    }
  }
  trace.final_state = psi;
  if (trace.max_norm_drift() > 1e-8) throw Error(ErrorCode::ToleranceFailure, "norm drift above 1e-8");
  return trace;
}

double time_reversal_error(const DiscreteOperator& P, const DiscreteState& psi0, double T,
                           const PropagationOptions& options) {
  const ChebyshevPropagator prop(P, options.tol, options.max_phase);
  const CVec forward = prop.step(psi0.values, T);
  return (prop.step(forward, -T) - psi0.values).norm();
}

CVec weighted_seed(const Grid& grid, const DiscreteState& seed, double s_prime) {
  const int ng = grid.size();
  if (seed.block_size != ng) throw Error(ErrorCode::ShapeMismatch, "seed does not live on this grid");
  CVec out = seed.values;
  for (int p = 0; p < ng; ++p) {
    const double w = std::pow(1.0 + grid.point(p).squaredNorm(), -0.5 * s_prime);
    for (int j = 0; j < seed.channels; ++j) out(static_cast<Eigen::Index>(j) * ng + p) *= w;
  }
  return out;
}

PreparedState prepare_state(const DiscreteOperator& P, const Grid& grid, const SmoothBump& f, double s_prime,
                            const DiscreteState& seed, FilterMethod method, const EigenOptions& options) {
  const CVec weighted = weighted_seed(grid, seed, s_prime);
  const SpectralFilter filter = smooth_filter(P, f, method, options);
  CVec psi = filter.apply(weighted);
  PreparedState out;
  out.filtered_norm = psi.norm();
  if (out.filtered_norm <= 1e-10 * std::max(weighted.norm(), 1e-300)) {
    throw Error(ErrorCode::EmptyFilter, "f(P) annihilates the weighted seed");
  }
  psi /= out.filtered_norm;
  const EigenPairs& pairs = method == FilterMethod::Spectral ? filter.eigenpairs()
                                                            : eigenpairs_in(P, f.lower(), f.upper(), options);
  out.filter_rank = pairs.size();
  out.window_mass = (pairs.vectors.adjoint() * psi).squaredNorm();
  out.state = DiscreteState(psi, P.channels());
  return out;
}

json DecayFit::to_json() const {
  return {{"window", {t1, t2}}, {"points", points},         {"slope", slope},
          {"intercept", intercept}, {"slope_ci", slope_ci}, {"s_target", s_target},
          {"tolerance", tolerance}, {"below_floor", below_floor}, {"passed", passed}};
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values, double t1, double t2,
                   double s_target, double tolerance, double floor) {
  if (!(t2 > 2.0 * t1) || !(t1 > 0.0)) throw Error(ErrorCode::WindowTooShort, "fit window needs t2 > 2 t1 > 0");
  DecayFit fit;
  fit.t1 = t1;
  fit.t2 = t2;
  fit.s_target = s_target;
  fit.tolerance = tolerance;
  std::vector<double> lx, ly;
  bool all_below = true;
  for (std::size_t i = 0; i < times.size() && i < values.size(); ++i) {
    if (times[i] < t1 - 1e-12 || times[i] > t2 + 1e-12) continue;
    all_below = all_below && values[i] < floor;
    lx.push_back(std::log(times[i]));
    ly.push_back(std::log(std::max(values[i], 1e-300)));
  }
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 8) throw Error(ErrorCode::WindowTooShort, "fewer than 8 samples in the fit window");
  const int n = fit.points;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += r * r;
  }
  const double se = std::sqrt(rss / (n - 2) / sxx);
  const boost::math::students_t dist(n - 2);
  fit.slope_ci = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  fit.below_floor = floor > 0.0 && all_below;
  fit.passed = fit.below_floor || fit.slope <= -s_target + tolerance;
  return fit;
}

json DecaySeries::to_json() const {
  return {{"observable", observable}, {"parameter", parameter}, {"fit", fit.to_json()}};
}

double region_mass(const PropagationTrace& trace, std::size_t i,
                   const std::function<bool(const Eigen::VectorXd&, double)>& region) {
  double m = 0.0;
  const double t = trace.times.at(i);
  for (int p = 0; p < trace.grid.size(); ++p) {
    if (region(trace.grid.point(p), t)) m += trace.densities[i](p);
  }
  return m;
}

namespace {

DecaySeries radial_series(const PropagationTrace& trace, const std::string& name, double parameter,
                          const std::function<bool(double, double)>& inside, const FitWindow& window) {
  DecaySeries s;
  s.observable = name;
  s.parameter = parameter;
  s.times = trace.times;
  std::vector<double> radii(trace.grid.size());
  for (int p = 0; p < trace.grid.size(); ++p) radii[p] = trace.grid.point(p).norm();
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    double m = 0.0;
    for (int p = 0; p < trace.grid.size(); ++p) {
      if (inside(radii[p], trace.times[i])) m += trace.densities[i](p);
    }
    s.values.push_back(std::sqrt(m));
  }
  s.fit = fit_decay(s.times, s.values, window.t1, window.t2, window.s_target, window.tolerance, window.floor);
  return s;
}

}  // namespace

DecaySeries low_velocity_mass(const PropagationTrace& trace, double lambda_prime, const FitWindow& window) {
  if (!(lambda_prime > 0.0)) throw Error(ErrorCode::SpecInvalid, "lambda' must be positive");
  const double v = std::sqrt(lambda_prime);
  return radial_series(trace, "low_velocity", lambda_prime, [v](double r, double t) { return r < v * t; }, window);
}

DecaySeries high_velocity_mass(const PropagationTrace& trace, double lambda_second, const FitWindow& window) {
  if (!(lambda_second > 0.0)) throw Error(ErrorCode::SpecInvalid, "lambda'' must be positive");
  const double v = std::sqrt(lambda_second);
  return radial_series(trace, "high_velocity", lambda_second, [v](double r, double t) { return r > v * t; }, window);
}

DecaySeries minimal_velocity_manybody(const PropagationTrace& trace, double d, double eps, const FitWindow& window) {
  if (!(d > eps)) throw Error(ErrorCode::GapNonpositive, "d(lambda) - eps must be positive");
  const double v = 2.0 * std::sqrt(d - eps);
  return radial_series(trace, "minimal_velocity", v, [v](double r, double t) { return r < v * t; }, window);
}

DecaySeries channel_population(const PropagationTrace& trace, int j, const FitWindow& window) {
  if (j < 0 || j >= trace.channels) throw Error(ErrorCode::SpecInvalid, "channel index out of range");
  DecaySeries s;
  s.observable = "channel_population";
  s.parameter = j + 1;
  s.times = trace.times;
  for (const auto& pops : trace.channel_populations) s.values.push_back(std::sqrt(pops[j]));
  s.fit = fit_decay(s.times, s.values, window.t1, window.t2, window.s_target, window.tolerance, window.floor);
  return s;
}

double lambda_prime_scan(const PropagationTrace& trace, const std::vector<double>& candidates,
                         const FitWindow& window) {
  double best = 0.0;
  for (double lp : candidates) {
    if (low_velocity_mass(trace, lp, window).fit.passed) best = std::max(best, lp);
  }
  return best;
}

SmoothStep::SmoothStep(double eps) : eps_(eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::SpecInvalid, "smooth step scale must be positive");
}

double SmoothStep::operator()(double x) const { return 1.0 - unit_step((x + 2.0 * eps_) / eps_).value; }

double SmoothStep::derivative(double x) const { return -unit_step((x + 2.0 * eps_) / eps_).d1 / eps_; }

SmoothStep smooth_step(double eps) { return SmoothStep(eps); }

DecaySeries smooth_low_velocity_mass(const PropagationTrace& trace, double lambda_prime, double eps,
                                     const FitWindow& window) {
  const SmoothStep chi(eps);
  DecaySeries s;
  s.observable = "smooth_low_velocity";
  s.parameter = lambda_prime;
  s.times = trace.times;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double t = trace.times[i];
    double m = 0.0;
    for (int p = 0; p < trace.grid.size(); ++p) {
      const double c = chi(trace.grid.point(p).squaredNorm() / (t * t) - lambda_prime);
      m += c * c * trace.densities[i](p);
    }
    s.values.push_back(std::sqrt(m));
  }
  s.fit = fit_decay(s.times, s.values, window.t1, window.t2, window.s_target, window.tolerance, window.floor);
  return s;
}

void write_trace_csv(const PropagationTrace& trace, double lambda_prime, double lambda_second,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out.precision(17);
  out << "t,region_mass_low,region_mass_high";
  for (int j = 0; j < trace.channels; ++j) out << ",channel_pop_" << j + 1;
  out << ",boundary_mass,norm\n";
  const double vl = std::sqrt(lambda_prime), vh = std::sqrt(lambda_second);
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double low = region_mass(trace, i, [vl](const Eigen::VectorXd& x, double t) { return x.norm() < vl * t; });
    const double high = region_mass(trace, i, [vh](const Eigen::VectorXd& x, double t) { return x.norm() > vh * t; });
    out << trace.times[i] << ',' << low << ',' << high;
    for (double p : trace.channel_populations[i]) out << ',' << p;
    out << ',' << trace.boundary_mass[i] << ',' << trace.norm[i] << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

}  // namespace mstate

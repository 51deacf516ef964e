#include "mstate/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mstate/errors.hpp"
#include "mstate/smooth.hpp"

namespace mstate {

namespace {

constexpr double kPi = std::numbers::pi;

Point tangent(double theta) {
  Point t(2);
  t << -std::sin(theta), std::cos(theta);
  return t;
}

// Unit directions spanning the rays used by the sampled decay checks, taken
// inside the column span of `basis`.
std::vector<Point> ray_directions(const Eigen::MatrixXd& basis, int rays_2d) {
  const int d = static_cast<int>(basis.cols());
  std::vector<Point> out;
  if (d == 1) {
    out.push_back(basis.col(0));
    out.push_back(-basis.col(0));
  } else if (d == 2) {
    for (int i = 0; i < rays_2d; ++i) {
      const double th = 2.0 * kPi * (i + 0.125) / rays_2d;
      out.push_back(std::cos(th) * basis.col(0) + std::sin(th) * basis.col(1));
    }
  } else if (d >= 3) {
    for (int i = 0; i < d; ++i) {
      out.push_back(basis.col(i));
      out.push_back(-basis.col(i));
    }
    Point diag = basis.rowwise().sum();
    out.push_back(diag.normalized());
    out.push_back(-diag.normalized());
  }
  return out;
}

std::vector<double> sample_radii(double box_radius) {
  std::vector<double> radii;
  const int count = 12;
  for (int i = 0; i < count; ++i) {
    radii.push_back(std::exp(std::log(1.0) + (std::log(box_radius) - std::log(1.0)) * i / (count - 1)));
  }
  return radii;
}

// (x . grad)^l f evaluated as the l-th derivative of s -> f(e^s x) at s = 0.
double dilation_derivative(const std::function<double(const Point&)>& f, const Point& x, int l) {
  const double eta = 1e-3;
  if (l == 0) return f(x);
  const double fp = f(std::exp(eta) * x);
  const double fm = f(std::exp(-eta) * x);
  if (l == 1) return (fp - fm) / (2.0 * eta);
  return (fp - 2.0 * f(x) + fm) / (eta * eta);
}

// Sampled max over rays per radius; passes when the outermost sample has
// dropped below `ratio` times the overall maximum.
AssumptionCheck decay_check(const std::string& name, const std::function<double(const Point&)>& f,
                            const std::vector<Point>& rays, double box_radius, double ratio) {
  AssumptionCheck check{name, false, "", {}};
  double overall = 0.0;
  for (double r : sample_radii(box_radius)) {
    double m = 0.0;
    for (const auto& w : rays) m = std::max(m, std::abs(f(r * w)));
    check.samples.emplace_back(r, m);
    overall = std::max(overall, m);
  }
  const double outer = check.samples.back().second;
  if (!std::isfinite(overall)) {
    check.detail = "non-finite samples";
    return check;
  }
  check.passed = overall <= 1e-12 || outer <= ratio * overall;
  std::ostringstream os;
  os << "outer/max = " << (overall > 0 ? outer / overall : 0.0);
  check.detail = os.str();
  return check;
}

std::string pair_label(int j, int k) {
  return "[" + std::to_string(j + 1) + "," + std::to_string(k + 1) + "]";
}

}  // namespace

double polar_angle(const Point& x) {
  if (x.size() == 1) return x(0) >= 0.0 ? 0.0 : kPi;
  if (x(0) == 0.0 && x(1) == 0.0) return 0.0;
  return std::atan2(x(1), x(0));
}

double angular_difference(double a, double b) {
  double d = std::fmod(a - b, 2.0 * kPi);
  if (d > kPi) d -= 2.0 * kPi;
  if (d <= -kPi) d += 2.0 * kPi;
  return d;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Decaying: return "decaying";
    case Mode::Homogeneous: return "homogeneous";
    case Mode::ManyBody: return "manybody";
  }
  return "unknown";
}

Mode mode_from_string(const std::string& s) {
  if (s == "decaying") return Mode::Decaying;
  if (s == "homogeneous") return Mode::Homogeneous;
  if (s == "manybody") return Mode::ManyBody;
  throw Error(ErrorCode::SpecInvalid, "unknown mode '" + s + "'");
}

double HomogeneousPotential::value(const Point& x) const {
  const double r = x.norm();
  if (r == 0.0) return 0.0;
  return radial_blend(r).value * profile_.value(polar_angle(x));
}

Point HomogeneousPotential::gradient(const Point& x) const {
  const double r = x.norm();
  Point g = Point::Zero(x.size());
  if (r == 0.0) return g;
  const Jet1 s = radial_blend(r);
  const double theta = polar_angle(x);
  g = s.d1 * profile_.value(theta) * x / r;
  if (x.size() == 2) g += s.value * profile_.derivative(theta) * tangent(theta) / r;
  return g;
}

double ChannelPotential::value(const Point& x) const {
  double v = constant;
  if (homogeneous) v += homogeneous->value(x);
  if (decaying) v += decaying->value(x);
  for (const auto& t : manybody_terms) v += t.field.value(x);
  return v;
}

Point ChannelPotential::gradient(const Point& x) const {
  Point g = Point::Zero(x.size());
  if (homogeneous) g += homogeneous->gradient(x);
  if (decaying) g += decaying->gradient(x);
  for (const auto& t : manybody_terms) g += t.field.gradient(x);
  return g;
}

double ChannelPotential::value_restricted(const Point& x, const std::function<bool(int)>& pred) const {
  double v = constant;
  for (const auto& t : manybody_terms) {
    if (pred(t.element)) v += t.field.value(x);
  }
  return v;
}

void ProblemSpec::validate() const {
  const auto fail = [](const std::string& msg) { throw Error(ErrorCode::SpecInvalid, msg); };
  if (channels < 1) fail("channel count must be >= 1");
  if (ambient_dim < 1 || ambient_dim > 3) fail("ambient dimension must be 1, 2 or 3");
  if (static_cast<int>(potentials.size()) != channels) fail("one potential per channel required");
  for (const auto& c : couplings) {
    if (c.j < 0 || c.j >= channels || c.k < 0 || c.k >= channels) fail("coupling channel index out of range");
    if (!c.r_tilde && !c.r_hat) fail("coupling term has neither r_tilde nor r_hat");
  }
  if (mode == Mode::Homogeneous && ambient_dim < 2) {
    fail("homogeneous mode needs ambient dimension >= 2 (the sphere S^0 has no tangent directions)");
  }
  if (mode == Mode::ManyBody) {
    if (!lattice) fail("manybody mode requires a lattice");
    if (lattice->ambient_dim() != ambient_dim) fail("lattice ambient dimension mismatch");
    for (const auto& p : potentials) {
      if (p.homogeneous || p.decaying) fail("manybody mode potentials must be sums of many-body terms");
      for (const auto& t : p.manybody_terms) {
        if (t.element < 0 || t.element >= lattice->size()) fail("many-body term element out of range");
        if (t.element == lattice->a_min()) fail("v_j^{a_min} must vanish");
      }
    }
    for (const auto& c : couplings) {
      if (!c.element) fail("manybody couplings must name a lattice element");
      if (*c.element < 0 || *c.element >= lattice->size()) fail("coupling element out of range");
      if (*c.element == lattice->a_min()) fail("couplings on a_min must vanish");
    }
  } else {
    for (const auto& p : potentials) {
      if (!p.manybody_terms.empty()) fail("many-body terms are only allowed in manybody mode");
    }
    if (mode == Mode::Homogeneous) {
      bool any = false;
      for (const auto& p : potentials) any = any || p.homogeneous.has_value();
      if (!any) fail("homogeneous mode needs at least one homogeneous potential");
    }
  }
}

CrossingSet find_crossings(const ProblemSpec& spec, double energy, const CrossingOptions& options) {
  if (spec.ambient_dim != 2) {
    throw Error(ErrorCode::SpecInvalid, "crossing search is implemented on the circle (n = 2)");
  }
  struct Root {
    double theta;
    int channel;
  };
  std::vector<Root> roots;
  const int n = options.scan_points;
  for (int j = 0; j < spec.channels; ++j) {
    const auto& hp = spec.potentials[j].homogeneous;
    if (!hp) continue;
    const auto f = [&](double th) { return hp->on_sphere(th) - energy; };
    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = f(2.0 * kPi * i / n);
    for (int i = 0; i < n; ++i) {
      double a = 2.0 * kPi * i / n;
      double b = 2.0 * kPi * (i + 1) / n;
      const double fa = vals[i];
      const double fb = vals[(i + 1) % n];
      double root = 0.0;
      bool found = false;
      if (fa == 0.0) {
        root = a;
        found = true;
      } else if (fa * fb < 0.0) {
        double lo = a, hi = b, flo = fa;
        while (hi - lo > options.angular_tol) {
          const double mid = 0.5 * (lo + hi);
          const double fm = f(mid);
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        root = 0.5 * (lo + hi);
        found = true;
      } else {
        // Tangential touch: a local extremum of f that reaches zero.
        const double fprev = vals[(i + n - 1) % n];
        if ((fa - fprev) * (fb - fa) < 0.0) {
          double lo = a - 2.0 * kPi / n, hi = b;
          const bool is_min = fa < fprev;
          for (int it = 0; it < 200; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            const bool keep_left = is_min ? f(m1) < f(m2) : f(m1) > f(m2);
            if (keep_left) hi = m2; else lo = m1;
          }
          if (std::abs(f(0.5 * (lo + hi))) < 1e-9) {
            throw Error(ErrorCode::CriticalValue,
                        "energy is a critical value of channel " + std::to_string(j + 1));
          }
        }
      }
      if (!found) continue;
      if (std::abs(hp->tangential_derivative(root)) < options.critical_threshold) {
        throw Error(ErrorCode::CriticalValue,
                    "degenerate crossing in channel " + std::to_string(j + 1));
      }
      roots.push_back({std::remainder(root, 2.0 * kPi), j});
    }
  }
  std::sort(roots.begin(), roots.end(), [](const Root& x, const Root& y) { return x.theta < y.theta; });

  CrossingSet set;
  set.energy = energy;
  const double merge_tol = 1e-7;
  for (const auto& r : roots) {
    bool merged = false;
    for (std::size_t d = 0; d < set.angles.size(); ++d) {
      if (std::abs(angular_difference(set.angles[d], r.theta)) < merge_tol) {
        auto& mem = set.memberships[d];
        if (std::find(mem.begin(), mem.end(), r.channel) == mem.end()) mem.push_back(r.channel);
        merged = true;
        break;
      }
    }
    if (!merged) {
      set.angles.push_back(r.theta);
      set.memberships.push_back({r.channel});
    }
  }
  for (std::size_t d = 0; d < set.angles.size(); ++d) {
    std::sort(set.memberships[d].begin(), set.memberships[d].end());
    set.directions.emplace_back(std::cos(set.angles[d]), std::sin(set.angles[d]));
  }
  return set;
}

bool GradientConditionReport::all_passed() const {
  return std::all_of(margins.begin(), margins.end(), [](const auto& m) { return m.passed; });
}

double GradientConditionReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& g : margins) m = std::min(m, g.margin);
  return m;
}

GradientConditionReport check_gradient_condition(const CrossingSet& crossings, const ProblemSpec& spec) {
  GradientConditionReport report;
  for (std::size_t d = 0; d < crossings.size(); ++d) {
    const double th = crossings.angles[d];
    // On the unit circle the gradient of a degree-zero function is tangential.
    double sum = 0.0;
    for (int l : crossings.memberships[d]) sum += spec.potentials[l].homogeneous->tangential_derivative(th);
    for (int j : crossings.memberships[d]) {
      const double margin = spec.potentials[j].homogeneous->tangential_derivative(th) * sum;
      report.margins.push_back({static_cast<int>(d), j, margin, margin > 0.0});
    }
  }
  return report;
}

Cutoff::Cutoff(std::vector<double> owned, double width) : owned_(std::move(owned)), width_(width) {}

double Cutoff::on_sphere(double theta) const {
  double v = 0.0;
  for (double w : owned_) {
    const SmoothBump bump(0.0, 0.5 * width_, width_);
    v += bump(angular_difference(theta, w));
  }
  return v;
}

double Cutoff::derivative(double theta) const {
  double d = 0.0;
  for (double w : owned_) {
    const SmoothBump bump(0.0, 0.5 * width_, width_);
    d += bump.derivative(angular_difference(theta, w));
  }
  return d;
}

double Cutoff::value(const Point& x) const {
  if (owned_.empty()) return 0.0;
  return on_sphere(polar_angle(x));
}

Point Cutoff::gradient(const Point& x) const {
  Point g = Point::Zero(x.size());
  const double r = x.norm();
  if (owned_.empty() || r == 0.0 || x.size() != 2) return g;
  const double th = polar_angle(x);
  return derivative(th) * tangent(th) / r;
}

std::vector<Cutoff> build_cutoffs(const CrossingSet& crossings, int channels, double width) {
  if (!(width > 0.0)) throw Error(ErrorCode::WidthTooLarge, "cutoff width must be positive");
  const std::size_t nd = crossings.size();
  if (nd >= 2) {
    double min_sep = 2.0 * kPi;
    for (std::size_t a = 0; a < nd; ++a) {
      for (std::size_t b = a + 1; b < nd; ++b) {
        min_sep = std::min(min_sep, std::abs(angular_difference(crossings.angles[a], crossings.angles[b])));
      }
    }
    if (width >= 0.5 * min_sep) {
      throw Error(ErrorCode::WidthTooLarge, "cutoff width must stay below half the minimal crossing separation");
    }
  }
  std::vector<Cutoff> cutoffs;
  for (int j = 0; j < channels; ++j) {
    std::vector<double> owned;
    for (std::size_t d = 0; d < nd; ++d) {
      const auto& mem = crossings.memberships[d];
      if (std::find(mem.begin(), mem.end(), j) != mem.end()) owned.push_back(crossings.angles[d]);
    }
    cutoffs.emplace_back(std::move(owned), width);
  }
  return cutoffs;
}

Eigen::MatrixXd Weight::hessian(const Point& x) const {
  if (hessian_exact) return hessian_exact(x);
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd h(n, n);
  const double eta = 1e-5 * std::max(1.0, x.norm());
  for (int k = 0; k < n; ++k) {
    Point xp = x, xm = x;
    xp(k) += eta;
    xm(k) -= eta;
    h.col(k) = (gradient(xp) - gradient(xm)) / (2.0 * eta);
  }
  return 0.5 * (h + h.transpose());
}

double Weight::bilaplacian(const Point& x) const {
  if (bilaplacian_exact) return bilaplacian_exact(x);
  const int n = static_cast<int>(x.size());
  const double eta = 1e-2;
  const auto lap = [&](const Point& y) {
    double s = 0.0;
    const double ay = value(y);
    for (int k = 0; k < n; ++k) {
      Point yp = y, ym = y;
      yp(k) += eta;
      ym(k) -= eta;
      s += (value(yp) - 2.0 * ay + value(ym)) / (eta * eta);
    }
    return s;
  };
  double s = 0.0;
  const double lx = lap(x);
  for (int k = 0; k < n; ++k) {
    Point xp = x, xm = x;
    xp(k) += eta;
    xm(k) -= eta;
    s += (lap(xp) - 2.0 * lx + lap(xm)) / (eta * eta);
  }
  return s;
}

Weight dilation_weight() {
  Weight w;
  w.beta = 0.0;
  w.value = [](const Point& x) { return 0.25 * x.squaredNorm(); };
  w.gradient = [](const Point& x) -> Point { return 0.5 * x; };
  w.hessian_exact = [](const Point& x) -> Eigen::MatrixXd {
    return 0.5 * Eigen::MatrixXd::Identity(x.size(), x.size());
  };
  w.bilaplacian_exact = [](const Point&) { return 0.0; };
  return w;
}

Weight weight_a(const ProblemSpec& spec, const std::vector<Cutoff>& cutoffs, double beta) {
  if (beta == 0.0) return dilation_weight();
  if (!(beta > 0.0)) throw Error(ErrorCode::BetaTooLarge, "beta must be positive");
  if (static_cast<int>(cutoffs.size()) != spec.channels) {
    throw Error(ErrorCode::ShapeMismatch, "one cutoff per channel required");
  }
  struct Term {
    HomogeneousPotential potential;
    Cutoff cutoff;
  };
  auto terms = std::make_shared<std::vector<Term>>();
  for (int j = 0; j < spec.channels; ++j) {
    if (spec.potentials[j].homogeneous && !cutoffs[j].is_zero()) {
      terms->push_back({*spec.potentials[j].homogeneous, cutoffs[j]});
    }
  }
  // sup of the prefactor deficit: outside |x| >= 1/2 F is degree zero and
  // inside it is F(omega) scaled by the blend in [0, 1].
  if (spec.ambient_dim == 2) {
    double fmax = 0.0;
    for (int i = 0; i < 2048; ++i) {
      const double th = 2.0 * kPi * i / 2048;
      double f = 0.0;
      for (const auto& t : *terms) f += t.potential.on_sphere(th) * t.cutoff.on_sphere(th);
      fmax = std::max(fmax, f);
    }
    if (1.0 - 2.0 * beta * fmax < 0.5) {
      throw Error(ErrorCode::BetaTooLarge, "1 - 2 beta sum V~ chi drops below 1/2");
    }
  }
  Weight w;
  w.beta = beta;
  w.value = [terms, beta](const Point& x) {
    double f = 0.0;
    for (const auto& t : *terms) f += t.potential.value(x) * t.cutoff.value(x);
    return (1.0 - 2.0 * beta * f) * 0.25 * x.squaredNorm();
  };
  w.gradient = [terms, beta](const Point& x) -> Point {
    double f = 0.0;
    Point df = Point::Zero(x.size());
    for (const auto& t : *terms) {
      const double v = t.potential.value(x);
      const double c = t.cutoff.value(x);
      f += v * c;
      df += t.potential.gradient(x) * c + v * t.cutoff.gradient(x);
    }
    return (1.0 - 2.0 * beta * f) * 0.5 * x - 0.5 * beta * x.squaredNorm() * df;
  };
  return w;
}

double auto_beta(const ProblemSpec& spec, const std::vector<Cutoff>& cutoffs, const std::vector<Point>& samples,
                 double beta_start, int max_halvings) {
  // Hess a is degree zero outside |x| >= 1/2, so the angular profile of the
  // cutoffs has to be resolved on a fine ring as well as at the given points.
  std::vector<Point> pts = samples;
  if (spec.ambient_dim == 2) {
    for (double r : {0.3, 0.4, 0.5, 1.0}) {
      for (int i = 0; i < 2048; ++i) {
        const double th = 2.0 * kPi * i / 2048;
        Point x(2);
        x << r * std::cos(th), r * std::sin(th);
        pts.push_back(x);
      }
    }
  }
  double beta = beta_start;
  for (int it = 0; it <= max_halvings; ++it, beta *= 0.5) {
    Weight w;
    try {
      w = weight_a(spec, cutoffs, beta);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::BetaTooLarge) continue;
      throw;
    }
    bool ok = true;
    for (const auto& x : pts) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w.hessian(x));
      if (es.eigenvalues().minCoeff() < 0.25 - 1e-9) {
        ok = false;
        break;
      }
    }
    if (ok) return beta;
  }
  throw Error(ErrorCode::BetaTooLarge, "no admissible beta found");
}

bool AssumptionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

AssumptionReport validate_assumptions(const ProblemSpec& spec, double energy, const AssumptionOptions& options) {
  AssumptionReport report;
  const int n = spec.ambient_dim;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  const auto ambient_rays = ray_directions(identity, options.rays);
  const double box = options.box_radius;

  // Coupling decay: (x . grad)^l of every coefficient is o(1).
  for (std::size_t c = 0; c < spec.couplings.size(); ++c) {
    const auto& term = spec.couplings[c];
    const auto rays = (term.coordinates.cols() > 0) ? ray_directions(term.coordinates, options.rays) : ambient_rays;
    const std::string label = pair_label(term.j, term.k);
    std::vector<std::pair<std::string, std::function<double(const Point&)>>> coefficients;
    if (term.r_hat) coefficients.emplace_back("r_hat", term.r_hat->value);
    if (term.r_tilde) {
      for (int i = 0; i < n; ++i) {
        auto field = term.r_tilde->value;
        coefficients.emplace_back("r_tilde_" + std::to_string(i + 1),
                                  [field, i](const Point& x) { return field(x)(i); });
      }
    }
    for (const auto& [cname, f] : coefficients) {
      for (int l = 0; l <= 2; ++l) {
        auto g = [&f, l](const Point& x) { return dilation_derivative(f, x, l); };
        report.checks.push_back(decay_check("coupling_decay" + label + "." + cname + ".l" + std::to_string(l), g,
                                            rays, box, options.decay_ratio));
      }
    }
  }

  if (spec.mode == Mode::Decaying) {
    for (int j = 0; j < spec.channels; ++j) {
      const auto& p = spec.potentials[j];
      AssumptionCheck check{"bounded_dilation_derivatives[" + std::to_string(j + 1) + "]", true, "", {}};
      double worst = 0.0;
      for (double r : sample_radii(box)) {
        double m = 0.0;
        for (const auto& w : ambient_rays) {
          for (int l = 0; l <= 2; ++l) {
            m = std::max(m, std::abs(dilation_derivative([&p](const Point& x) { return p.value(x); }, r * w, l)));
          }
        }
        check.samples.emplace_back(r, m);
        worst = std::max(worst, m);
      }
      check.passed = std::isfinite(worst);
      check.detail = "max |(x.grad)^l V| = " + std::to_string(worst);
      report.checks.push_back(check);
    }
    report.checks.push_back({"single_channel_mourre", true, "delegated to spectral::mourre_report per channel", {}});
  }

  if (spec.mode == Mode::Homogeneous) {
    for (int j = 0; j < spec.channels; ++j) {
      const auto& p = spec.potentials[j];
      if (p.homogeneous) {
        AssumptionCheck check{"homogeneity[" + std::to_string(j + 1) + "]", false, "", {}};
        double worst = 0.0;
        for (int i = 0; i < 64; ++i) {
          const double th = 2.0 * kPi * i / 64.0;
          Point x(2);
          x << std::cos(th), std::sin(th);
          for (double r : {0.5, 0.7, 1.0, 3.0}) {
            for (double s : {1.0, 1.5, 2.0, 4.0}) {
              worst = std::max(worst, std::abs(p.homogeneous->value(s * r * x) - p.homogeneous->value(r * x)));
            }
          }
        }
        check.passed = worst <= 1e-12;
        check.detail = "max |V(sx) - V(x)| = " + std::to_string(worst);
        report.checks.push_back(check);
      }
      if (p.decaying) {
        const auto& w = *p.decaying;
        const std::string idx = "[" + std::to_string(j + 1) + "]";
        report.checks.push_back(decay_check("decaying_part" + idx + ".alpha0", w.value, ambient_rays, box,
                                            options.decay_ratio));
        report.checks.push_back(decay_check(
            "decaying_part" + idx + ".alpha1", [&w](const Point& x) { return x.norm() * w.gradient(x).norm(); },
            ambient_rays, box, options.decay_ratio));
        report.checks.push_back(decay_check(
            "decaying_part" + idx + ".alpha2",
            [&w](const Point& x) {
              const int dim = static_cast<int>(x.size());
              const double eta = 1e-4 * std::max(1.0, x.norm());
              double hn = 0.0;
              for (int k = 0; k < dim; ++k) {
                Point xp = x, xm = x;
                xp(k) += eta;
                xm(k) -= eta;
                hn = std::max(hn, ((w.gradient(xp) - w.gradient(xm)) / (2.0 * eta)).cwiseAbs().maxCoeff());
              }
              return x.squaredNorm() * hn;
            },
            ambient_rays, box, options.decay_ratio));
      }
    }
    AssumptionCheck noncritical{"noncritical_energy", false, "", {}};
    AssumptionCheck gradient{"gradient_condition", false, "", {}};
    try {
      const auto crossings = find_crossings(spec, energy);
      noncritical.passed = true;
      noncritical.detail = std::to_string(crossings.size()) + " crossing directions";
      const auto g = check_gradient_condition(crossings, spec);
      gradient.passed = g.all_passed();
      gradient.detail = crossings.size() ? "min margin " + std::to_string(g.min_margin()) : "no crossings";
    } catch (const Error& e) {
      noncritical.detail = e.what();
      gradient.detail = "not evaluated";
    }
    report.checks.push_back(noncritical);
    report.checks.push_back(gradient);
  }

  if (spec.mode == Mode::ManyBody) {
    const auto& lattice = *spec.lattice;
    const auto inside_complement = [&lattice](int element, const Eigen::MatrixXd& coords) {
      if (element == lattice.a_min()) return false;
      if (coords.cols() == 0) return true;
      const Eigen::MatrixXd pa = lattice.projectors(element).onto_Xa;
      return (pa * coords).cwiseAbs().maxCoeff() <= 1e-10;
    };
    for (int j = 0; j < spec.channels; ++j) {
      for (const auto& t : spec.potentials[j].manybody_terms) {
        const std::string label = "[" + std::to_string(j + 1) + ",b" + std::to_string(t.element) + "]";
        AssumptionCheck s{"manybody_structure" + label, inside_complement(t.element, t.coordinates), "", {}};
        s.detail = s.passed ? "term reads x^b only" : "term depends on directions inside X_b";
        report.checks.push_back(s);
        const auto rays = ray_directions(t.coordinates, options.rays);
        for (int l = 0; l <= 2; ++l) {
          auto g = [&t, l](const Point& x) { return dilation_derivative(t.field.value, x, l); };
          report.checks.push_back(decay_check("manybody_decay" + label + ".l" + std::to_string(l), g, rays, box,
                                              options.decay_ratio));
        }
      }
    }
    for (const auto& c : spec.couplings) {
      const std::string label = pair_label(c.j, c.k);
      AssumptionCheck s{"manybody_coupling_structure" + label, c.element && inside_complement(*c.element, c.coordinates),
                        "", {}};
      report.checks.push_back(s);
    }
  }
  return report;
}

}  // namespace mstate

#include "mstate/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <locale>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "mstate/config.hpp"
#include "mstate/discretize.hpp"
#include "mstate/dynamics.hpp"
#include "mstate/errors.hpp"
#include "mstate/graf.hpp"
#include "mstate/spectral.hpp"

namespace mstate {

using json = nlohmann::json;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

json Table::to_json() const { return {{"columns", columns}, {"rows", rows.size()}}; }

json ExperimentResult::to_json() const {
  json t = json::object();
  for (const auto& [k, v] : tables) t[k] = v.to_json();
  return {{"name", name},   {"kind", kind},     {"verdict", mstate::to_string(verdict)},
          {"reason", reason}, {"data", data},   {"tables", t},
          {"artifacts", artifacts}};
}

bool RunReport::all_passed() const {
  return std::all_of(experiments.begin(), experiments.end(),
                     [](const ExperimentResult& e) { return e.verdict == Verdict::Pass; });
}

const ExperimentResult* RunReport::find(const std::string& experiment) const {
  for (const auto& e : experiments) {
    if (e.name == experiment) return &e;
  }
  return nullptr;
}

json RunReport::to_json() const {
  json ex = json::array();
  for (const auto& e : experiments) ex.push_back(e.to_json());
  return {{"scenario", scenario},
          {"all_passed", all_passed()},
          {"experiments", ex},
          {"environment", environment},
          {"artifacts", artifacts}};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double num(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw Error(ErrorCode::SpecInvalid, std::string("scenario config needs numeric '") + key + "'");
  }
  return j[key].get<double>();
}

Grid grid_from(const json& j, int dim) {
  return Grid(j.value("dim", dim), num(j, "L"), static_cast<int>(num(j, "N")));
}

std::vector<Grid> ladder_from(const json& j, int dim) {
  std::vector<Grid> out;
  for (const auto& g : j) out.push_back(grid_from(g, dim));
  return out;
}

std::vector<double> times_from(const json& j) {
  const double step = num(j, "step"), stop = num(j, "stop");
  if (!(step > 0.0) || !(stop > step)) throw Error(ErrorCode::SpecInvalid, "times need 0 < step < stop");
  std::vector<double> t;
  const int n = static_cast<int>(std::llround(stop / step));
  for (int i = 0; i <= n; ++i) t.push_back(step * i);
  return t;
}

FitWindow fit_from(const json& j) {
  FitWindow w;
  w.t1 = num(j, "t1");
  w.t2 = num(j, "t2");
  w.s_target = j.value("s", 1.0);
  w.tolerance = j.value("tolerance", 0.15);
  w.floor = j.value("floor", 0.0);
  return w;
}

SmoothBump filter_from(const json& j) { return SmoothBump(num(j, "center"), num(j, "plateau"), num(j, "support")); }

// Gaussian seed exp(-|x|^2 / (2 w^2)) in the listed (1-based) channels.
DiscreteState gaussian_seed(const Grid& g, int channels, const json& j) {
  const double w = num(j, "width");
  CVec v = CVec::Zero(static_cast<Eigen::Index>(g.size()) * channels);
  for (const auto& c : j.at("channels")) {
    const int ch = c.get<int>() - 1;
    if (ch < 0 || ch >= channels) throw Error(ErrorCode::SpecInvalid, "seed channel out of range");
    for (int p = 0; p < g.size(); ++p) {
      v(static_cast<Eigen::Index>(ch) * g.size() + p) = std::exp(-g.point(p).squaredNorm() / (2.0 * w * w));
    }
  }
  return DiscreteState(v, channels);
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : -kInf; }

Table decay_table(const DecaySeries& s) {
  Table t{{"t", "value", "log_t", "log_value"}, {}};
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    t.rows.push_back({s.times[i], s.values[i], safe_log(s.times[i]), safe_log(s.values[i])});
  }
  return t;
}

Table rung_table(const MourreReport& r) {
  Table t{{"half_width", "points_per_axis", "rank", "rayleigh_min", "negative_modes"}, {}};
  for (const auto& g : r.rungs) {
    t.rows.push_back({g.half_width, static_cast<double>(g.points_per_axis), static_cast<double>(g.rank),
                      g.rayleigh_min, static_cast<double>(g.negative_modes)});
  }
  return t;
}

ExperimentResult make(const std::string& name, const std::string& kind) {
  ExperimentResult e;
  e.name = name;
  e.kind = kind;
  return e;
}

// Runs fn; library errors become an inconclusive verdict with the message.
ExperimentResult guarded(const std::string& name, const std::string& kind,
                         const std::function<void(ExperimentResult&)>& fn) {
  ExperimentResult e = make(name, kind);
  try {
    fn(e);
  } catch (const Error& err) {
    e.verdict = err.code() == ErrorCode::PropertyViolated ? Verdict::Fail : Verdict::Inconclusive;
    e.reason = err.what();
  }
  return e;
}

void set(ExperimentResult& e, bool ok, const std::string& fail_reason) {
  e.verdict = ok ? Verdict::Pass : Verdict::Fail;
  if (!ok) e.reason = fail_reason;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(6);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- dynamics

struct DynamicRun {
  Grid grid{1, 1.0, 4};
  DiscreteOperator P;
  PreparedState prepared;
  PropagationTrace trace;
  double guard_max = 0.0;  // shell mass over the measurement window
  double guard_limit = 1e-6;
  double guard_time = 0.0;  // first breach
};

DynamicRun run_dynamics(const ProblemSpec& spec, const json& cfg, double t_measure_end) {
  DynamicRun r;
  r.grid = grid_from(cfg.at("grid"), spec.ambient_dim);
  r.P = build_P(spec, r.grid);
  r.prepared = prepare_state(r.P, r.grid, filter_from(cfg.at("filter")), num(cfg, "s_prime"),
                             gaussian_seed(r.grid, spec.channels, cfg.at("seed")));
  PropagationOptions po;
  po.tol = cfg.value("propagation_tol", 1e-10);
  // the guard is evaluated over the measurement window below so that the
  // whole trace is available for the report
  po.guard_threshold = kInf;
  r.guard_limit = cfg.value("guard", 1e-6);
  r.trace = propagate(r.P, r.grid, r.prepared.state, times_from(cfg.at("times")), po);
  bool breached = false;
  for (std::size_t i = 0; i < r.trace.times.size() && r.trace.times[i] <= t_measure_end; ++i) {
    r.guard_max = std::max(r.guard_max, r.trace.boundary_mass[i]);
    if (!breached && r.trace.boundary_mass[i] > r.guard_limit) {
      breached = true;
      r.guard_time = r.trace.times[i];
    }
  }
  return r;
}

bool guard_ok(const DynamicRun& r) { return r.guard_max <= r.guard_limit; }

std::string guard_reason(const DynamicRun& r) {
  return "boundary shell mass exceeds the guard " + fmt(r.guard_limit) + " from t = " + fmt(r.guard_time) +
         " (max " + fmt(r.guard_max) + ")";
}

// Decay verdict: the fit must pass and the boundary guard must hold.
void decay_verdict(ExperimentResult& e, const DecaySeries& s, const DynamicRun& r) {
  e.data["series"] = s.to_json();
  e.data["guard"] = {{"max_shell_mass", r.guard_max}, {"limit", r.guard_limit},
                     {"first_breach", guard_ok(r) ? json(nullptr) : json(r.guard_time)}};
  e.tables["series"] = decay_table(s);
  if (!guard_ok(r)) {
    e.verdict = Verdict::Inconclusive;
    e.reason = guard_reason(r) + "; fitted slope " + fmt(s.fit.slope);
    return;
  }
  set(e, s.fit.passed, "fitted slope " + fmt(s.fit.slope) + " above " + fmt(-s.fit.s_target + s.fit.tolerance));
}

ExperimentResult hygiene(const DynamicRun& r, double reversal_time, double tol) {
  return guarded("propagator_hygiene", "invariants", [&](ExperimentResult& e) {
    const double nd = r.trace.max_norm_drift();
    const double ed = r.trace.max_energy_drift();
    PropagationOptions po;
    po.tol = tol;
    const double rev = time_reversal_error(r.P, r.prepared.state, reversal_time, po);
    e.data = {{"norm_drift", nd}, {"energy_drift", ed}, {"time_reversal_error", rev},
              {"reversal_time", reversal_time}, {"tol", tol}};
    set(e, nd <= 1e-8 && ed <= 1e-8 && rev <= 2.0 * tol,
        "drift or time-reversal error above limits (norm " + fmt(nd) + ", energy " + fmt(ed) + ", reversal " +
            fmt(rev) + ")");
  });
}

void write_trace(const DynamicRun& r, const std::string& dir, const std::string& file, double lp, double ls,
                 ExperimentResult& e) {
  if (dir.empty()) return;
  const std::string path = (std::filesystem::path(dir) / file).string();
  write_trace_csv(r.trace, lp, ls, path);
  e.artifacts["trace"] = path;
}

// ---------------------------------------------------------------- runners

// Relative error of i[-Delta_h, A_h] against 2(-Delta_h) on Gaussian wave
// packets whose carrier wavenumbers are at most pi/(4 h) for the coarsest h.
ExperimentResult commutator_identity(const json& cfg) {
  return guarded("commutator_identity", "identity", [&](ExperimentResult& e) {
    const int dim = cfg.value("dim", 1);
    const double L = num(cfg, "L");
    const double width = cfg.value("envelope", 2.0);
    const double factor = cfg.value("factor", 5.0);
    std::vector<int> ns = cfg.at("N").get<std::vector<int>>();
    const double h0 = Grid(dim, L, ns.front()).spacing();
    const double kmax = std::numbers::pi / (4.0 * h0);
    Table t{{"h", "relative_error", "bound", "hermitian_defect"}, {}};
    bool ok = true;
    double prev = kInf;
    std::vector<double> errs;
    for (int n : ns) {
      const Grid g(dim, L, n);
      const DiscreteOperator lap = build_laplacian(g);
      const DiscreteOperator C = commutator(lap, build_A(g));
      double worst = 0.0;
      for (double frac : {0.25, 0.5, 0.75, 1.0}) {
        for (double shift : {0.0, L / 8.0}) {
          CVec u(g.size());
          for (int p = 0; p < g.size(); ++p) {
            const Point x = g.point(p);
            Point c = Point::Constant(dim, shift);
            u(p) = std::exp(-(x - c).squaredNorm() / (2.0 * width * width)) *
                   std::exp(cplx(0.0, frac * kmax * (x.sum() - c.sum()) / std::sqrt(double(dim))));
          }
          const CVec ref = 2.0 * lap.apply(u);
          worst = std::max(worst, (C.apply(u) - ref).norm() / ref.norm());
        }
      }
      const double bound = factor * g.spacing();
      t.rows.push_back({g.spacing(), worst, bound, C.recorded_defect()});
      ok = ok && worst <= bound && worst <= 0.55 * prev;
      prev = worst;
      errs.push_back(worst);
    }
    e.data = {{"errors", errs}, {"kmax", kmax}, {"factor", factor}};
    e.tables["ladder"] = t;
    set(e, ok, "relative error above factor*h or not shrinking at least first order");
  });
}

std::vector<ExperimentResult> run_free_two_channel(const json& cfg, const std::string&) {
  const ProblemSpec spec = spec_from_json(cfg.at("spec"));
  const double lambda = num(cfg.at("window"), "center");
  const double delta = num(cfg.at("window"), "half_width");
  const double tol = num(cfg, "tol");
  const std::vector<Grid> ladder{grid_from(cfg.at("grid"), spec.ambient_dim)};
  const MourreBuilder builder = [&](const Grid& g) {
    DiscreteOperator P = build_P(spec, g);
    DiscreteOperator C = mourre_form(P, g, dilation_weight());
    return std::make_pair(std::move(P), std::move(C));
  };
  // 2(lambda - c_j - delta) minimized over open channels
  const auto bound = [&](double d) {
    double b = kInf;
    for (const auto& p : spec.potentials) {
      if (p.constant < lambda + d) b = std::min(b, 2.0 * (lambda - p.constant - d));
    }
    return b;
  };
  std::vector<ExperimentResult> out;
  out.push_back(guarded("mourre", "mourre", [&](ExperimentResult& e) {
    const double gamma = bound(delta);
    const MourreReport rep = mourre_report(builder, ladder, SpectralWindow(lambda, delta), gamma - tol);
    e.data = rep.to_json();
    e.data["expected_bound"] = gamma;
    e.tables["rungs"] = rung_table(rep);
    set(e, rep.rayleigh_min() >= gamma - tol && rep.negative_modes() == 0,
        "rayleigh_min " + fmt(rep.rayleigh_min()) + " below " + fmt(gamma - tol));
  }));
  out.push_back(guarded("delta_scan", "mourre_scan", [&](ExperimentResult& e) {
    Table t{{"delta", "rayleigh_min", "negative_modes", "expected_bound"}, {}};
    bool ok = true;
    for (const auto& d : cfg.at("delta_scan")) {
      const double dd = d.get<double>();
      const double gamma = bound(dd);
      const MourreReport rep = mourre_report(builder, ladder, SpectralWindow(lambda, dd), gamma - tol);
      t.rows.push_back({dd, rep.rayleigh_min(), static_cast<double>(rep.negative_modes()), gamma});
      ok = ok && rep.rayleigh_min() >= gamma - tol;
    }
    e.tables["scan"] = t;
    set(e, ok, "some window violates 2(lambda - c_j - delta) - tol");
  }));
  out.push_back(commutator_identity(cfg.at("commutator")));
  return out;
}

std::vector<ExperimentResult> run_homogeneous(const json& cfg, const std::string&) {
  const ProblemSpec spec = spec_from_json(cfg.at("spec"));
  const double lambda = num(cfg, "energy");
  std::vector<ExperimentResult> out;
  out.push_back(guarded("gradient_condition", "assumption", [&](ExperimentResult& e) {
    const CrossingSet crossings = find_crossings(spec, lambda);
    const GradientConditionReport gc = check_gradient_condition(crossings, spec);
    json margins = json::array();
    for (const auto& m : gc.margins) {
      margins.push_back({{"direction", crossings.angles[m.direction]}, {"channel", m.channel + 1}, {"margin", m.margin}});
    }
    e.data = {{"crossing_angles", crossings.angles}, {"margins", margins}, {"min_margin", gc.min_margin()}};
    set(e, gc.all_passed() && gc.min_margin() > 0.0, "gradient condition margin not positive");
  }));
  out.push_back(guarded("mourre", "mourre", [&](ExperimentResult& e) {
    const std::vector<Cutoff> cutoffs = build_cutoffs(find_crossings(spec, lambda), spec.channels, num(cfg, "cutoff_width"));
    double beta = 0.0;
    if (cfg.at("beta").is_number()) {
      beta = cfg["beta"].get<double>();
    } else {
      std::vector<Point> samples;
      const int angles = cfg.value("beta_angles", 128);
      for (const auto& r : cfg.at("beta_radii")) {
        for (int i = 0; i < angles; ++i) {
          const double th = 2.0 * std::numbers::pi * i / angles;
          Point x(2);
          x << r.get<double>() * std::cos(th), r.get<double>() * std::sin(th);
          samples.push_back(x);
        }
      }
      beta = auto_beta(spec, cutoffs, samples);
    }
    const Weight w = weight_a(spec, cutoffs, beta);
    const MourreBuilder builder = [&](const Grid& g) {
      DiscreteOperator P = build_P(spec, g);
      DiscreteOperator C = mourre_form(P, g, w);
      return std::make_pair(std::move(P), std::move(C));
    };
    const MourreReport rep = mourre_report(builder, ladder_from(cfg.at("ladder"), 2),
                                           SpectralWindow(lambda, num(cfg, "half_width")), num(cfg, "gamma"));
    const MourreRung& top = rep.top();
    const double gamma0 = top.gamma_nonlocal ? *top.gamma_nonlocal : top.rayleigh_min;
    e.data = rep.to_json();
    e.data["beta"] = beta;
    e.data["gamma0"] = gamma0;
    e.tables["rungs"] = rung_table(rep);
    set(e, rep.mourre_compatible && gamma0 > 0.0, rep.verdict);
  }));
  return out;
}

std::vector<ExperimentResult> run_decaying(const json& cfg, const std::string&) {
  const ProblemSpec spec = spec_from_json(cfg.at("spec"));
  const SpectralWindow window(num(cfg.at("window"), "center"), num(cfg.at("window"), "half_width"));
  const std::vector<Grid> ladder = ladder_from(cfg.at("ladder"), spec.ambient_dim);
  std::vector<ExperimentResult> out;
  out.push_back(guarded("assumptions", "assumption", [&](ExperimentResult& e) {
    const AssumptionReport rep = validate_assumptions(spec, window.center);
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    e.data = {{"checks", checks}};
    set(e, rep.all_passed(), "an assumption check failed");
  }));
  out.push_back(guarded("mourre", "mourre", [&](ExperimentResult& e) {
    const MourreBuilder builder = [&](const Grid& g) {
      DiscreteOperator P = build_P(spec, g);
      DiscreteOperator C = mourre_form(P, g, dilation_weight());
      return std::make_pair(std::move(P), std::move(C));
    };
    const MourreReport rep = mourre_report(builder, ladder, window, num(cfg, "gamma"));
    e.data = rep.to_json();
    e.tables["rungs"] = rung_table(rep);
    const OperatorBuilder pb = [&](const Grid& g) { return build_P(spec, g); };
    e.data["eigencount"] = eigencount_window(pb, ladder, window).to_json();
    set(e, !rep.pure_bound && rep.mourre_compatible, "expected a Mourre-compatible verdict, got: " + rep.verdict);
  }));
  return out;
}

std::vector<ExperimentResult> run_thresholds(const json& cfg, const std::string&) {
  const ProblemSpec spec = spec_from_json(cfg.at("spec"));
  const double lambda = num(cfg, "lambda");
  const double tol = num(cfg, "tolerance");
  std::vector<ExperimentResult> out;
  ThresholdSet T;
  out.push_back(guarded("thresholds", "thresholds", [&](ExperimentResult& e) {
    T = thresholds(spec, spec.lattice->a_max());
    // brute force: constants plus dense eigenvalues of the reference 1D
    // subsystem below its lowest constant
    const ProblemSpec ref = spec_from_json(cfg.at("reference"));
    const DiscreteOperator Pr = build_P(ref, grid_from(cfg.at("reference_grid"), 1));
    const EigenPairs all = dense_eigenpairs(Pr);
    double cmin = kInf;
    std::vector<double> brute;
    for (const auto& p : spec.potentials) {
      brute.push_back(p.constant);
      cmin = std::min(cmin, p.constant);
    }
    for (int i = 0; i < all.size(); ++i) {
      if (all.values(i) < cmin - 1e-9) brute.push_back(all.values(i));
    }
    std::sort(brute.begin(), brute.end());
    const std::vector<double> got = T.energies();
    double diff = got.size() == brute.size() ? 0.0 : kInf;
    Table t{{"recursive", "brute_force"}, {}};
    for (std::size_t i = 0; i < std::min(got.size(), brute.size()); ++i) {
      diff = std::max(diff, std::abs(got[i] - brute[i]));
      t.rows.push_back({got[i], brute[i]});
    }
    e.data = {{"recursive", T.to_json()}, {"brute_force", brute}, {"max_difference", diff}};
    e.tables["thresholds"] = t;
    set(e, diff <= tol, "recursive thresholds differ from brute force by " + fmt(diff));
  }));
  out.push_back(guarded("d_lambda", "thresholds", [&](ExperimentResult& e) {
    if (T.values.empty()) T = thresholds(spec, spec.lattice->a_max());
    const double d = d_lambda(T, lambda);
    const double expected = num(cfg, "expected_d");
    e.data = {{"lambda", lambda}, {"d", d}, {"expected", expected}, {"sigma", T.sigma}};
    set(e, T.sigma < 0.0 && std::abs(d - expected) <= 1e-9, "d(lambda) = " + fmt(d));
  }));
  out.push_back(guarded("subsystem", "assembly", [&](ExperimentResult& e) {
    // P^b for the line carrying the well equals the directly built 1D operator
    const Grid g = grid_from(cfg.at("reference_grid"), 1);
    const ProblemSpec ref = spec_from_json(cfg.at("reference"));
    const int b = spec.lattice->find(Subspace::from_spanning(
        Eigen::MatrixXd(Eigen::Map<const Eigen::VectorXd>(cfg.at("well_line").get<std::vector<double>>().data(), 2))));
    const SpMat diff = build_subsystem(spec, g, b).matrix() - build_P(ref, g).matrix();
    double m = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k) {
      for (SpMat::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
    }
    e.data = {{"element", b}, {"max_entry_difference", m}};
    set(e, m <= 1e-12, "subsystem differs from the reference operator");
  }));
  return out;
}

// d(lambda) for a spec without lattice: the channel constants are the only
// thresholds of the free part.
double constant_gap(const ProblemSpec& spec, double lambda) {
  double d = kInf;
  for (const auto& p : spec.potentials) {
    if (p.constant <= lambda) d = std::min(d, lambda - p.constant);
  }
  if (!std::isfinite(d)) throw Error(ErrorCode::BelowSigma, "lambda lies below every channel constant");
  return d;
}

std::vector<ExperimentResult> run_minimal_velocity(const json& cfg, const std::string& dir) {
  const ProblemSpec spec = spec_from_json(cfg.at("spec"));
  const FitWindow window = fit_from(cfg.at("fit"));
  const double lambda = num(cfg.at("filter"), "center");
  const double eps = num(cfg, "eps");
  const double ls = num(cfg, "lambda_second");
  std::vector<ExperimentResult> out;
  DynamicRun run;
  try {
    run = run_dynamics(spec, cfg, window.t2);
  } catch (const Error& err) {
    for (const char* name : {"minimal_velocity", "high_velocity", "propagator_hygiene"}) {
      ExperimentResult e = make(name, "decay");
      e.reason = err.what();
      out.push_back(e);
    }
    return out;
  }
  const double d = constant_gap(spec, lambda);
  out.push_back(guarded("minimal_velocity", "decay", [&](ExperimentResult& e) {
    const DecaySeries s = minimal_velocity_manybody(run.trace, d, eps, window);
    e.data["d"] = d;
    e.data["radius_speed"] = 2.0 * std::sqrt(d - eps);
    e.data["filter_rank"] = run.prepared.filter_rank;
    decay_verdict(e, s, run);
    write_trace(run, dir, "trace.csv", 4.0 * (d - eps), ls, e);
  }));
  out.push_back(guarded("high_velocity", "decay", [&](ExperimentResult& e) {
    FitWindow w = window;
    w.floor = cfg.value("high_floor", 1e-8);
    const DecaySeries s = high_velocity_mass(run.trace, ls, w);
    e.data["lambda_second"] = ls;
    Table t{{"lambda_second", "slope", "slope_ci", "passed"}, {}};
    for (const auto& c : cfg.at("lambda_second_scan")) {
      const DecaySeries sc = high_velocity_mass(run.trace, c.get<double>(), w);
      t.rows.push_back({c.get<double>(), sc.fit.slope, sc.fit.slope_ci, sc.fit.passed ? 1.0 : 0.0});
    }
    e.tables["scan"] = t;
    e.data["max_band_speed"] = 2.0 * std::sqrt(num(cfg.at("filter"), "center") + num(cfg.at("filter"), "support"));
    decay_verdict(e, s, run);
  }));
  out.push_back(hygiene(run, num(cfg, "reversal_time"), cfg.value("propagation_tol", 1e-10)));
  return out;
}

std::vector<ExperimentResult> run_channel_decay(const json& cfg, const std::string& dir) {
  const ProblemSpec spec = spec_from_json(cfg.at("spec"));
  const FitWindow window = fit_from(cfg.at("fit"));
  const int j = cfg.value("channel", 1) - 1;
  std::vector<ExperimentResult> out;
  DynamicRun run;
  bool ran = false;
  out.push_back(guarded("channel_decay", "decay", [&](ExperimentResult& e) {
    run = run_dynamics(spec, cfg, window.t2);
    ran = true;
    const DecaySeries s = channel_population(run.trace, j, window);
    e.data["channel"] = j + 1;
    e.data["filter_rank"] = run.prepared.filter_rank;
    decay_verdict(e, s, run);
    write_trace(run, dir, "trace.csv", 0.0, 0.0, e);
  }));
  out.push_back(guarded("control_uncoupled", "control", [&](ExperimentResult& e) {
    json c = cfg.at("spec");
    c.erase("couplings");
    const ProblemSpec free = spec_from_json(c);
    const DynamicRun r = run_dynamics(free, cfg, window.t2);
    double worst = 0.0;
    for (const auto& pops : r.trace.channel_populations) worst = std::max(worst, pops[j]);
    const double limit = num(cfg, "control_limit");
    e.data = {{"max_population", worst}, {"limit", limit}};
    set(e, worst < limit, "uncoupled channel population reached " + fmt(worst));
  }));
  if (ran) {
    out.push_back(hygiene(run, num(cfg, "reversal_time"), cfg.value("propagation_tol", 1e-10)));
  } else {
    ExperimentResult e = make("propagator_hygiene", "invariants");
    e.reason = "propagation did not run";
    out.push_back(e);
  }
  return out;
}

std::vector<ExperimentResult> run_low_high(const json& cfg, const std::string& dir) {
  const ProblemSpec spec = spec_from_json(cfg.at("spec"));
  const FitWindow window = fit_from(cfg.at("fit"));
  const std::vector<double> candidates = cfg.at("lambda_prime_candidates").get<std::vector<double>>();
  std::vector<ExperimentResult> out;
  DynamicRun run;
  try {
    run = run_dynamics(spec, cfg, window.t2);
  } catch (const Error& err) {
    for (const char* name : {"low_velocity_scan", "high_velocity_scan", "sharp_vs_smooth", "propagator_hygiene"}) {
      ExperimentResult e = make(name, "decay");
      e.reason = err.what();
      out.push_back(e);
    }
    return out;
  }
  double best = 0.0;
  out.push_back(guarded("low_velocity_scan", "decay_scan", [&](ExperimentResult& e) {
    Table t{{"lambda_prime", "slope", "slope_ci", "passed"}, {}};
    for (double c : candidates) {
      const DecaySeries s = low_velocity_mass(run.trace, c, window);
      t.rows.push_back({c, s.fit.slope, s.fit.slope_ci, s.fit.passed ? 1.0 : 0.0});
    }
    best = lambda_prime_scan(run.trace, candidates, window);
    e.data = {{"lambda_prime", best}, {"guard", {{"max_shell_mass", run.guard_max}, {"limit", run.guard_limit}}}};
    e.tables["scan"] = t;
    if (best > 0.0) e.tables["series"] = decay_table(low_velocity_mass(run.trace, best, window));
    if (!guard_ok(run)) {
      e.verdict = Verdict::Inconclusive;
      e.reason = guard_reason(run);
      return;
    }
    set(e, best > 0.0, "no candidate lambda' passes the decay fit");
    write_trace(run, dir, "trace.csv", best, 0.0, e);
  }));
  out.push_back(guarded("high_velocity_scan", "decay_scan", [&](ExperimentResult& e) {
    FitWindow w = window;
    w.floor = cfg.value("high_floor", 1e-8);
    Table t{{"lambda_second", "slope", "slope_ci", "passed"}, {}};
    double smallest = kInf;
    for (const auto& c : cfg.at("lambda_second_candidates")) {
      const DecaySeries s = high_velocity_mass(run.trace, c.get<double>(), w);
      t.rows.push_back({c.get<double>(), s.fit.slope, s.fit.slope_ci, s.fit.passed ? 1.0 : 0.0});
      if (s.fit.passed) smallest = std::min(smallest, c.get<double>());
    }
    e.tables["scan"] = t;
    e.data = {{"lambda_second", std::isfinite(smallest) ? json(smallest) : json(nullptr)},
              {"max_band_speed_squared", 4.0 * (num(cfg.at("filter"), "center") + num(cfg.at("filter"), "support"))}};
    if (std::isfinite(smallest)) e.tables["series"] = decay_table(high_velocity_mass(run.trace, smallest, w));
    if (!guard_ok(run)) {
      e.verdict = Verdict::Inconclusive;
      e.reason = guard_reason(run);
      return;
    }
    set(e, std::isfinite(smallest), "no candidate lambda'' passes the decay fit");
  }));
  out.push_back(guarded("sharp_vs_smooth", "observable", [&](ExperimentResult& e) {
    const double lp = best > 0.0 ? best : candidates.front();
    const double eps = num(cfg, "smooth_eps");
    const DecaySeries sharp = low_velocity_mass(run.trace, lp, window);
    const DecaySeries smooth = smooth_low_velocity_mass(run.trace, lp, eps, window);
    const double gap = std::abs(sharp.fit.slope - smooth.fit.slope);
    e.data = {{"lambda_prime", lp}, {"eps", eps}, {"sharp_slope", sharp.fit.slope}, {"smooth_slope", smooth.fit.slope},
              {"difference", gap}};
    set(e, gap <= 0.1, "sharp and smooth slopes differ by " + fmt(gap));
  }));
  out.push_back(hygiene(run, num(cfg, "reversal_time"), cfg.value("propagation_tol", 1e-10)));
  return out;
}

std::vector<ExperimentResult> run_essential(const json& cfg, const std::string&) {
  const ProblemSpec spec = spec_from_json(cfg.at("spec"));
  std::vector<ExperimentResult> out;
  out.push_back(guarded("sigma_ess", "spectrum", [&](ExperimentResult& e) {
    const SigmaEssEstimate est = sigma_ess_bottom(spec, ladder_from(cfg.at("ladder"), 2), 0);
    const double tol = num(cfg, "onset_tolerance");
    e.data = est.to_json();
    Table t{{"half_width", "onset", "analytic"}, {}};
    for (std::size_t i = 0; i < est.onsets.size(); ++i) t.rows.push_back({est.half_widths[i], est.onsets[i], est.analytic});
    e.tables["ladder"] = t;
    set(e, est.difference <= tol, "onset differs from the analytic value by " + fmt(est.difference));
  }));
  out.push_back(guarded("weyl_sequence", "spectrum", [&](ExperimentResult& e) {
    const json& w = cfg.at("weyl");
    const Grid g = grid_from(w.at("grid"), 2);
    const double lambda = num(w, "lambda");
    Table t{{"k", "residual"}, {}};
    std::vector<double> res;
    for (const auto& k : w.at("k")) {
      res.push_back(weyl_residual(spec, g, 0, lambda, k.get<double>()));
      t.rows.push_back({k.get<double>(), res.back()});
    }
    double worst = kInf;
    for (std::size_t i = 1; i < res.size(); ++i) worst = std::min(worst, res[i - 1] / res[i]);
    const double need = num(w, "min_ratio");
    e.data = {{"lambda", lambda}, {"residuals", res}, {"min_ratio", worst}, {"required", need}};
    e.tables["residuals"] = t;
    set(e, worst >= need, "residual ratio " + fmt(worst) + " below " + fmt(need));
  }));
  return out;
}

std::vector<ExperimentResult> run_graf(const json& cfg, const std::string&) {
  const ProblemSpec spec = spec_from_json(cfg.at("spec"));
  std::vector<ExperimentResult> out;
  out.push_back(guarded("graf", "graf", [&](ExperimentResult& e) {
    if (!spec.lattice) throw Error(ErrorCode::NotManyBody, "Graf field needs a lattice");
    GrafCheckOptions opt;
    opt.samples = cfg.value("samples", opt.samples);
    opt.radius = cfg.value("radius", opt.radius);
    opt.seed = cfg.value("seed", opt.seed);
    const GrafField G = build_graf_G(*spec.lattice, num(cfg, "smoothing"));
    const GrafReport rep = check_graf(G, opt);
    e.data = rep.to_json();
    Table t{{"element", "delta"}, {}};
    for (std::size_t a = 0; a < rep.delta_per_element.size(); ++a) {
      t.rows.push_back({static_cast<double>(a), rep.delta_per_element[a]});
    }
    e.tables["flatness"] = t;
    set(e,
        std::isfinite(rep.C1) && std::isfinite(rep.C2) && rep.min_hessian_eigenvalue >= -opt.psd_tol &&
            rep.delta > 0.0 && rep.derivatives_bounded,
        "Graf properties not established on the samples");
  }));
  return out;
}

// ---------------------------------------------------------------- registry

json two_channel_free_spec() {
  return {{"ambient_dim", 1}, {"mode", "decaying"}, {"channels", json::array({{{"constant", 0}}, {{"constant", 1}}})}};
}

json two_line_spec(bool with_well) {
  json ch1 = {{"constant", 0}};
  if (with_well) {
    ch1["manybody"] = json::array(
        {{{"subspace", json::array({json::array({1, 0})})}, {"preset", "gaussian"}, {"params", {{"strength", -8}, {"width", 1}}}}});
  }
  return {{"ambient_dim", 2},
          {"mode", "manybody"},
          {"lattice", {{"generators", json::array({json::array({json::array({1, 0})}), json::array({json::array({0, 1})})})}}},
          {"channels", json::array({ch1, {{"constant", 1}}})}};
}

std::vector<Scenario> build_registry() {
  std::vector<Scenario> r;
  r.push_back({"free-two-channel-mourre",
               "Mourre estimate for the free channels: i[P,A] >= 2(lambda - c_j - delta) on the spectral window",
               "P = diag(-Delta, -Delta + 1) in 1D with the dilation generator",
               {{"spec", two_channel_free_spec()},
                {"grid", {{"L", 40}, {"N", 1024}}},
                {"window", {{"center", 1.5}, {"half_width", 0.1}}},
                {"tol", 0.05},
                {"delta_scan", {0.05, 0.1, 0.2, 0.3}},
                {"commutator", {{"dim", 1}, {"L", 16}, {"N", {128, 256}}, {"envelope", 2.0}, {"factor", 5.0}}}},
               {"mourre", "delta_scan", "commutator_identity"},
               run_free_two_channel});
  r.push_back({"homogeneous-2d-mourre",
               "Mourre estimate for degree-zero homogeneous potentials with the modified conjugate operator A_V",
               "two channels cos(theta) and cos(theta - pi/4) in 2D at energy 0.3",
               {{"spec",
                 {{"ambient_dim", 2},
                  {"mode", "homogeneous"},
                  {"channels",
                   json::array({{{"homogeneous", {{"preset", "cosine_homogeneous"}, {"params", {{"amplitude", 1}}}}}},
                                {{"homogeneous",
                                  {{"preset", "cosine_homogeneous"},
                                   {"params", {{"amplitude", 1}, {"phase", std::numbers::pi / 4}}}}}}})},
                  {"couplings", json::array({{{"j", 1},
                                              {"k", 2},
                                              {"preset", "coulomb_like"},
                                              {"params", {{"strength", 0.1}, {"rho", 2}}}}})}}},
                {"energy", 0.3},
                {"half_width", 0.1},
                {"gamma", 0.05},
                {"cutoff_width", 0.3},
                {"beta", "auto"},
                {"beta_radii", {0.3, 0.4, 0.5, 0.7, 1, 2, 5, 10, 20}},
                {"beta_angles", 128},
                {"ladder", json::array({{{"L", 15}, {"N", 72}}, {{"L", 20}, {"N", 96}}})}},
               {"gradient_condition", "mourre"},
               run_homogeneous});
  r.push_back({"decaying-mourre",
               "Mourre estimate with compact remainder for short-range decaying potentials",
               "1D well -8 exp(-x^2) below zero energy, certified on a box ladder",
               {{"spec",
                 {{"ambient_dim", 1},
                  {"mode", "decaying"},
                  {"channels",
                   json::array({{{"decaying", {{"preset", "gaussian"}, {"params", {{"strength", -8}, {"width", 1}}}}}}})}}},
                {"window", {{"center", -1.2}, {"half_width", 0.45}}},
                {"gamma", 0.5},
                {"ladder", json::array({{{"L", 40}, {"N", 1024}}, {{"L", 80}, {"N", 2048}}})}},
               {"assumptions", "mourre"},
               run_decaying});
  r.push_back({"manybody-two-line-thresholds",
               "threshold set built recursively from subsystem eigenvalues and the distance d(lambda)",
               "two lines in the plane with a Gaussian well on the first line",
               {{"spec", two_line_spec(true)},
                {"reference",
                 {{"ambient_dim", 1},
                  {"mode", "decaying"},
                  {"channels", json::array({{{"decaying", {{"preset", "gaussian"}, {"params", {{"strength", -8}, {"width", 1}}}}}},
                                            {{"constant", 1}}})}}},
                {"reference_grid", {{"L", 40}, {"N", 1024}}},
                {"well_line", {1, 0}},
                {"lambda", 1.5},
                {"expected_d", 0.5},
                {"tolerance", 1e-6}},
               {"thresholds", "d_lambda", "subsystem"},
               run_thresholds});
  r.push_back({"manybody-minimal-velocity",
               "minimal velocity estimate: mass in x^2/4t^2 < d(lambda) - eps decays like t^-s",
               "free channels c = (0, 1), energy 1.5, weighted Gaussian seed",
               {{"spec", two_channel_free_spec()},
                {"grid", {{"L", 400}, {"N", 8000}}},
                {"filter", {{"center", 1.5}, {"plateau", 0.045}, {"support", 0.09}}},
                {"seed", {{"width", 1.0}, {"channels", {1, 2}}}},
                {"s_prime", 2.0},
                {"eps", 0.1},
                {"lambda_second", 7.0},
                {"lambda_second_scan", {7.0, 9.0, 12.0, 16.0}},
                {"high_floor", 1e-8},
                {"times", {{"step", 0.5}, {"stop", 25}}},
                {"fit", {{"t1", 5}, {"t2", 25}, {"s", 1.0}, {"tolerance", 0.15}}},
                {"guard", 1e-6},
                {"propagation_tol", 1e-10},
                {"reversal_time", 25}},
               {"minimal_velocity", "high_velocity", "propagator_hygiene"},
               run_minimal_velocity});
  r.push_back({"remark1-channel-decay",
               "decay of the closed-channel component ||E_11 psi(t)|| = O(t^-s) for s <= rho",
               "V_1 = -3<x>^-1, V_2 = -2, coupling 0.3<x>^-1, energy -1, seed in channel 2",
               {{"spec",
                 {{"ambient_dim", 1},
                  {"mode", "decaying"},
                  {"channels", json::array({{{"decaying", {{"preset", "coulomb_like"}, {"params", {{"strength", -3}, {"rho", 1}}}}}},
                                            {{"constant", -2}}})},
                  {"couplings", json::array({{{"j", 1},
                                              {"k", 2},
                                              {"preset", "coulomb_like"},
                                              {"params", {{"strength", 0.3}, {"rho", 1}}}}})}}},
                {"channel", 1},
                {"grid", {{"L", 400}, {"N", 8000}}},
                {"filter", {{"center", -1.0}, {"plateau", 0.15}, {"support", 0.3}}},
                {"seed", {{"width", 2.0}, {"channels", {2}}}},
                {"s_prime", 2.0},
                {"times", {{"step", 0.5}, {"stop", 30}}},
                {"fit", {{"t1", 5}, {"t2", 30}, {"s", 1.0}, {"tolerance", 0.15}}},
                {"guard", 1e-6},
                {"control_limit", 1e-8},
                {"propagation_tol", 1e-10},
                {"reversal_time", 30}},
               {"channel_decay", "control_uncoupled", "propagator_hygiene"},
               run_channel_decay});
  r.push_back({"low-high-velocity",
               "propagation estimates: mass below velocity sqrt(lambda') and above sqrt(lambda'') decays",
               "1D well -2 exp(-x^2) at energy 1.5",
               {{"spec",
                 {{"ambient_dim", 1},
                  {"mode", "decaying"},
                  {"channels",
                   json::array({{{"decaying", {{"preset", "gaussian"}, {"params", {{"strength", -2}, {"width", 1}}}}}}})}}},
                {"grid", {{"L", 400}, {"N", 8000}}},
                {"filter", {{"center", 1.5}, {"plateau", 0.3}, {"support", 0.6}}},
                {"seed", {{"width", 1.0}, {"channels", {1}}}},
                {"s_prime", 2.0},
                {"lambda_prime_candidates", {0.25, 0.5, 1.0, 2.0, 3.0}},
                {"lambda_second_candidates", {9.0, 12.0, 16.0, 25.0}},
                {"high_floor", 1e-8},
                {"smooth_eps", 0.05},
                {"times", {{"step", 0.5}, {"stop", 50}}},
                {"fit", {{"t1", 10}, {"t2", 50}, {"s", 1.0}, {"tolerance", 0.15}}},
                {"guard", 1e-6},
                {"propagation_tol", 1e-10},
                {"reversal_time", 50}},
               {"low_velocity_scan", "high_velocity_scan", "sharp_vs_smooth", "propagator_hygiene"},
               run_low_high});
  r.push_back({"essential-spectrum-appendix",
               "bottom of the essential spectrum equals the minimum of the angular profile; Weyl sequences",
               "single channel 2 + cos^2(theta) in 2D",
               {{"spec",
                 {{"ambient_dim", 2},
                  {"mode", "homogeneous"},
                  {"channels",
                   json::array({{{"homogeneous",
                                  {{"preset", "cosine_homogeneous"}, {"params", {{"offset", 2}, {"amplitude", 1}, {"power", 2}}}}}}})}}},
                {"ladder", json::array({{{"L", 10}, {"N", 48}}, {{"L", 20}, {"N", 96}}})},
                {"onset_tolerance", 0.15},
                {"weyl", {{"lambda", 3.0}, {"k", {2, 4}}, {"grid", {{"L", 24}, {"N", 256}}}, {"min_ratio", 1.7}}}},
               {"sigma_ess", "weyl_sequence"},
               run_essential});
  r.push_back({"graf-field-check",
               "Graf's convex function: max{x^2, C1} <= 2G <= x^2 + C2, bounded derivatives, local flatness",
               "two-line lattice in the plane",
               {{"spec", two_line_spec(false)}, {"smoothing", 0.1}, {"samples", 10000}, {"radius", 10.0}, {"seed", 20240611}},
               {"graf"},
               run_graf});
  for (const auto& s : r) {
    if (s.config.contains("spec")) spec_from_json(s.config["spec"]);
    if (s.config.contains("reference")) spec_from_json(s.config["reference"]);
  }
  return r;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

}  // namespace

const std::vector<Scenario>& scenario_registry() {
  static const std::vector<Scenario> registry = build_registry();
  return registry;
}

const Scenario& find_scenario(const std::string& name) {
  for (const auto& s : scenario_registry()) {
    if (s.name == name) return s;
  }
  throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + name + "'");
}

json list_scenarios() {
  json out = json::array();
  for (const auto& s : scenario_registry()) {
    out.push_back({{"name", s.name}, {"anchor", s.anchor}, {"summary", s.summary}, {"experiments", s.experiments}});
  }
  return out;
}

void apply_override(json& config, const std::string& path, const std::string& value) {
  if (path.empty()) throw Error(ErrorCode::OverridePathInvalid, "empty override path");
  json* node = &config;
  std::stringstream ss(path);
  std::string key;
  while (std::getline(ss, key, '.')) {
    if (key.empty()) throw Error(ErrorCode::OverridePathInvalid, "empty segment in '" + path + "'");
    if (node->is_object()) {
      if (!node->contains(key)) throw Error(ErrorCode::OverridePathInvalid, "no key '" + key + "' in '" + path + "'");
      node = &(*node)[key];
    } else if (node->is_array()) {
      std::size_t idx = 0, used = 0;
      try {
        idx = std::stoul(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size() || idx >= node->size()) {
        throw Error(ErrorCode::OverridePathInvalid, "bad index '" + key + "' in '" + path + "'");
      }
      node = &(*node)[idx];
    } else {
      throw Error(ErrorCode::OverridePathInvalid, "'" + path + "' descends into a scalar");
    }
  }
  json parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(value) : parsed;
}

Overrides parse_overrides(const std::vector<std::string>& assignments) {
  Overrides out;
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::OverridePathInvalid, "override '" + a + "' is not key=value");
    }
    out.emplace_back(a.substr(0, eq), a.substr(eq + 1));
  }
  return out;
}

json emit_plotdata(const RunReport& report, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir + ": " + ec.message());
  json entries = json::array();
  for (const auto& e : report.experiments) {
    for (const auto& [label, table] : e.tables) {
      const std::string file = e.name + "__" + label + ".csv";
      std::ostringstream os;
      os.imbue(std::locale::classic());
      os.precision(17);
      for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
      os << '\n';
      for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
        os << '\n';
      }
      write_text((std::filesystem::path(dir) / file).string(), os.str());
      entries.push_back({{"experiment", e.name},
                         {"table", label},
                         {"file", file},
                         {"columns", table.columns},
                         {"rows", table.rows.size()}});
    }
  }
  json manifest = {{"scenario", report.scenario}, {"entries", entries}};
  write_text((std::filesystem::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  return manifest;
}

RunReport run_scenario(const std::string& name, const Overrides& overrides, const std::string& out_dir) {
  const Scenario& s = find_scenario(name);
  json config = s.config;
  for (const auto& [path, value] : overrides) apply_override(config, path, value);
  if (config.contains("spec")) spec_from_json(config["spec"]);

  std::string dir;
  if (!out_dir.empty()) {
    dir = (std::filesystem::path(out_dir) / name).string();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir + ": " + ec.message());
  }
  RunReport report;
  report.scenario = name;
  report.environment = {{"config", config}, {"anchor", s.anchor}, {"library", "mstate 0.1.0"}};
  report.experiments = s.run(config, dir);
  if (!dir.empty()) {
    emit_plotdata(report, dir);
    report.artifacts["manifest"] = (std::filesystem::path(dir) / "manifest.json").string();
    const std::string rp = (std::filesystem::path(dir) / "report.json").string();
    report.artifacts["report"] = rp;
    write_text(rp, report.to_json().dump(2) + "\n");
  }
  return report;
}

std::vector<RunReport> run_scenarios(const std::vector<std::string>& names, const Overrides& overrides,
                                     const std::string& out_dir, int workers) {
  for (const auto& n : names) find_scenario(n);
  if (workers <= 0) {
    const char* env = std::getenv("MSTATE_WORKERS");
    workers = env ? std::atoi(env) : 0;
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  workers = std::min<int>(workers, static_cast<int>(names.size()));
  std::vector<RunReport> reports(names.size());
  std::vector<std::exception_ptr> errors(names.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < names.size(); i = next++) {
      try {
        reports[i] = run_scenario(names[i], overrides, out_dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

json validate_config(const json& config) {
  if (config.is_object() && config.contains("scenario")) {
    const std::string name = config["scenario"].get<std::string>();
    json c = find_scenario(name).config;
    int applied = 0;
    if (config.contains("overrides")) {
      for (const auto& [path, value] : config["overrides"].items()) {
        apply_override(c, path, value.dump());
        ++applied;
      }
    }
    if (c.contains("spec")) spec_from_json(c["spec"]);
    return {{"kind", "scenario"}, {"scenario", name}, {"overrides", applied}, {"valid", true}};
  }
  const ProblemSpec spec = spec_from_json(config);
  return {{"kind", "problem_spec"},
          {"mode", to_string(spec.mode)},
          {"ambient_dim", spec.ambient_dim},
          {"channels", spec.channels},
          {"valid", true}};
}

}  // namespace mstate

// Runs the registered scenarios and prints one pass/fail line per acceptance
// criterion. Exits 0 once every criterion has been reported; --strict makes
// any failing criterion a non-zero exit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "mstate/errors.hpp"
#include "mstate/scenarios.hpp"

using namespace mstate;
using json = nlohmann::json;

namespace {

struct Timed {
  RunReport report;
  double seconds = 0.0;
  std::string error;
};

std::map<std::string, Timed> g_runs;
std::string g_out;

const Timed& run(const std::string& name) {
  auto it = g_runs.find(name);
  if (it != g_runs.end()) return it->second;
  Timed t;
  const auto start = std::chrono::steady_clock::now();
  try {
    t.report = run_scenario(name, {}, g_out);
  } catch (const Error& e) {
    t.error = e.what();
  }
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return g_runs.emplace(name, std::move(t)).first->second;
}

const ExperimentResult* experiment(const Timed& t, const std::string& name) { return t.report.find(name); }

bool is_pass(const ExperimentResult* e) { return e && e->verdict == Verdict::Pass; }

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

int g_failed = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

bool missing(int id, const Timed& t, std::initializer_list<const char*> names) {
  if (!t.error.empty()) {
    report(id, false, "scenario error: " + t.error);
    return true;
  }
  for (const char* n : names) {
    if (!experiment(t, n)) {
      report(id, false, std::string("experiment missing: ") + n);
      return true;
    }
  }
  return false;
}

std::string runtime(double s, double limit) { return "runtime " + num(s) + " s (limit " + num(limit) + " s)"; }

void criterion1() {
  const Timed& t = run("free-two-channel-mourre");
  if (missing(1, t, {"mourre"})) return;
  const json& d = experiment(t, "mourre")->data;
  const double rmin = d["rayleigh_min"].get<double>();
  const int neg = d["negative_modes"].get<int>();
  const bool ok = rmin >= 0.8 - 0.05 && neg == 0 && t.seconds < 120.0;
  report(1, ok, "rayleigh_min " + num(rmin) + " (>= 0.75), negative modes " + std::to_string(neg) + ", " +
                    runtime(t.seconds, 120));
}

void criterion2() {
  const Timed& t = run("free-two-channel-mourre");
  if (missing(2, t, {"commutator_identity"})) return;
  const ExperimentResult* e = experiment(t, "commutator_identity");
  const json& err = e->data["errors"];
  std::string detail = "errors";
  for (const auto& v : err) detail += " " + num(v.get<double>());
  if (!e->reason.empty()) detail += ", " + e->reason;
  // the commutator check shares its scenario with criterion 1; its own cost is a small part
  report(2, is_pass(e) && t.seconds < 120.0, detail + " (<= 5h, shrinking), " + runtime(t.seconds, 120));
}

void criterion3() {
  const Timed& t = run("manybody-two-line-thresholds");
  if (missing(3, t, {"thresholds", "d_lambda"})) return;
  const json& th = experiment(t, "thresholds")->data;
  const json& dl = experiment(t, "d_lambda")->data;
  const double diff = th["max_difference"].get<double>();
  const double d = dl["d"].get<double>();
  const double sigma = dl["sigma"].get<double>();
  const bool ok = diff <= 1e-6 && std::abs(d - 0.5) <= 1e-9 && sigma < 0.0 && t.seconds < 120.0;
  report(3, ok, "recursive vs brute force " + num(diff) + ", d(1.5) " + num(d) + ", inf T " + num(sigma) + ", " +
                    runtime(t.seconds, 120));
}

void criterion4() {
  const Timed& t = run("decaying-mourre");
  if (missing(4, t, {"mourre"})) return;
  const json& d = experiment(t, "mourre")->data;
  const bool ok = !d["pure_bound"].get<bool>() && d["mourre_compatible"].get<bool>() && d["stable"].get<bool>() &&
                  d["localized"].get<bool>() && t.seconds < 300.0;
  report(4, ok, "verdict '" + d["verdict"].get<std::string>() + "', negative modes " +
                    std::to_string(d["negative_modes"].get<int>()) + ", " + runtime(t.seconds, 300));
}

void criterion5() {
  const Timed& t = run("homogeneous-2d-mourre");
  if (missing(5, t, {"gradient_condition", "mourre"})) return;
  const json& g = experiment(t, "gradient_condition")->data;
  const json& m = experiment(t, "mourre")->data;
  const double margin = g["min_margin"].get<double>();
  const double gamma0 = m["gamma0"].get<double>();
  const bool ok = margin > 0.0 && m["mourre_compatible"].get<bool>() && gamma0 > 0.0 && t.seconds < 1800.0;
  report(5, ok, "min margin " + num(margin) + ", beta " + num(m["beta"].get<double>()) + ", verdict '" +
                    m["verdict"].get<std::string>() + "', gamma0 " + num(gamma0) + ", " + runtime(t.seconds, 1800));
}

void criterion6() {
  const Timed& t = run("manybody-minimal-velocity");
  if (missing(6, t, {"minimal_velocity"})) return;
  const ExperimentResult* e = experiment(t, "minimal_velocity");
  report(6, is_pass(e) && t.seconds < 600.0,
         to_string(e->verdict) + (e->reason.empty() ? "" : ": " + e->reason) + ", " + runtime(t.seconds, 600));
}

void criterion7() {
  const Timed& t = run("manybody-minimal-velocity");
  if (missing(7, t, {"high_velocity"})) return;
  const ExperimentResult* e = experiment(t, "high_velocity");
  report(7, is_pass(e) && t.seconds < 600.0,
         to_string(e->verdict) + (e->reason.empty() ? "" : ": " + e->reason) + ", lambda'' " +
             num(e->data["lambda_second"].get<double>()));
}

void criterion8() {
  const Timed& t = run("remark1-channel-decay");
  if (missing(8, t, {"channel_decay", "control_uncoupled"})) return;
  const ExperimentResult* c = experiment(t, "channel_decay");
  const ExperimentResult* u = experiment(t, "control_uncoupled");
  const double slope = c->data["series"]["fit"]["slope"].get<double>();
  const double ctrl = u->data["max_population"].get<double>();
  const bool ok = is_pass(c) && slope <= -0.8 && is_pass(u) && ctrl < 1e-8 && t.seconds < 600.0;
  report(8, ok, "slope " + num(slope) + " (<= -0.8), uncoupled population " + num(ctrl) + ", " +
                    runtime(t.seconds, 600));
}

void criterion9() {
  const Timed& t = run("essential-spectrum-appendix");
  if (missing(9, t, {"sigma_ess", "weyl_sequence"})) return;
  const json& s = experiment(t, "sigma_ess")->data;
  const json& w = experiment(t, "weyl_sequence")->data;
  const double diff = s["difference"].get<double>();
  const double ratio = w["min_ratio"].get<double>();
  const bool ok = diff <= 0.15 && ratio >= 1.7 && t.seconds < 900.0;
  report(9, ok, "onset difference " + num(diff) + " (<= 0.15), Weyl ratio " + num(ratio) + " (>= 1.7), " +
                    runtime(t.seconds, 900));
}

void criterion10() {
  const Timed& t = run("graf-field-check");
  if (missing(10, t, {"graf"})) return;
  const ExperimentResult* e = experiment(t, "graf");
  const json& d = e->data;
  const bool ok = is_pass(e) && d["samples"].get<int>() >= 10000 && d["min_hessian_eigenvalue"].get<double>() >= -1e-8 &&
                  d["delta"].get<double>() > 0.0 && t.seconds < 60.0;
  report(10, ok, "C1 " + num(d["C1"].get<double>()) + ", C2 " + num(d["C2"].get<double>()) + ", min Hessian " +
                     num(d["min_hessian_eigenvalue"].get<double>()) + ", delta " + num(d["delta"].get<double>()) +
                     ", " + runtime(t.seconds, 60));
}

void criterion11() {
  bool ok = true;
  std::string detail;
  for (const char* s : {"manybody-minimal-velocity", "remark1-channel-decay", "low-high-velocity"}) {
    const Timed& t = run(s);
    const ExperimentResult* e = t.error.empty() ? experiment(t, "propagator_hygiene") : nullptr;
    if (!e) {
      ok = false;
      detail += std::string(s) + " missing; ";
      continue;
    }
    const json& d = e->data;
    const bool good = is_pass(e) && d["norm_drift"].get<double>() <= 1e-8 && d["energy_drift"].get<double>() <= 1e-8 &&
                      d["time_reversal_error"].get<double>() <= 2.0 * d["tol"].get<double>();
    ok = ok && good;
    detail += std::string(s) + " norm " + num(d["norm_drift"].get<double>()) + " energy " +
              num(d["energy_drift"].get<double>()) + " reversal " + num(d["time_reversal_error"].get<double>()) +
              "; ";
  }
  report(11, ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  g_out = (std::filesystem::current_path() / "acceptance_runs").string();
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      strict = true;
    } else if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
      g_out = argv[++i];
    }
  }
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  criterion11();
  std::printf("%d of 11 criteria passed\n", 11 - g_failed);
  return strict && g_failed > 0 ? 1 : 0;
}

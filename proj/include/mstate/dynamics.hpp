#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mstate/spectral.hpp"

namespace mstate {

struct PropagationOptions {
  double tol = 1e-10;             // Chebyshev truncation per substep
  double max_phase = 400.0;       // substep limit on dt * spectral half width
  double guard_fraction = 0.9;    // outer shell: max_k |x_k| > guard_fraction * L
  double guard_threshold = 1e-6;  // allowed shell mass
};

/// Observables of e^{-itP} psi0 at the sampled times. Densities are summed
/// over channels and stored per time so that region masses can be evaluated
/// afterwards for any velocity.
struct PropagationTrace {
  Grid grid{1, 1.0, 4};
  int channels = 1;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> densities;
  std::vector<std::vector<double>> channel_populations;  // [time][channel], squared norms
  std::vector<double> boundary_mass;
  std::vector<double> norm;
  std::vector<double> energy;
  bool truncated = false;  // stopped at a boundary breach
  double breach_time = 0.0;
  CVec final_state;

  double max_norm_drift() const;
  double max_energy_drift() const;
  /// Throws BoundaryBreach if the run was truncated.
  void require_guard() const;
  nlohmann::json summary() const;
};

/// Chebyshev-Bessel expansion of exp(-i tau P) applied to u.
class ChebyshevPropagator {
 public:
  ChebyshevPropagator(const DiscreteOperator& P, double tol = 1e-10, double max_phase = 400.0);
  CVec step(const CVec& u, double dt) const;
  double spectral_center() const { return center_; }
  double spectral_half_width() const { return scale_; }

 private:
  CVec expand(const CVec& u, double tau) const;
  const DiscreteOperator& P_;
  double tol_, max_phase_;
  double center_ = 0.0, scale_ = 1.0;
};

PropagationTrace propagate(const DiscreteOperator& P, const Grid& grid, const DiscreteState& psi0,
                           const std::vector<double>& times, const PropagationOptions& options = {});

/// || e^{+iTP} e^{-iTP} psi0 - psi0 ||.
double time_reversal_error(const DiscreteOperator& P, const DiscreteState& psi0, double T,
                           const PropagationOptions& options = {});

struct PreparedState {
  DiscreteState state;
  double window_mass = 0.0;    // ||E_P(supp f) psi||^2 after normalization
  double filtered_norm = 0.0;  // ||f(P) <x>^{-s'} seed|| before normalization
  int filter_rank = 0;
};

/// <x>^{-s'} seed on the grid, channel by channel.
CVec weighted_seed(const Grid& grid, const DiscreteState& seed, double s_prime);

/// Normalized f(P) <x>^{-s'} seed. Throws EmptyFilter if the filter kills it.
PreparedState prepare_state(const DiscreteOperator& P, const Grid& grid, const SmoothBump& f, double s_prime,
                            const DiscreteState& seed, FilterMethod method = FilterMethod::Spectral,
                            const EigenOptions& options = {});

struct DecayFit {
  double t1 = 0.0, t2 = 0.0;
  int points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_ci = 0.0;  // 95% half width
  double s_target = 1.0;
  double tolerance = 0.15;
  bool below_floor = false;  // series under the floor throughout
  bool passed = false;

  nlohmann::json to_json() const;
};

/// Least-squares fit of log y against log t on [t1, t2]. Passes iff
/// slope <= -s_target + tolerance, or every value is below `floor`.
/// Throws WindowTooShort unless t2 > 2 t1 and at least 8 samples fall inside.
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& values, double t1, double t2,
                   double s_target, double tolerance = 0.15, double floor = 0.0);

struct DecaySeries {
  std::string observable;
  double parameter = 0.0;  // lambda', lambda'', region speed or channel
  std::vector<double> times;
  std::vector<double> values;
  DecayFit fit;

  nlohmann::json to_json() const;
};

struct FitWindow {
  double t1 = 5.0;
  double t2 = 25.0;
  double s_target = 1.0;
  double tolerance = 0.15;
  double floor = 0.0;
};

/// ||1{|x| < sqrt(lambda') t} psi(t)||.
DecaySeries low_velocity_mass(const PropagationTrace& trace, double lambda_prime, const FitWindow& window);
/// ||1{|x| > sqrt(lambda'') t} psi(t)||.
DecaySeries high_velocity_mass(const PropagationTrace& trace, double lambda_second, const FitWindow& window);
/// ||1{|x| < 2 sqrt(d - eps) t} psi(t)||; throws GapNonpositive if d <= eps.
DecaySeries minimal_velocity_manybody(const PropagationTrace& trace, double d, double eps, const FitWindow& window);
/// ||E_jj psi(t)||.
DecaySeries channel_population(const PropagationTrace& trace, int j, const FitWindow& window);

/// Largest lambda' among the candidates whose low-velocity fit passes (0 if none).
double lambda_prime_scan(const PropagationTrace& trace, const std::vector<double>& candidates,
                         const FitWindow& window);

/// Smooth monotone step: 1 for x < -2 eps, 0 for x > -eps.
class SmoothStep {
 public:
  explicit SmoothStep(double eps);
  double operator()(double x) const;
  double derivative(double x) const;
  double eps() const { return eps_; }

 private:
  double eps_;
};

SmoothStep smooth_step(double eps);

/// ||chi(x^2/t^2 - lambda') psi(t)||, the smoothed low-velocity observable.
DecaySeries smooth_low_velocity_mass(const PropagationTrace& trace, double lambda_prime, double eps,
                                     const FitWindow& window);

/// Sum of the density over grid points selected by region(x, t) at sample i.
double region_mass(const PropagationTrace& trace, std::size_t i,
                   const std::function<bool(const Eigen::VectorXd&, double)>& region);

/// CSV: t, region_mass_low, region_mass_high, channel_pop_1..m, boundary_mass, norm.
void write_trace_csv(const PropagationTrace& trace, double lambda_prime, double lambda_second,
                     const std::string& path);

}  // namespace mstate

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mstate/eigensolver.hpp"
#include "mstate/smooth.hpp"

namespace mstate {

/// I = (center - half_width, center + half_width).
struct SpectralWindow {
  double center = 0.0;
  double half_width = 0.1;

  SpectralWindow() = default;
  SpectralWindow(double c, double hw);
  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
};

/// Mass fraction of u inside |x| <= fraction * L, summed over channels.
double localization(const Grid& grid, const CVec& u, double fraction = 0.25);

struct WindowProjection {
  EigenPairs basis;  // orthonormal eigenvectors with eigenvalue in I
  int rank() const { return basis.size(); }
  Eigen::MatrixXcd projector() const { return basis.vectors * basis.vectors.adjoint(); }
  CVec apply(const CVec& u) const { return basis.vectors * (basis.vectors.adjoint() * u); }
};

WindowProjection window_projection(const DiscreteOperator& P, const SpectralWindow& window,
                                   const EigenOptions& options = {});

enum class FilterMethod { Spectral, Chebyshev };

/// f(P) for a plateau bump f, applied matrix-free.
class SpectralFilter {
 public:
  CVec apply(const CVec& u) const;
  FilterMethod method() const { return method_; }
  int chebyshev_degree() const { return static_cast<int>(coefficients_.size()) - 1; }
  const EigenPairs& eigenpairs() const { return pairs_; }

 private:
  friend SpectralFilter smooth_filter(const DiscreteOperator&, const SmoothBump&, FilterMethod, const EigenOptions&);
  FilterMethod method_ = FilterMethod::Spectral;
  const DiscreteOperator* P_ = nullptr;
  EigenPairs pairs_;
  Eigen::VectorXd weights_;
  std::vector<double> coefficients_;
  double center_ = 0.0, scale_ = 1.0;
};

/// Spectral path: eigenpairs of P inside supp f. Chebyshev path: expansion on
/// the Gershgorin interval, degree doubled until two successive degrees agree
/// to 1e-8 on a probe vector. P must outlive the returned filter.
SpectralFilter smooth_filter(const DiscreteOperator& P, const SmoothBump& f,
                             FilterMethod method = FilterMethod::Spectral, const EigenOptions& options = {});

struct MourreOptions {
  double tol = 1e-9;
  double localization_radius = 0.25;  // fraction of L
  double localized_threshold = 0.9;
  double nonlocalized_threshold = 0.5;
  EigenOptions eigen;
};

/// One box of the ladder.
struct MourreRung {
  double half_width = 0.0;
  int points_per_axis = 0;
  int rank = 0;
  double rayleigh_min = 0.0;
  int negative_modes = 0;
  std::vector<double> negative_values;  // eigenvalues of E C E below gamma - tol
  std::vector<double> localization;     // per negative mode
  // min eigenvalue over modes with localization below the non-localized threshold
  std::optional<double> gamma_nonlocal;
  double commutator_defect = 0.0;
};

struct MourreReport {
  SpectralWindow window;
  double gamma_target = 0.0;
  double tol = 0.0;
  std::vector<MourreRung> rungs;
  bool pure_bound = false;         // no negative modes on any rung
  bool stable = false;             // equal counts on the top two rungs
  bool localized = false;          // every negative mode localized
  bool mourre_compatible = false;  // stable && localized
  std::string verdict;

  const MourreRung& top() const { return rungs.back(); }
  double rayleigh_min() const { return top().rayleigh_min; }
  int negative_modes() const { return top().negative_modes; }
  nlohmann::json to_json() const;
};

/// Builds (P, commutator form) on a grid.
using MourreBuilder = std::function<std::pair<DiscreteOperator, DiscreteOperator>(const Grid&)>;

MourreRung mourre_rung(const DiscreteOperator& P, const DiscreteOperator& form, const Grid& grid,
                       const SpectralWindow& window, double gamma_target, const MourreOptions& options = {});

/// Restricted form E C E on Ran E_P(I) for every box of the ladder (ordered
/// from small to large) and the certification verdict.
MourreReport mourre_report(const MourreBuilder& builder, const std::vector<Grid>& ladder,
                           const SpectralWindow& window, double gamma_target, const MourreOptions& options = {});

struct Threshold {
  double value = 0.0;
  std::string provenance;
};

struct ThresholdSet {
  std::vector<Threshold> values;  // ascending
  double sigma = 0.0;             // inf of the set

  std::vector<double> energies() const;
  nlohmann::json to_json() const;
};

struct ThresholdOptions {
  double half_width_1d = 40.0;
  int points_1d = 1024;
  double half_width_2d = 20.0;
  int points_2d = 96;
  double margin = 1e-9;  // eigenvalues must lie this far below the subsystem onset
  EigenOptions eigen;
};

/// T^a: eigenvalues of every strict intermediate subsystem below its own
/// onset, computed recursively, together with the channel constants.
ThresholdSet thresholds(const ProblemSpec& spec, int element, const ThresholdOptions& options = {});

/// d(lambda) = min over thresholds tau <= lambda of lambda - tau.
double d_lambda(const ThresholdSet& T, double lambda);

struct SigmaEssEstimate {
  double analytic = 0.0;
  std::vector<double> onsets;  // per ladder rung
  std::vector<double> half_widths;
  double difference = 0.0;  // |onset(top) - analytic|
  nlohmann::json to_json() const;
};

/// Single-channel spec of channel j (no couplings).
ProblemSpec channel_spec(const ProblemSpec& spec, int j);

SigmaEssEstimate sigma_ess_bottom(const ProblemSpec& spec, const std::vector<Grid>& ladder, int j,
                                  const MourreOptions& options = {});

/// Direction minimizing V~_j on the circle.
Eigen::Vector2d minimizing_direction(const ProblemSpec& spec, int j);

/// ||(P_j - lambda) u^k|| / ||u^k|| for the Weyl state
/// u^k = exp(i sqrt(lambda - Sigma_j) x.omega0) phi((x - k^2 omega0) / k).
double weyl_residual(const ProblemSpec& spec, const Grid& grid, int j, double lambda, double k);

struct EigencountReport {
  std::vector<int> counts;  // localized eigenvectors in I per rung
  bool stable = false;
  nlohmann::json to_json() const;
};

using OperatorBuilder = std::function<DiscreteOperator(const Grid&)>;

EigencountReport eigencount_window(const OperatorBuilder& builder, const std::vector<Grid>& ladder,
                                   const SpectralWindow& window, const MourreOptions& options = {});

}  // namespace mstate

#pragma once

#include <string>

#include "json.hpp"
#include "mstate/model.hpp"

namespace mstate {

// Preset library shared by the JSON loader and the built-in scenarios.

/// strength * <y - center>^{-rho}
ScalarField coulomb_like(double strength, double rho, const Point& center);
/// strength * exp(-|y - center|^2 / width^2)
ScalarField gaussian(double strength, double width, const Point& center);
ScalarField constant_field(double value, int dim);
/// offset + amplitude * cos(theta - phase)^power
AngularProfile cosine_profile(double offset, double amplitude, int power, double phase);
AngularProfile constant_profile(double value);
/// direction * f(y)
VectorField directional(const ScalarField& f, const Point& direction);

/// f(C^T x) with gradient C grad f(C^T x).
ScalarField compose(const ScalarField& f, const Eigen::MatrixXd& coordinates);

/// Builds and validates a ProblemSpec. Channel indices in the JSON are
/// 1-based. Throws SpecInvalid on unknown keys, unknown presets or bad values.
ProblemSpec spec_from_json(const nlohmann::json& config);
ProblemSpec load_spec(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

}  // namespace mstate

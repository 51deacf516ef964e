#pragma once

// C-infinity building blocks: monotone steps, plateau bumps, the interior
// radial switch for degree-zero potentials and the mollified |z| used by the
// Graf function.

namespace mstate {

/// Value and the first two derivatives of a scalar function of one variable.
struct Jet1 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Monotone C-infinity step: 0 for t <= 0, 1 for t >= 1.
Jet1 unit_step(double t);

/// Radial switch: 0 for r <= 1/4, 1 for r >= 1/2.
Jet1 radial_blend(double r);

/// Plateau bump: 1 for |u - center| <= plateau, 0 for |u - center| >= support.
class SmoothBump {
 public:
  SmoothBump(double center, double plateau, double support);

  double operator()(double u) const;
  double derivative(double u) const;

  double center() const { return center_; }
  double plateau() const { return plateau_; }
  double support() const { return support_; }
  double lower() const { return center_ - support_; }
  double upper() const { return center_ + support_; }

 private:
  double center_;
  double plateau_;
  double support_;
};

/// |z| convolved with a symmetric C-infinity density supported in [-s, s].
/// Equals |z| for |z| >= s, convex, with second derivative 2*density.
class MollifiedAbs {
 public:
  explicit MollifiedAbs(double smoothing);
  Jet1 operator()(double z) const;
  double smoothing() const { return s_; }

 private:
  double s_;
};

}  // namespace mstate

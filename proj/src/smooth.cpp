#include "mstate/smooth.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace mstate {

namespace {

// psi(t) = exp(-1/t) for t > 0 together with its first two derivatives.
Jet1 psi(double t) {
  if (t <= 0.0) return {};
  const double e = std::exp(-1.0 / t);
  const double t2 = t * t;
  const double d1 = e / t2;
  const double d2 = e * (1.0 - 2.0 * t) / (t2 * t2);
  return {e, d1, d2};
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGlWeights = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

template <class F>
double integrate(F&& f, double a, double b, int panels) {
  double total = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * w;
    const double half = 0.5 * w;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      total += kGlWeights[i] * half * (f(mid - half * kGlNodes[i]) + f(mid + half * kGlNodes[i]));
    }
  }
  return total;
}

}  // namespace

Jet1 unit_step(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  const Jet1 a = psi(t);
  const Jet1 b = psi(1.0 - t);
  // s = a / (a + b) with b' = -psi'(1-t), b'' = psi''(1-t).
  const double den = a.value + b.value;
  const double num_d1 = a.d1;
  const double den_d1 = a.d1 - b.d1;
  const double num_d2 = a.d2;
  const double den_d2 = a.d2 + b.d2;
  const double s = a.value / den;
  const double s1 = (num_d1 - s * den_d1) / den;
  const double s2 = (num_d2 - 2.0 * s1 * den_d1 - s * den_d2) / den;
  return {s, s1, s2};
}

Jet1 radial_blend(double r) {
  const Jet1 s = unit_step((r - 0.25) / 0.25);
  return {s.value, s.d1 * 4.0, s.d2 * 16.0};
}

SmoothBump::SmoothBump(double center, double plateau, double support)
    : center_(center), plateau_(plateau), support_(support) {
  if (!(plateau >= 0.0) || !(support > plateau)) {
    throw std::invalid_argument("SmoothBump requires 0 <= plateau < support");
  }
}

double SmoothBump::operator()(double u) const {
  const double d = std::abs(u - center_);
  return 1.0 - unit_step((d - plateau_) / (support_ - plateau_)).value;
}

double SmoothBump::derivative(double u) const {
  const double d = std::abs(u - center_);
  const double sign = u >= center_ ? 1.0 : -1.0;
  return -sign * unit_step((d - plateau_) / (support_ - plateau_)).d1 / (support_ - plateau_);
}

MollifiedAbs::MollifiedAbs(double smoothing) : s_(smoothing) {
  if (!(smoothing > 0.0)) throw std::invalid_argument("MollifiedAbs requires smoothing > 0");
}

Jet1 MollifiedAbs::operator()(double z) const {
  const double az = std::abs(z);
  if (az >= s_) return {az, z > 0 ? 1.0 : -1.0, 0.0};
  // m'(z) = 2 S(z) - 1 with S the CDF of the density on [-s, s].
  const auto slope = [this](double w) { return 2.0 * unit_step((w + s_) / (2.0 * s_)).value - 1.0; };
  const Jet1 S = unit_step((z + s_) / (2.0 * s_));
  // m(z) = s - int_{|z|}^{s} m'(w) dw (m is even).
  const double value = s_ - integrate(slope, az, s_, 4);
  return {value, 2.0 * S.value - 1.0, 2.0 * S.d1 / (2.0 * s_)};
}

}  // namespace mstate

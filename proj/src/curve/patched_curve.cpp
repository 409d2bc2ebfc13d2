#include "curve/patched_curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cascsim::curve {

namespace {

constexpr double kTiny = 1e-15;

} // namespace

PatchedCurve PatchedCurve::make(Kind kind, double lower, double upper,
                                double slope, double jlo, double delta) {
  PatchedCurve c;
  c.kind_ = kind;
  c.lower_ = lower;
  c.upper_ = upper;
  c.slope_ = slope;
  c.delta_ = delta;
  c.jlo_ = jlo;
  c.jhi_ = jlo - (upper - lower) / slope;
  c.u1_ = c.jlo_ + delta;
  c.u2_ = c.jlo_ - delta;
  c.u3_ = c.jhi_ + delta;
  c.u4_ = c.jhi_ - delta;
  return c;
}

PatchedCurve build_step_curve(double threshold, double beta, double delta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("step curve: beta must be positive");
  if (!(delta > 0.0) || !(delta < 0.5 / beta))
    throw std::invalid_argument("step curve: delta must lie in (0, 1/(2*beta))");
  return PatchedCurve::make(PatchedCurve::Kind::step, 0.0, 1.0, beta, threshold, delta);
}

PatchedCurve build_clamp_curve(double gain, double lo, double hi, double delta) {
  if (!(gain >= 0.0))
    throw std::invalid_argument("clamp curve: gain must be non-negative");
  if (!(lo <= 0.0) || !(hi >= 0.0))
    throw std::invalid_argument("clamp curve: need lo <= 0 <= hi");
  if (gain < kTiny || hi - lo < kTiny) {
    PatchedCurve c;
    c.kind_ = PatchedCurve::Kind::clamp;
    c.flat_ = true;
    c.lower_ = c.upper_ = 0.0;
    return c;
  }
  const double span = (hi - lo) / gain;
  if (!(delta > 0.0) || !(delta < 0.5 * span))
    throw std::invalid_argument("clamp curve: delta must lie in (0, (hi-lo)/(2*gain))");
  // Ramp -gain*u crosses lo at u = -lo/gain.
  return PatchedCurve::make(PatchedCurve::Kind::clamp, lo, hi, gain, -lo / gain, delta);
}

double default_step_delta(double beta) {
  return std::min(0.05 / beta, 0.2 * (0.5 / beta));
}

double default_clamp_delta(double gain, double lo, double hi) {
  const double span = (hi - lo) / gain;
  return std::min(0.05 * span, 0.2 * (0.5 * span));
}

CurveEval PatchedCurve::eval(double u) const {
  if (flat_)
    return {0.0, 0.0};
  CurveEval r;
  if (u >= u1_) {
    r = {lower_, 0.0};
  } else if (u >= u2_) {
    // Patch at the lower-plateau junction: value lower + slope*delta/4 and
    // slope -slope/2 at the junction itself.
    const double s = u - jlo_;
    const double a = slope_ / (4.0 * delta_);
    r.value = (a * s - 0.5 * slope_) * s + (lower_ + 0.25 * slope_ * delta_);
    r.deriv = 2.0 * a * s - 0.5 * slope_;
  } else if (u >= u3_) {
    r.value = lower_ - slope_ * (u - jlo_);
    r.deriv = -slope_;
  } else if (u >= u4_) {
    const double t = u - jhi_;
    const double a = slope_ / (4.0 * delta_);
    r.value = (-a * t - 0.5 * slope_) * t + (upper_ - 0.25 * slope_ * delta_);
    r.deriv = -2.0 * a * t - 0.5 * slope_;
  } else {
    r = {upper_, 0.0};
  }
  // Round-off in the patch arithmetic must not leak outside the plateaus.
  r.value = std::clamp(r.value, lower_, upper_);
  return r;
}

double PatchedCurve::second_derivative(double u) const {
  if (flat_)
    return 0.0;
  const double inner = slope_ / (2.0 * delta_);
  if (u == u1_) return 0.5 * inner;
  if (u == u2_) return 0.5 * inner;
  if (u == u3_) return -0.5 * inner;
  if (u == u4_) return -0.5 * inner;
  if (u > u1_) return 0.0;
  if (u > u2_) return inner;
  if (u > u3_) return 0.0;
  if (u > u4_) return -inner;
  return 0.0;
}

} // namespace cascsim::curve

#ifndef CASCSIM_CURVE_PATCHED_CURVE_HPP
#define CASCSIM_CURVE_PATCHED_CURVE_HPP

namespace cascsim::curve {

// Falling C1 curve made of five pieces over the signal u:
//
//   upper plateau | quadratic patch | linear ramp | quadratic patch | lower plateau
//   (u small)                                                          (u large)
//
// The ramp has slope -slope and meets the lower plateau at junction_lo
// (high-u side) and the upper plateau at junction_hi = junction_lo - span,
// span = (upper - lower) / slope.  Each corner is replaced by a quadratic
// over [junction - delta, junction + delta] that matches value and first
// derivative of both neighbours; with the symmetric half-width that fixes
// the quadratic uniquely (curvature slope/(4*delta), midpoint slope -slope/2).
//
// Two uses:
//   step:  shed fraction alpha(u) in [0,1], u = frequency deviation or bus
//          voltage, threshold = junction_lo.  Ramp piece is exactly
//          -beta*(u - threshold).
//   clamp: generator response dP(df) saturating at [lo, hi]; ramp piece is
//          -gain*df through the origin.
struct CurveEval {
  double value;
  double deriv;
};

class PatchedCurve {
public:
  enum class Kind { step, clamp };

  CurveEval eval(double u) const;

  // Exact inside each piece; at a breakpoint, the mean of the one-sided
  // values (the curve is C1 but not C2 there).
  double second_derivative(double u) const;

  Kind kind() const { return kind_; }
  bool flat() const { return flat_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double slope() const { return slope_; }
  double delta() const { return delta_; }
  // Region boundaries, descending: u1 > u2 > u3 > u4.
  double u1() const { return u1_; }
  double u2() const { return u2_; }
  double u3() const { return u3_; }
  double u4() const { return u4_; }

private:
  friend PatchedCurve build_step_curve(double threshold, double beta, double delta);
  friend PatchedCurve build_clamp_curve(double gain, double lo, double hi, double delta);

  static PatchedCurve make(Kind kind, double lower, double upper, double slope,
                           double jlo, double delta);

  Kind kind_ = Kind::step;
  bool flat_ = false;      // identically zero (degenerate clamp)
  double lower_ = 0.0;
  double upper_ = 1.0;
  double slope_ = 0.0;
  double delta_ = 0.0;
  double jlo_ = 0.0;       // ramp meets lower plateau (high-u junction)
  double jhi_ = 0.0;       // ramp meets upper plateau (low-u junction)
  double u1_ = 0.0, u2_ = 0.0, u3_ = 0.0, u4_ = 0.0;
};

// Shed-fraction curve: 0 for u above threshold, 1 below threshold - 1/beta.
// Requires beta > 0 and 0 < delta < 1/(2*beta).
PatchedCurve build_step_curve(double threshold, double beta, double delta);

// Saturated droop response: -gain*u on the ramp, held at hi for deep
// negative u and at lo for positive u.  Requires lo <= 0 <= hi; gain = 0 or
// an empty [lo, hi] degenerates to the constant-zero curve.
PatchedCurve build_clamp_curve(double gain, double lo, double hi, double delta);

// Default patch half-width for a given ramp slope over a unit span.
double default_step_delta(double beta);
double default_clamp_delta(double gain, double lo, double hi);

} // namespace cascsim::curve

#endif

#include "support/fd_check.hpp"

#include <cmath>
#include <limits>

#include "curve/patched_curve.hpp"
#include "solver/assemble.hpp"

namespace fdcheck {

using cascsim::solver::Layout;

CurveInputs curve_inputs(const Layout& L) {
  CurveInputs c;
  auto push = [](std::vector<double>& dst,
                 const cascsim::curve::PatchedCurve& k) {
    if (k.flat()) return;
    dst.insert(dst.end(), {k.u1(), k.u2(), k.u3(), k.u4()});
  };
  for (const auto& seg : L.segments()) {
    if (seg.pinned) continue;
    if (seg.scheme == cascsim::net::ShedScheme::ufls)
      push(c.df_breaks, seg.curve);
    else
      push(c.vmag_breaks[seg.lb], seg.curve);
  }
  for (const auto& pv : L.pv_gens()) push(c.df_breaks, pv.clamp);
  return c;
}

namespace {
bool clear_of(const std::vector<double>& breaks, double u, double margin) {
  for (double b : breaks)
    if (std::abs(u - b) < margin) return false;
  return true;
}
}  // namespace

bool state_clear(const Layout& L, const CurveInputs& c,
                 const Eigen::VectorXd& z, double margin) {
  if (!clear_of(c.df_breaks, z[L.DF()], margin)) return false;
  for (const auto& [lb, breaks] : c.vmag_breaks) {
    double vm = std::hypot(z[L.VR(lb)], z[L.VI(lb)]);
    if (!clear_of(breaks, vm, margin)) return false;
  }
  return true;
}

double fd_matrix_gap(const Layout& L, const Eigen::VectorXd& z) {
  constexpr double kBad = std::numeric_limits<double>::infinity();
  cascsim::solver::Assembly base;
  cascsim::solver::assemble(L, z, true, base);
  if (base.guard_tripped) return kBad;
  Eigen::MatrixXd K = Eigen::MatrixXd(base.K);

  double worst = 0;
  Eigen::VectorXd zp = z, zm = z;
  cascsim::solver::Assembly ap, am;
  for (int j = 0; j < L.n_total(); ++j) {
    double h = 1e-7 * std::max(1.0, std::abs(z[j]));
    zp[j] = z[j] + h;
    zm[j] = z[j] - h;
    cascsim::solver::assemble(L, zp, false, ap);
    cascsim::solver::assemble(L, zm, false, am);
    if (ap.guard_tripped || am.guard_tripped) return kBad;
    Eigen::VectorXd col = (ap.F - am.F) / (2 * h);
    for (int i = 0; i < L.n_total(); ++i) {
      double gap =
          std::abs(col[i] - K(i, j)) / std::max(1.0, std::abs(K(i, j)));
      worst = std::max(worst, gap);
    }
    zp[j] = z[j];
    zm[j] = z[j];
  }
  return worst;
}

Eigen::VectorXd random_state(const Layout& L, std::mt19937& rng, double df_lo,
                             double df_hi) {
  std::uniform_real_distribution<double> dv(-0.08, 0.08);
  std::uniform_real_distribution<double> du(-0.5, 0.5);
  std::uniform_real_distribution<double> da(0.0, 1.0);
  std::uniform_real_distribution<double> ddf(df_lo, df_hi);
  Eigen::VectorXd z = L.initial_state(nullptr);
  for (int i = 0; i < L.n_bus(); ++i) {
    z[L.VR(i)] += dv(rng);
    z[L.VI(i)] += dv(rng);
    z[L.IFR(i)] = 0.3 * du(rng);
    z[L.IFI(i)] = 0.3 * du(rng);
  }
  for (int k = 0; k < L.n_pv(); ++k) {
    z[L.QG(k)] = du(rng);
    z[L.DPG(k)] = du(rng);
  }
  z[L.ISR()] = du(rng);
  z[L.ISI()] = du(rng);
  z[L.DPS()] = du(rng);
  for (int s = 0; s < L.n_var_seg(); ++s) z[L.ALPHA(s)] = da(rng);
  z[L.DF()] = ddf(rng);
  for (int c = 0; c < L.n_constraint(); ++c) z[L.LAMBDA(c)] = du(rng);
  return z;
}

}  // namespace fdcheck

#include "solver/stage1.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "solver/assemble.hpp"

namespace cascsim::solver {

namespace {

// One scale factor damps the whole step so no variable class moves further
// than its cap in a single iteration.
double step_scale(const Layout& L, const Eigen::VectorXd& dz,
                  const SolverOptions& opts) {
  double worst_v = 0;
  for (int i = 0; i < L.n_bus(); ++i) {
    worst_v = std::max(worst_v, std::abs(dz[L.VR(i)]));
    worst_v = std::max(worst_v, std::abs(dz[L.VI(i)]));
  }
  double s = 1.0;
  if (worst_v > opts.v_step_cap) s = std::min(s, opts.v_step_cap / worst_v);
  for (int k = 0; k < L.n_var_seg(); ++k) {
    double da = std::abs(dz[L.ALPHA(k)]);
    if (da > opts.alpha_step_cap) s = std::min(s, opts.alpha_step_cap / da);
  }
  double ddf = std::abs(dz[L.DF()]);
  if (ddf > opts.df_step_cap) s = std::min(s, opts.df_step_cap / ddf);
  return s;
}

// Folds the KCL mismatch of z into the infeasibility current and sets the
// matching multipliers (lambda = 2 I_F), so both the constraint rows and the
// I_F stationarity rows are exactly zero afterwards. Near a loadability fold
// the optimality system is singular at I_F = 0 and Newton stalls; restarted
// from this lifted point it sits in the regime with curvature, where the
// least-norm branch is reachable.
bool absorb_mismatch(const Layout& L, Eigen::VectorXd& z) {
  Assembly A;
  assemble(L, z, false, A);
  if (A.guard_tripped || !A.F.allFinite()) return false;
  for (int i = 0; i < L.n_bus(); ++i) {
    z[L.IFR(i)] += A.F[L.C_KCL_R(i)];
    z[L.IFI(i)] += A.F[L.C_KCL_I(i)];
    z[L.LAMBDA(L.C_KCL_R(i))] = 2 * z[L.IFR(i)];
    z[L.LAMBDA(L.C_KCL_I(i))] = 2 * z[L.IFI(i)];
  }
  return true;
}

}  // namespace

NewtonOutcome newton_solve(const Layout& L, Eigen::VectorXd& z,
                           const SolverOptions& opts) {
  NewtonOutcome o;
  Assembly A;
  for (int iter = 0;; ++iter) {
    assemble(L, z, true, A);
    if (A.guard_tripped) {
      o.iterations = iter;
      o.diagnostic = "voltage magnitude collapsed below guard";
      return o;
    }
    if (!A.F.allFinite()) {
      o.iterations = iter;
      o.diagnostic = "non-finite residual";
      return o;
    }
    o.residual = A.F.lpNorm<Eigen::Infinity>();
    if (o.residual < opts.tol_residual) {
      o.status = SolveStatus::converged;
      o.iterations = iter;
      return o;
    }
    if (iter >= opts.max_iter) {
      o.iterations = iter;
      o.diagnostic = "iteration limit reached";
      return o;
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A.K);
    if (lu.info() != Eigen::Success) {
      o.iterations = iter;
      o.diagnostic = "singular optimality system";
      return o;
    }
    Eigen::VectorXd dz = lu.solve(-A.F);
    if (!dz.allFinite()) {
      o.iterations = iter;
      o.diagnostic = "non-finite step";
      return o;
    }
    z += step_scale(L, dz, opts) * dz;
  }
}

NewtonOutcome homotopy_solve(const net::Network& target,
                             const net::Island& island,
                             const SolverOptions& opts, const PinMap& pins,
                             bool df_pin, Eigen::VectorXd& z) {
  static constexpr double kSchedule[] = {0.25, 0.5, 0.75, 0.9, 1.0};
  static constexpr int kMaxRefinements = 20;

  NewtonOutcome total;
  auto attempt_rung = [&](double eta, Eigen::VectorXd& zt) {
    net::Network scaled = net::scale_sources(target, eta);
    Layout L(scaled, island, opts, pins, df_pin);
    NewtonOutcome n = newton_solve(L, zt, opts);
    total.iterations += n.iterations;
    if (n.status != SolveStatus::converged) {
      zt = z;
      if (absorb_mismatch(L, zt)) {
        NewtonOutcome lifted = newton_solve(L, zt, opts);
        total.iterations += lifted.iterations;
        if (lifted.status == SolveStatus::converged) return lifted;
      }
    }
    return n;
  };

  {
    net::Network zeroed = net::scale_sources(target, 0.0);
    Layout L0(zeroed, island, opts, pins, df_pin);
    z = L0.initial_state(nullptr);
    NewtonOutcome n = newton_solve(L0, z, opts);
    total.iterations += n.iterations;
    if (n.status != SolveStatus::converged) {
      total.diagnostic = "continuation failed at zero loading: " + n.diagnostic;
      total.residual = n.residual;
      return total;
    }
  }

  double eta_ok = 0.0;
  int idx = 0, refinements = 0;
  double attempt = kSchedule[idx];
  while (true) {
    Eigen::VectorXd zt = z;
    NewtonOutcome n = attempt_rung(attempt, zt);
    if (n.status == SolveStatus::converged) {
      eta_ok = attempt;
      z = zt;
      if (attempt >= 1.0) {
        total.status = SolveStatus::converged;
        total.residual = n.residual;
        return total;
      }
      if (attempt == kSchedule[idx]) ++idx;
      attempt = kSchedule[idx];
    } else {
      if (++refinements > kMaxRefinements) {
        total.diagnostic = "continuation stalled at loading fraction " +
                           std::to_string(eta_ok);
        total.residual = n.residual;
        return total;
      }
      attempt = 0.5 * (eta_ok + attempt);
    }
  }
}

namespace {

// Pins every variable discrete segment whose shed fraction sits strictly
// inside the undecided band. Returns whether anything new was pinned.
bool snap_pins(const Layout& L, const Eigen::VectorXd& z,
               const SolverOptions& opts, PinMap& pins) {
  bool any = false;
  for (const auto& seg : L.segments()) {
    if (seg.pinned || !seg.discrete) continue;
    double a = z[L.ALPHA(seg.var)];
    if (a > opts.snap_band && a < 1.0 - opts.snap_band) {
      pins[{seg.load_id, seg.seg_idx}] = a >= opts.snap_threshold ? 1.0 : 0.0;
      any = true;
    }
  }
  return any;
}

void extract(const Layout& L, const Eigen::VectorXd& z,
             const SolverOptions& opts, SolveResult& r) {
  r.delta_f = z[L.DF()];
  r.max_if = 0;
  r.worst_if_bus = -1;
  for (int i = 0; i < L.n_bus(); ++i) {
    int id = L.bus_ids()[i];
    double mag = std::hypot(z[L.IFR(i)], z[L.IFI(i)]);
    r.bus_if[id] = mag;
    r.bus_v[id] = {z[L.VR(i)], z[L.VI(i)]};
    if (mag > r.max_if) {
      r.max_if = mag;
      r.worst_if_bus = id;
    }
  }
  r.feasible = r.status == SolveStatus::converged && r.max_if < opts.feas_tol;
  for (int k = 0; k < L.n_pv(); ++k)
    r.gen_eff[L.pv_gens()[k].id] = {z[L.QG(k)], z[L.DPG(k)]};
  {
    const auto& ref = L.ref_gen();
    double vr = z[L.VR(ref.lb)], vi = z[L.VI(ref.lb)];
    double qs = vi * z[L.ISR()] - vr * z[L.ISI()];
    r.gen_eff[ref.id] = {qs, z[L.DPS()]};
  }
  r.shed_p = 0;
  for (const auto& seg : L.segments()) {
    double a = seg.pinned ? seg.pin_value : z[L.ALPHA(seg.var)];
    r.seg_alpha[{seg.load_id, seg.seg_idx}] = a;
    r.shed_p += a * seg.p0;
  }
}

}  // namespace

SolveResult solve_island(const net::Network& net, const net::Island& island,
                         const SolverOptions& opts, const WarmStart* warm) {
  SolveResult r;
  PinMap pins;
  Layout L(net, island, opts, pins);
  bool df_pin = L.df_pinned();

  Eigen::VectorXd z = L.initial_state(warm);
  NewtonOutcome n = newton_solve(L, z, opts);
  r.iterations += n.iterations;

  if (n.status != SolveStatus::converged && warm) {
    z = L.initial_state(nullptr);
    n = newton_solve(L, z, opts);
    r.iterations += n.iterations;
  }
  if (n.status != SolveStatus::converged) {
    NewtonOutcome h = homotopy_solve(net, island, opts, pins, df_pin, z);
    r.iterations += h.iterations;
    n = h;
  }
  if (n.status != SolveStatus::converged) {
    r.residual = n.residual;
    r.diagnostic = n.diagnostic;
    return r;
  }

  // Snap undecided discrete segments and re-solve until none remain. Each
  // round pins at least one segment, so the loop is bounded.
  int discrete_total = 0;
  for (const auto& seg : L.segments())
    if (seg.discrete) ++discrete_total;
  Layout cur = L;
  for (int round = 0; round < discrete_total; ++round) {
    if (!snap_pins(cur, z, opts, pins)) break;
    Layout next(net, island, opts, pins, df_pin);
    WarmStart ws;
    cur.harvest(z, ws);
    Eigen::VectorXd z2 = next.initial_state(&ws);
    NewtonOutcome sn = newton_solve(next, z2, opts);
    r.iterations += sn.iterations;
    if (sn.status != SolveStatus::converged) {
      r.residual = sn.residual;
      r.diagnostic = "diverged after snapping discrete segments: " +
                     sn.diagnostic;
      return r;
    }
    n = sn;
    cur = next;
    z = std::move(z2);
  }

  r.status = SolveStatus::converged;
  r.residual = n.residual;
  extract(cur, z, opts, r);
  return r;
}

}  // namespace cascsim::solver

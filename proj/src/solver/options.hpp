#ifndef CASCSIM_SOLVER_OPTIONS_HPP
#define CASCSIM_SOLVER_OPTIONS_HPP

namespace cascsim::solver {

struct SolverOptions {
  double tol_residual = 1e-8;   // infinity norm of the full residual
  double feas_tol = 1e-6;       // max per-bus |I_F| accepted as feasible
  int max_iter = 100;

  // Per-iteration step caps; one scale factor damps the whole Newton step.
  double v_step_cap = 0.1;      // p.u. on any voltage component
  double alpha_step_cap = 0.2;
  double df_step_cap = 0.5;     // Hz

  // Discrete shed segments: default ramp slope and the snap rule.
  double discrete_beta = 1000.0;
  double snap_threshold = 0.5;  // alpha at or above goes to 1, below to 0
  double snap_band = 1e-3;      // alpha within (band, 1-band) must be snapped
};

} // namespace cascsim::solver

#endif

#ifndef CASCSIM_SOLVER_STAGE1_HPP
#define CASCSIM_SOLVER_STAGE1_HPP

#include <limits>
#include <map>
#include <string>

#include "solver/layout.hpp"

namespace cascsim::solver {

enum class SolveStatus { converged, diverged };

struct NewtonOutcome {
  SolveStatus status = SolveStatus::diverged;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  std::string diagnostic;
};

// Damped Newton on the optimality system. Mutates z in place; on divergence
// z holds the last iterate.
NewtonOutcome newton_solve(const Layout& L, Eigen::VectorXd& z,
                           const SolverOptions& opts);

// Continuation fallback: solve with all sources (loads, dispatch, dispatch
// limits) scaled to zero, then march the scale back to 1 with warm starts,
// bisecting any step that fails (up to 20 refinements). On success z is a
// solution of the unscaled problem under the same pins and df-pin choice.
NewtonOutcome homotopy_solve(const net::Network& target,
                             const net::Island& island,
                             const SolverOptions& opts, const PinMap& pins,
                             bool df_pin, Eigen::VectorXd& z);

struct SolveResult {
  SolveStatus status = SolveStatus::diverged;
  bool feasible = false;  // converged with max |I_F| under feas_tol
  int iterations = 0;     // cumulative Newton iterations over all phases
  double residual = std::numeric_limits<double>::infinity();
  std::string diagnostic;

  double delta_f = 0;  // Hz
  double max_if = 0;   // worst per-bus infeasibility current magnitude, p.u.
  int worst_if_bus = -1;
  double shed_p = 0;   // island-wide shed real power, p.u.
  std::map<int, double> bus_if;
  std::map<int, std::pair<double, double>> bus_v;      // id -> (VR, VI)
  std::map<int, std::pair<double, double>> gen_eff;    // id -> (QG, dPG)
  std::map<std::pair<int, int>, double> seg_alpha;
};

// Full per-island solve: warm or flat Newton, continuation on failure, then
// snap rounds that fix undecided discrete segments at 0 or 1 and re-solve.
// The island must have a reference generator (throws std::invalid_argument
// otherwise; islands without one never reach the solver).
SolveResult solve_island(const net::Network& net, const net::Island& island,
                         const SolverOptions& opts,
                         const WarmStart* warm = nullptr);

}  // namespace cascsim::solver

#endif

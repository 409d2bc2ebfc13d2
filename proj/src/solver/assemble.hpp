#ifndef CASCSIM_SOLVER_ASSEMBLE_HPP
#define CASCSIM_SOLVER_ASSEMBLE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "solver/layout.hpp"

namespace cascsim::solver {

// First-order optimality system of
//   min ||I_F||^2  subject to  g(X) = 0
// in the variable order z = [primal; lambda]. Residual rows are the
// constraints first, then the stationarity conditions, matching a Newton
// matrix of the block form [J 0; H J^T] with H the constraint curvature
// weighted by the multipliers plus the objective Hessian.
struct Assembly {
  Eigen::VectorXd F;
  Eigen::SparseMatrix<double> K;  // empty unless requested
  bool guard_tripped = false;     // a voltage magnitude collapsed below guard
};

void assemble(const Layout& L, const Eigen::VectorXd& z, bool want_matrix,
              Assembly& out);

}  // namespace cascsim::solver

#endif

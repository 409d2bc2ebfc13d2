#ifndef CASCSIM_TESTS_PF_ORACLE_HPP
#define CASCSIM_TESTS_PF_ORACLE_HPP

#include <complex>
#include <map>
#include <vector>

#include "net/network.hpp"

// Conventional polar Newton-Raphson power flow, written as an independent
// reference: dense Ybus, PV/PQ/slack bus classification, power mismatches,
// finite-difference Jacobian.  Deliberately shares no code with the solver
// under test beyond the parsed Network itself.
namespace pftest {

struct PfResult {
  bool converged = false;
  int iterations = 0;
  std::vector<std::complex<double>> v;  // by bus position
  double slack_p = 0.0;                 // machine output at the slack bus, p.u.
  std::vector<double> qg_bus;           // reactive generation per bus (PV/slack), p.u.
  double loss_p = 0.0;                  // total series + shunt absorption, p.u.
};

// load_scale: optional per-load-id multiplier applied to both p and q
// (models shedding when cross-checking the solver under test).
PfResult solve_pf(const cascsim::net::Network& net,
                  const std::map<int, double>& load_scale = {},
                  double tol = 1e-10, int max_iter = 60);

}  // namespace pftest

#endif

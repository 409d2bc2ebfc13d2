#ifndef CASCSIM_CASCADE_CASCADE_HPP
#define CASCSIM_CASCADE_CASCADE_HPP

#include <map>
#include <string>
#include <vector>

#include "net/network.hpp"
#include "solver/stage1.hpp"

namespace cascsim::cascade {

enum class IslandStatus { secure, collapsed, blacked_out, unresolved };
enum class Outcome { secure, partial_collapse, system_blackout };

std::string to_string(IslandStatus s);
std::string to_string(Outcome o);

struct ViolationRec {
  enum class Kind { branch_overload = 0, gen_voltage = 1 };
  Kind kind;
  int id;           // branch id or generator id
  double observed;  // worst-end apparent power (p.u.) or voltage magnitude
  double limit;     // the plain limit, without the relay deadband
};

struct IslandRecord {
  std::vector<int> buses;
  IslandStatus status = IslandStatus::unresolved;
  bool solved = false;  // converged; delta_f / shed / I_F fields are valid
  double delta_f = 0;
  double shed_mw = 0;
  double max_if = 0;
  int worst_if_bus = -1;
  int iterations = 0;
  std::map<int, double> bus_if;  // p.u., for area aggregation
};

struct StageRecord {
  int stage = 0;
  std::vector<net::Event> trips;  // applied entering this stage
  std::vector<IslandRecord> islands;
  std::vector<ViolationRec> violations;  // trip at the next stage
};

struct CascadeParams {
  solver::SolverOptions solver;
  double relay_deadband = 0.0;  // fractional margin before a limit trips
  int max_stages = 50;
};

struct CascadeReport {
  net::Event event;
  std::vector<StageRecord> stages;
  Outcome outcome = Outcome::secure;
  bool truncated = false;

  bool any_unresolved() const;
};

// Post-solve limit scan over one feasible island: branch apparent-power
// ratings at both ends and generator terminal-voltage trip bands. Violations
// come back ordered by (kind, id).
std::vector<ViolationRec> check_limits(const net::Network& net,
                                       const net::Island& island,
                                       const solver::SolveResult& sol,
                                       double relay_deadband);

// Full quasi-steady-state cascade: apply the initiating event, then
// alternate island solves and limit scans, tripping every violator at once,
// until a stage produces no new violations or max_stages is hit.
CascadeReport run_cascade(const net::Network& base, const net::Event& event,
                          const CascadeParams& params);

}  // namespace cascsim::cascade

#endif

#ifndef CASCSIM_SOLVER_LAYOUT_HPP
#define CASCSIM_SOLVER_LAYOUT_HPP

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "curve/patched_curve.hpp"
#include "net/network.hpp"
#include "solver/options.hpp"

namespace cascsim::solver {

// (load id, segment index) -> fixed alpha value for segments removed from
// the unknown set by the snap rule.
using PinMap = std::map<std::pair<int, int>, double>;

// Previous operating point keyed by device id, so it survives re-islanding
// and device trips between solves.
struct WarmStart {
  std::map<int, std::pair<double, double>> bus_v;    // id -> (VR, VI)
  std::map<int, std::pair<double, double>> gen_qdp;  // id -> (Q_G, dP_G)
  std::map<std::pair<int, int>, double> seg_alpha;
  std::map<int, double> bus_df;  // bus id -> frequency deviation of its island
};

// Index plan for one island's equality-constrained least-squares system.
//
// Unknowns (primal), in order:
//   per bus:           VR, VI            (rectangular voltage)
//   per bus:           IFR, IFI          (infeasibility current, the objective)
//   per non-ref gen:   QG, dPG           (reactive output, droop response)
//   reference gen:     ISR, ISI, dPS     (full current unknowns, droop response)
//   per variable segment: alpha          (shed fraction)
//   island-wide:       df                (frequency deviation, Hz)
// followed by one Lagrange multiplier per constraint.
//
// Constraints, in order:
//   per bus:           KCL real, KCL imag (current mismatch == IF)
//   per non-ref gen:   voltage magnitude setpoint
//   per non-ref gen:   droop response = clamp curve of df
//   reference gen:     linear droop  dPS + gain*df = 0
//   reference gen:     power balance p_set + dPS = Re(V conj(IS)) form
//   per variable segment: alpha = response curve
//   reference bus:     VR = v_set, VI = 0
//   optional:          df = 0 when nothing in the island couples to frequency
class Layout {
 public:
  struct PvGen {
    int id = -1;
    int idx = -1;   // index into net.gens
    int lb = -1;    // local bus
    double p_set = 0;
    double v_set = 1;
    curve::PatchedCurve clamp;
  };
  struct RefGen {
    int id = -1;
    int idx = -1;
    int lb = -1;
    double p_set = 0;
    double v_set = 1;
    double gain = 0;  // p.u. MW per Hz, already on system base
  };
  struct Seg {
    int load_id = -1;
    int seg_idx = -1;
    int lb = -1;
    net::ShedScheme scheme = net::ShedScheme::ufls;
    curve::PatchedCurve curve;
    bool discrete = false;
    double p0 = 0, q0 = 0;  // sheddable PQ at full segment shed
    bool pinned = false;
    double pin_value = 0;
    int var = -1;  // alpha unknown slot among variable segments, -1 if pinned
  };
  struct FixedPq {
    int lb = -1;
    double p = 0, q = 0;
  };

  // Throws std::invalid_argument when the island has no reference generator.
  // df_pin_override forces the df=0 pin decision; the homotopy path uses it
  // to keep system shape identical across loading levels.
  Layout(const net::Network& net, const net::Island& island,
         const SolverOptions& opts, const PinMap& pins = {},
         std::optional<bool> df_pin_override = std::nullopt);

  const net::Network& net() const { return *net_; }
  const net::Island& island() const { return island_; }

  int n_bus() const { return static_cast<int>(bus_ids_.size()); }
  int n_pv() const { return static_cast<int>(pv_.size()); }
  int n_var_seg() const { return n_var_seg_; }
  bool df_pinned() const { return df_pinned_; }
  int n_primal() const { return n_primal_; }
  int n_constraint() const { return n_constraint_; }
  int n_total() const { return n_primal_ + n_constraint_; }

  const std::vector<int>& bus_ids() const { return bus_ids_; }
  int local_bus(int bus_id) const;  // throws on a bus outside the island

  const std::vector<PvGen>& pv_gens() const { return pv_; }
  const RefGen& ref_gen() const { return ref_; }
  const std::vector<Seg>& segments() const { return segs_; }
  const std::vector<FixedPq>& fixed_loads() const { return fixed_; }

  // Primal indices.
  int VR(int lb) const { return 2 * lb; }
  int VI(int lb) const { return 2 * lb + 1; }
  int IFR(int lb) const { return 2 * n_bus() + 2 * lb; }
  int IFI(int lb) const { return 2 * n_bus() + 2 * lb + 1; }
  int QG(int k) const { return 4 * n_bus() + 2 * k; }
  int DPG(int k) const { return 4 * n_bus() + 2 * k + 1; }
  int ISR() const { return 4 * n_bus() + 2 * n_pv(); }
  int ISI() const { return ISR() + 1; }
  int DPS() const { return ISR() + 2; }
  int ALPHA(int s) const { return ISR() + 3 + s; }  // s = variable-segment slot
  int DF() const { return ISR() + 3 + n_var_seg_; }

  // Constraint indices.
  int C_KCL_R(int lb) const { return 2 * lb; }
  int C_KCL_I(int lb) const { return 2 * lb + 1; }
  int C_MAG(int k) const { return 2 * n_bus() + k; }
  int C_DROOP(int k) const { return 2 * n_bus() + n_pv() + k; }
  int C_DROOP_REF() const { return 2 * n_bus() + 2 * n_pv(); }
  int C_PWR_REF() const { return C_DROOP_REF() + 1; }
  int C_ALPHA(int s) const { return C_DROOP_REF() + 2 + s; }
  int C_REF_VR() const { return C_DROOP_REF() + 2 + n_var_seg_; }
  int C_REF_VI() const { return C_REF_VR() + 1; }
  int C_DF_PIN() const { return C_REF_VI() + 1; }  // only when df_pinned()

  int LAMBDA(int c) const { return n_primal_ + c; }

  // Flat start, optionally overridden per device from a previous solve.
  Eigen::VectorXd initial_state(const WarmStart* warm) const;

  // Copies the operating point out, keyed by device id.
  void harvest(const Eigen::VectorXd& z, WarmStart& warm) const;

 private:
  const net::Network* net_;
  net::Island island_;
  std::vector<int> bus_ids_;
  std::map<int, int> bus_local_;
  std::vector<PvGen> pv_;
  RefGen ref_;
  std::vector<Seg> segs_;
  std::vector<FixedPq> fixed_;
  int n_var_seg_ = 0;
  bool df_pinned_ = false;
  int n_primal_ = 0;
  int n_constraint_ = 0;
};

}  // namespace cascsim::solver

#endif

#ifndef CASCSIM_NET_NETWORK_HPP
#define CASCSIM_NET_NETWORK_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cascsim::net {

// All stored quantities are per-unit on base_mva; droop is p.u. per Hz.
// Case files carry physical units (MW, MVAr, MVA, Hz, p.u. voltages).

enum class ShedScheme { ufls, uvls };
enum class ShedMode { continuous, discrete };

struct ShedSegment {
  double fraction = 0.0;  // share of the parent load, (0, 1]
  ShedScheme scheme = ShedScheme::ufls;
  ShedMode mode = ShedMode::discrete;
  double threshold = 0.0; // Hz deviation (ufls) or p.u. voltage (uvls)
  double beta = 0.0;      // ramp slope; 0 = take the solver default (discrete only)
};

struct Bus {
  int id = 0;
  int area = 0;
  double v_min = 0.9, v_max = 1.1;
  double gs = 0.0, bs = 0.0;
};

struct Branch {
  int id = 0;
  int from = 0, to = 0;
  double r = 0.0, x = 0.0;
  double b = 0.0;        // total line charging
  double tap = 1.0;      // from-side ratio
  double rating = 0.0;   // apparent power limit; 0 = unrated
};

struct Generator {
  int id = 0;
  int bus = 0;
  double p_set = 0.0;
  double v_set = 1.0;
  double p_min = 0.0, p_max = 0.0;
  double droop = 0.0;    // p.u./Hz, response to frequency deviation
  bool slack = false;
  double v_trip_lo = 0.0, v_trip_hi = 2.0;
};

struct Load {
  int id = 0;
  int bus = 0;
  double p = 0.0, q = 0.0;
  std::vector<ShedSegment> segments;
};

class Network {
public:
  double base_mva = 100.0;
  double f_nominal = 60.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::vector<Load> loads;

  // Parallel to the device vectors; buses never deactivate.
  std::vector<std::uint8_t> branch_active;
  std::vector<std::uint8_t> gen_active;
  std::vector<std::uint8_t> load_active;

  void rebuild_index();

  int bus_index(int id) const;
  int branch_index(int id) const;
  int gen_index(int id) const;
  int load_index(int id) const;

  bool has_bus(int id) const { return bus_idx_.count(id) != 0; }
  bool has_branch(int id) const { return branch_idx_.count(id) != 0; }
  bool has_gen(int id) const { return gen_idx_.count(id) != 0; }
  bool has_load(int id) const { return load_idx_.count(id) != 0; }

private:
  std::unordered_map<int, int> bus_idx_, branch_idx_, gen_idx_, load_idx_;
};

struct Violation {
  std::string where;    // e.g. "generators[2]" or "case"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

enum class EventKind { none, trip_branch, trip_gen, trip_load };

struct Event {
  EventKind kind = EventKind::none;
  int target = 0;
};

// "trip:branch:5", "trip:gen:2", "trip:load:7", or "none".
Event parse_event_spec(const std::string& spec);
std::string format_event(const Event& e);

struct Island {
  std::vector<int> buses;       // external ids, ascending
  std::vector<int> branches;    // active branches with both ends inside
  std::vector<int> generators;  // active generators on island buses
  std::vector<int> loads;       // active loads on island buses
  int reference_gen = -1;       // gen id; -1 when the island has no generator
};

ValidationReport validate(const Network& net);

// Multiplies load p/q and generator p_set/p_min/p_max by lf (> 0).  Limits
// scale too, so a dispatch interior to its limits stays interior at any lf.
Network scale_loading(const Network& net, double lf);

// Same scaling without the positivity requirement; lf = 0 zeroes every
// source, which the continuation solver uses as its trivial starting rung.
Network scale_sources(const Network& net, double lf);

struct EventOutcome {
  Network net;
  bool redundant = false;  // target was already inactive
};

EventOutcome apply_event(const Network& net, const Event& e);

// Connected components of the active graph.  Every bus lands in exactly one
// island.  The reference generator is the global slack when present, else
// the active generator with the largest p_max (ties: lowest id).
std::vector<Island> find_islands(const Network& net);

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace cascsim::net

#endif

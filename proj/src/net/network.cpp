#include "net/network.hpp"

#include <algorithm>
#include <queue>

namespace cascsim::net {

void Network::rebuild_index() {
  bus_idx_.clear();
  branch_idx_.clear();
  gen_idx_.clear();
  load_idx_.clear();
  for (size_t i = 0; i < buses.size(); ++i) bus_idx_[buses[i].id] = int(i);
  for (size_t i = 0; i < branches.size(); ++i) branch_idx_[branches[i].id] = int(i);
  for (size_t i = 0; i < generators.size(); ++i) gen_idx_[generators[i].id] = int(i);
  for (size_t i = 0; i < loads.size(); ++i) load_idx_[loads[i].id] = int(i);
  branch_active.resize(branches.size(), 1);
  gen_active.resize(generators.size(), 1);
  load_active.resize(loads.size(), 1);
}

namespace {

int lookup(const std::unordered_map<int, int>& m, int id, const char* what) {
  auto it = m.find(id);
  if (it == m.end())
    throw std::invalid_argument(std::string(what) + " id " + std::to_string(id) + " not in case");
  return it->second;
}

} // namespace

int Network::bus_index(int id) const { return lookup(bus_idx_, id, "bus"); }
int Network::branch_index(int id) const { return lookup(branch_idx_, id, "branch"); }
int Network::gen_index(int id) const { return lookup(gen_idx_, id, "generator"); }
int Network::load_index(int id) const { return lookup(load_idx_, id, "load"); }

Event parse_event_spec(const std::string& spec) {
  if (spec == "none") return {EventKind::none, 0};
  const std::string prefix = "trip:";
  if (spec.rfind(prefix, 0) != 0)
    throw std::invalid_argument("bad event spec '" + spec + "': expected trip:<kind>:<id> or none");
  const auto rest = spec.substr(prefix.size());
  const auto colon = rest.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("bad event spec '" + spec + "': missing target id");
  const auto kind = rest.substr(0, colon);
  int id = 0;
  try {
    size_t used = 0;
    id = std::stoi(rest.substr(colon + 1), &used);
    if (used != rest.size() - colon - 1) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad event spec '" + spec + "': target id is not an integer");
  }
  if (kind == "branch") return {EventKind::trip_branch, id};
  if (kind == "gen") return {EventKind::trip_gen, id};
  if (kind == "load") return {EventKind::trip_load, id};
  throw std::invalid_argument("bad event spec '" + spec + "': unknown kind '" + kind + "'");
}

std::string format_event(const Event& e) {
  switch (e.kind) {
    case EventKind::none: return "none";
    case EventKind::trip_branch: return "trip:branch:" + std::to_string(e.target);
    case EventKind::trip_gen: return "trip:gen:" + std::to_string(e.target);
    case EventKind::trip_load: return "trip:load:" + std::to_string(e.target);
  }
  return "none";
}

ValidationReport validate(const Network& net) {
  ValidationReport rep;
  auto flag = [&rep](const std::string& where, const std::string& msg) {
    rep.violations.push_back({where, msg});
  };

  if (!(net.f_nominal > 0.0)) flag("case", "f_nominal_hz must be positive");

  for (size_t i = 0; i < net.buses.size(); ++i) {
    const auto& b = net.buses[i];
    const std::string where = "buses[" + std::to_string(i) + "]";
    if (!(b.v_min > 0.0) || !(b.v_min < b.v_max))
      flag(where, "need 0 < v_min < v_max");
  }

  for (size_t i = 0; i < net.branches.size(); ++i) {
    const auto& br = net.branches[i];
    const std::string where = "branches[" + std::to_string(i) + "]";
    if (br.from == br.to) flag(where, "branch connects a bus to itself");
    if (br.r < 0.0) flag(where, "negative series resistance");
    if (br.r * br.r + br.x * br.x <= 0.0) flag(where, "zero series impedance");
    if (!(br.tap > 0.0)) flag(where, "tap ratio must be positive");
    if (br.rating < 0.0) flag(where, "negative rating");
  }

  int slack_count = 0;
  for (size_t i = 0; i < net.generators.size(); ++i) {
    const auto& g = net.generators[i];
    const std::string where = "generators[" + std::to_string(i) + "]";
    if (g.slack) ++slack_count;
    if (!(g.p_min <= g.p_set && g.p_set <= g.p_max))
      flag(where, "dispatch outside [p_min, p_max]");
    if (g.droop < 0.0) flag(where, "negative droop gain");
    if (!(g.v_set > 0.0)) flag(where, "voltage set-point must be positive");
    if (!(g.v_trip_lo < g.v_set && g.v_set < g.v_trip_hi))
      flag(where, "need v_trip_lo < v_set < v_trip_hi");
  }
  if (slack_count != 1)
    flag("case", slack_count == 0 ? "no generator flagged slack (no angle reference)"
                                  : "more than one generator flagged slack");

  for (size_t i = 0; i < net.loads.size(); ++i) {
    const auto& l = net.loads[i];
    const std::string where = "loads[" + std::to_string(i) + "]";
    double total = 0.0;
    for (size_t s = 0; s < l.segments.size(); ++s) {
      const auto& seg = l.segments[s];
      const std::string swhere = where + ".segments[" + std::to_string(s) + "]";
      if (!(seg.fraction > 0.0 && seg.fraction <= 1.0))
        flag(swhere, "fraction must lie in (0, 1]");
      total += seg.fraction;
      if (seg.mode == ShedMode::continuous && !(seg.beta > 0.0))
        flag(swhere, "continuous segment needs an explicit positive beta");
      if (seg.mode == ShedMode::discrete && seg.beta != 0.0 && seg.beta < 100.0)
        flag(swhere, "discrete segment beta must be at least 100");
      if (seg.scheme == ShedScheme::ufls && !(seg.threshold < 0.0))
        flag(swhere, "ufls threshold is a negative frequency deviation");
      if (seg.scheme == ShedScheme::uvls && !(seg.threshold > 0.0))
        flag(swhere, "uvls threshold is a positive p.u. voltage");
    }
    if (total > 1.0 + 1e-9)
      flag(where, "segment fractions sum above 1");
  }

  return rep;
}

Network scale_sources(const Network& net, double lf) {
  Network out = net;
  for (auto& l : out.loads) {
    l.p *= lf;
    l.q *= lf;
  }
  for (auto& g : out.generators) {
    g.p_set *= lf;
    g.p_min *= lf;
    g.p_max *= lf;
  }
  return out;
}

Network scale_loading(const Network& net, double lf) {
  if (!(lf > 0.0))
    throw std::invalid_argument("loading factor must be positive");
  return scale_sources(net, lf);
}

EventOutcome apply_event(const Network& net, const Event& e) {
  EventOutcome out{net, false};
  switch (e.kind) {
    case EventKind::none:
      break;
    case EventKind::trip_branch: {
      const int i = out.net.branch_index(e.target);
      out.redundant = !out.net.branch_active[i];
      out.net.branch_active[i] = 0;
      break;
    }
    case EventKind::trip_gen: {
      const int i = out.net.gen_index(e.target);
      out.redundant = !out.net.gen_active[i];
      out.net.gen_active[i] = 0;
      break;
    }
    case EventKind::trip_load: {
      const int i = out.net.load_index(e.target);
      out.redundant = !out.net.load_active[i];
      out.net.load_active[i] = 0;
      break;
    }
  }
  return out;
}

std::vector<Island> find_islands(const Network& net) {
  const size_t n = net.buses.size();

  // Adjacency over active branches, by bus position.
  std::vector<std::vector<int>> adj(n);
  for (size_t bi = 0; bi < net.branches.size(); ++bi) {
    if (!net.branch_active[bi]) continue;
    const int f = net.bus_index(net.branches[bi].from);
    const int t = net.bus_index(net.branches[bi].to);
    adj[f].push_back(t);
    adj[t].push_back(f);
  }

  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (size_t seed = 0; seed < n; ++seed) {
    if (comp[seed] >= 0) continue;
    const int c = ncomp++;
    std::queue<int> q;
    q.push(int(seed));
    comp[seed] = c;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (comp[v] < 0) {
          comp[v] = c;
          q.push(v);
        }
    }
  }

  std::vector<Island> islands(ncomp);
  for (size_t i = 0; i < n; ++i) islands[comp[i]].buses.push_back(net.buses[i].id);
  for (auto& isl : islands) std::sort(isl.buses.begin(), isl.buses.end());

  // Components are discovered in bus order; re-sort by lowest bus id for a
  // stable, membership-defined ordering.
  std::sort(islands.begin(), islands.end(),
            [](const Island& a, const Island& b) { return a.buses.front() < b.buses.front(); });

  std::unordered_map<int, int> island_of_bus_id;
  for (size_t k = 0; k < islands.size(); ++k)
    for (int id : islands[k].buses) island_of_bus_id[id] = int(k);

  for (size_t bi = 0; bi < net.branches.size(); ++bi) {
    if (!net.branch_active[bi]) continue;
    islands[island_of_bus_id[net.branches[bi].from]].branches.push_back(net.branches[bi].id);
  }
  for (size_t gi = 0; gi < net.generators.size(); ++gi) {
    if (!net.gen_active[gi]) continue;
    islands[island_of_bus_id[net.generators[gi].bus]].generators.push_back(net.generators[gi].id);
  }
  for (size_t li = 0; li < net.loads.size(); ++li) {
    if (!net.load_active[li]) continue;
    islands[island_of_bus_id[net.loads[li].bus]].loads.push_back(net.loads[li].id);
  }

  for (auto& isl : islands) {
    std::sort(isl.branches.begin(), isl.branches.end());
    std::sort(isl.generators.begin(), isl.generators.end());
    std::sort(isl.loads.begin(), isl.loads.end());
    isl.reference_gen = -1;
    double best_pmax = 0.0;
    for (int gid : isl.generators) {
      const auto& g = net.generators[net.gen_index(gid)];
      if (g.slack) {
        isl.reference_gen = gid;
        break;
      }
      if (isl.reference_gen < 0 || g.p_max > best_pmax) {
        isl.reference_gen = gid;
        best_pmax = g.p_max;
      }
    }
  }

  return islands;
}

} // namespace cascsim::net

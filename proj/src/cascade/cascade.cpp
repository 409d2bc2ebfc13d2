#include "cascade/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>

namespace cascsim::cascade {

std::string to_string(IslandStatus s) {
  switch (s) {
    case IslandStatus::secure: return "SECURE";
    case IslandStatus::collapsed: return "COLLAPSED";
    case IslandStatus::blacked_out: return "BLACKED_OUT";
    case IslandStatus::unresolved: return "UNRESOLVED";
  }
  return "UNRESOLVED";
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::secure: return "SECURE";
    case Outcome::partial_collapse: return "PARTIAL_COLLAPSE";
    case Outcome::system_blackout: return "SYSTEM_BLACKOUT";
  }
  return "PARTIAL_COLLAPSE";
}

bool CascadeReport::any_unresolved() const {
  if (stages.empty()) return false;
  for (const auto& isl : stages.back().islands)
    if (isl.status == IslandStatus::unresolved) return true;
  return false;
}

std::vector<ViolationRec> check_limits(const net::Network& net,
                                       const net::Island& island,
                                       const solver::SolveResult& sol,
                                       double relay_deadband) {
  using cplx = std::complex<double>;
  std::vector<ViolationRec> out;

  for (int bid : island.branches) {
    const auto& br = net.branches[net.branch_index(bid)];
    if (br.rating <= 0) continue;
    auto [vfr, vfi] = sol.bus_v.at(br.from);
    auto [vtr, vti] = sol.bus_v.at(br.to);
    cplx vf(vfr, vfi), vt(vtr, vti);
    cplx ys = 1.0 / cplx(br.r, br.x);
    cplx ysh(0, br.b / 2);
    double t = br.tap;
    cplx i_from = (ys + ysh) / (t * t) * vf - ys / t * vt;
    cplx i_to = ys * vt - ys / t * vf + ysh * vt;
    double s = std::max(std::abs(vf * std::conj(i_from)),
                        std::abs(vt * std::conj(i_to)));
    if (s > br.rating * (1.0 + relay_deadband))
      out.push_back({ViolationRec::Kind::branch_overload, bid, s, br.rating});
  }

  for (int gid : island.generators) {
    const auto& g = net.generators[net.gen_index(gid)];
    auto [vr, vi] = sol.bus_v.at(g.bus);
    double v = std::hypot(vr, vi);
    if (v < g.v_trip_lo * (1.0 - relay_deadband))
      out.push_back({ViolationRec::Kind::gen_voltage, gid, v, g.v_trip_lo});
    else if (v > g.v_trip_hi * (1.0 + relay_deadband))
      out.push_back({ViolationRec::Kind::gen_voltage, gid, v, g.v_trip_hi});
  }

  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.kind != b.kind ? a.kind < b.kind : a.id < b.id;
  });
  return out;
}

namespace {

void merge_warm(const solver::SolveResult& sol, solver::WarmStart& warm) {
  for (const auto& [id, v] : sol.bus_v) {
    warm.bus_v[id] = v;
    warm.bus_df[id] = sol.delta_f;
  }
  for (const auto& [id, qdp] : sol.gen_eff) warm.gen_qdp[id] = qdp;
  for (const auto& [key, a] : sol.seg_alpha) warm.seg_alpha[key] = a;
}

Outcome classify(const StageRecord& last) {
  bool all_secure = true, all_lost = true;
  for (const auto& isl : last.islands) {
    if (isl.status != IslandStatus::secure) all_secure = false;
    if (isl.status != IslandStatus::collapsed &&
        isl.status != IslandStatus::blacked_out)
      all_lost = false;
  }
  if (all_secure) return Outcome::secure;
  if (all_lost) return Outcome::system_blackout;
  return Outcome::partial_collapse;
}

}  // namespace

CascadeReport run_cascade(const net::Network& base, const net::Event& event,
                          const CascadeParams& params) {
  CascadeReport report;
  report.event = event;

  net::Network net = base;
  std::vector<net::Event> pending;
  if (event.kind != net::EventKind::none) {
    net = net::apply_event(net, event).net;
    pending.push_back(event);
  }

  solver::WarmStart warm;
  for (int stage = 1; stage <= params.max_stages; ++stage) {
    StageRecord rec;
    rec.stage = stage;
    rec.trips = pending;

    auto islands = net::find_islands(net);
    for (const auto& island : islands) {
      IslandRecord ir;
      ir.buses = island.buses;
      if (island.reference_gen < 0) {
        ir.status = IslandStatus::blacked_out;
        rec.islands.push_back(std::move(ir));
        continue;
      }
      solver::SolveResult sol =
          solver::solve_island(net, island, params.solver, &warm);
      ir.iterations = sol.iterations;
      if (sol.status != solver::SolveStatus::converged) {
        ir.status = IslandStatus::unresolved;
        rec.islands.push_back(std::move(ir));
        continue;
      }
      ir.solved = true;
      ir.delta_f = sol.delta_f;
      ir.shed_mw = sol.shed_p * net.base_mva;
      ir.max_if = sol.max_if;
      ir.worst_if_bus = sol.worst_if_bus;
      ir.bus_if = sol.bus_if;
      merge_warm(sol, warm);
      if (sol.feasible) {
        ir.status = IslandStatus::secure;
        auto v = check_limits(net, island, sol, params.relay_deadband);
        rec.violations.insert(rec.violations.end(), v.begin(), v.end());
      } else {
        ir.status = IslandStatus::collapsed;
      }
      rec.islands.push_back(std::move(ir));
    }

    std::sort(rec.violations.begin(), rec.violations.end(),
              [](const auto& a, const auto& b) {
                return a.kind != b.kind ? a.kind < b.kind : a.id < b.id;
              });

    bool more = !rec.violations.empty();
    pending.clear();
    if (more) {
      std::set<std::pair<int, int>> seen;
      for (const auto& v : rec.violations) {
        net::Event e;
        e.kind = v.kind == ViolationRec::Kind::branch_overload
                     ? net::EventKind::trip_branch
                     : net::EventKind::trip_gen;
        e.target = v.id;
        if (seen.insert({static_cast<int>(e.kind), e.target}).second)
          pending.push_back(e);
      }
      for (const auto& e : pending) net = net::apply_event(net, e).net;
    }

    report.stages.push_back(std::move(rec));
    if (!more) break;
    if (stage == params.max_stages) {
      report.truncated = true;
      break;
    }
  }

  report.outcome = classify(report.stages.back());
  return report;
}

}  // namespace cascsim::cascade

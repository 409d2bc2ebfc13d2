#include "cascsim.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "cascade/cascade.hpp"
#include "cascade/report.hpp"
#include "net/case_io.hpp"
#include "net/network.hpp"
#include "runner/contingency.hpp"
#include "solver/stage1.hpp"

namespace {

thread_local std::string g_error;

void set_error(const std::string& msg) { g_error = msg; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

casc_status arg_error(const char* msg) {
  set_error(msg);
  return CASC_ERR_ARG;
}

// Maps exceptions from the core onto status codes.
template <typename Fn>
casc_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const cascsim::net::ParseError& e) {
    set_error(e.what());
    return CASC_ERR_PARSE;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return CASC_ERR_ARG;
  } catch (const std::exception& e) {
    set_error(e.what());
    return CASC_ERR_INTERNAL;
  }
}

cascsim::solver::SolverOptions solver_options(const casc_options* o) {
  cascsim::solver::SolverOptions s;
  if (!o) return s;
  s.tol_residual = o->tol_residual;
  s.feas_tol = o->feas_tol;
  s.max_iter = o->max_iter;
  s.v_step_cap = o->v_step_cap;
  s.alpha_step_cap = o->alpha_step_cap;
  s.df_step_cap = o->df_step_cap;
  s.discrete_beta = o->discrete_beta;
  s.snap_threshold = o->snap_threshold;
  return s;
}

cascsim::cascade::CascadeParams cascade_params(const casc_options* o) {
  cascsim::cascade::CascadeParams p;
  p.solver = solver_options(o);
  if (o) {
    p.relay_deadband = o->relay_deadband;
    p.max_stages = o->max_stages;
  }
  return p;
}

}  // namespace

struct casc_network {
  cascsim::net::Network net;
};

struct casc_solution {
  struct IslandSol {
    std::vector<int> buses;
    std::string state;
    double delta_f = 0;
    double shed_mw = 0;
    double max_if = 0;
    int worst_bus = -1;
  };
  std::vector<IslandSol> islands;
};

struct casc_report {
  cascsim::cascade::CascadeReport rep;
};

struct casc_report_set {
  std::vector<casc_report> items;
};

extern "C" {

const char* casc_version(void) { return "1.0.0"; }

const char* casc_last_error(void) { return g_error.c_str(); }

void casc_string_free(char* s) { std::free(s); }

casc_status casc_network_from_json(const char* text, casc_network** out) {
  if (!text || !out) return arg_error("null argument");
  return guarded([&] {
    auto net = cascsim::net::parse_case_text(text);
    *out = new casc_network{std::move(net)};
    return CASC_OK;
  });
}

casc_status casc_network_from_file(const char* path, casc_network** out) {
  if (!path || !out) return arg_error("null argument");
  return guarded([&]() -> casc_status {
    try {
      auto net = cascsim::net::parse_case_file(path);
      *out = new casc_network{std::move(net)};
      return CASC_OK;
    } catch (const cascsim::net::ParseError& e) {
      // Distinguish "file unreadable" from "file malformed".
      if (std::string(e.what()).find("cannot open") != std::string::npos) {
        set_error(e.what());
        return CASC_ERR_IO;
      }
      throw;
    }
  });
}

void casc_network_free(casc_network* net) { delete net; }

casc_status casc_network_validate(const casc_network* net,
                                  char** report_json) {
  if (!net || !report_json) return arg_error("null argument");
  return guarded([&] {
    auto report = cascsim::net::validate(net->net);
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& v : report.violations)
      j.push_back({{"where", v.where}, {"message", v.message}});
    *report_json = dup_string(j.dump());
    return CASC_OK;
  });
}

casc_status casc_network_scale_loading(const casc_network* net, double lf,
                                       casc_network** out) {
  if (!net || !out) return arg_error("null argument");
  return guarded([&] {
    *out = new casc_network{cascsim::net::scale_loading(net->net, lf)};
    return CASC_OK;
  });
}

casc_status casc_network_apply_event(const casc_network* net,
                                     const char* event, casc_network** out,
                                     int* redundant) {
  if (!net || !event || !out) return arg_error("null argument");
  return guarded([&] {
    auto ev = cascsim::net::parse_event_spec(event);
    auto res = cascsim::net::apply_event(net->net, ev);
    *out = new casc_network{std::move(res.net)};
    if (redundant) *redundant = res.redundant ? 1 : 0;
    return CASC_OK;
  });
}

int casc_network_bus_count(const casc_network* net) {
  return net ? static_cast<int>(net->net.buses.size()) : 0;
}
int casc_network_branch_count(const casc_network* net) {
  return net ? static_cast<int>(net->net.branches.size()) : 0;
}
int casc_network_gen_count(const casc_network* net) {
  return net ? static_cast<int>(net->net.generators.size()) : 0;
}
int casc_network_load_count(const casc_network* net) {
  return net ? static_cast<int>(net->net.loads.size()) : 0;
}

int casc_network_branch_id(const casc_network* net, int index) {
  if (!net || index < 0 ||
      index >= static_cast<int>(net->net.branches.size()))
    return -1;
  return net->net.branches[index].id;
}
int casc_network_gen_id(const casc_network* net, int index) {
  if (!net || index < 0 || index >= static_cast<int>(net->net.generators.size()))
    return -1;
  return net->net.generators[index].id;
}
int casc_network_load_id(const casc_network* net, int index) {
  if (!net || index < 0 || index >= static_cast<int>(net->net.loads.size()))
    return -1;
  return net->net.loads[index].id;
}

void casc_options_defaults(casc_options* opts) {
  if (!opts) return;
  cascsim::solver::SolverOptions s;
  cascsim::cascade::CascadeParams p;
  opts->tol_residual = s.tol_residual;
  opts->feas_tol = s.feas_tol;
  opts->max_iter = s.max_iter;
  opts->v_step_cap = s.v_step_cap;
  opts->alpha_step_cap = s.alpha_step_cap;
  opts->df_step_cap = s.df_step_cap;
  opts->discrete_beta = s.discrete_beta;
  opts->snap_threshold = s.snap_threshold;
  opts->relay_deadband = p.relay_deadband;
  opts->max_stages = p.max_stages;
}

casc_status casc_solve(const casc_network* net, const casc_options* opts,
                       casc_solution** out) {
  if (!net || !out) return arg_error("null argument");
  return guarded([&] {
    auto sopts = solver_options(opts);
    auto sol = new casc_solution;
    for (const auto& island : cascsim::net::find_islands(net->net)) {
      casc_solution::IslandSol is;
      is.buses = island.buses;
      if (island.reference_gen < 0) {
        is.state = "NO_SOURCE";
      } else {
        auto r = cascsim::solver::solve_island(net->net, island, sopts);
        if (r.status != cascsim::solver::SolveStatus::converged) {
          is.state = "DIVERGED";
        } else {
          is.state = r.feasible ? "FEASIBLE" : "INFEASIBLE";
          is.delta_f = r.delta_f;
          is.shed_mw = r.shed_p * net->net.base_mva;
          is.max_if = r.max_if;
          is.worst_bus = r.worst_if_bus;
        }
      }
      sol->islands.push_back(std::move(is));
    }
    *out = sol;
    return CASC_OK;
  });
}

void casc_solution_free(casc_solution* s) { delete s; }

int casc_solution_island_count(const casc_solution* s) {
  return s ? static_cast<int>(s->islands.size()) : 0;
}

int casc_solution_island_bus_count(const casc_solution* s, int island) {
  if (!s || island < 0 || island >= static_cast<int>(s->islands.size()))
    return 0;
  return static_cast<int>(s->islands[island].buses.size());
}

namespace {
const casc_solution::IslandSol* island_at(const casc_solution* s, int i) {
  if (!s || i < 0 || i >= static_cast<int>(s->islands.size())) return nullptr;
  return &s->islands[i];
}
}  // namespace

const char* casc_solution_island_state(const casc_solution* s, int island) {
  auto* is = island_at(s, island);
  return is ? is->state.c_str() : "";
}
double casc_solution_island_delta_f(const casc_solution* s, int island) {
  auto* is = island_at(s, island);
  return is ? is->delta_f : 0;
}
double casc_solution_island_shed_mw(const casc_solution* s, int island) {
  auto* is = island_at(s, island);
  return is ? is->shed_mw : 0;
}
double casc_solution_island_max_if(const casc_solution* s, int island) {
  auto* is = island_at(s, island);
  return is ? is->max_if : 0;
}
int casc_solution_island_worst_bus(const casc_solution* s, int island) {
  auto* is = island_at(s, island);
  return is ? is->worst_bus : -1;
}

casc_status casc_solution_json(const casc_solution* s, char** out) {
  if (!s || !out) return arg_error("null argument");
  return guarded([&] {
    nlohmann::ordered_json j;
    j["islands"] = nlohmann::ordered_json::array();
    for (const auto& is : s->islands) {
      nlohmann::ordered_json ji;
      ji["buses"] = is.buses;
      ji["state"] = is.state;
      if (is.state == "FEASIBLE" || is.state == "INFEASIBLE") {
        ji["delta_f_hz"] = is.delta_f;
        ji["shed_mw"] = is.shed_mw;
        ji["max_if_pu"] = is.max_if;
        ji["worst_if_bus"] = is.worst_bus;
      } else {
        ji["delta_f_hz"] = nullptr;
        ji["shed_mw"] = nullptr;
        ji["max_if_pu"] = nullptr;
        ji["worst_if_bus"] = nullptr;
      }
      j["islands"].push_back(ji);
    }
    *out = dup_string(j.dump(2) + "\n");
    return CASC_OK;
  });
}

casc_status casc_run_cascade(const casc_network* net, const char* event,
                             const casc_options* opts, casc_report** out) {
  if (!net || !event || !out) return arg_error("null argument");
  return guarded([&] {
    auto ev = cascsim::net::parse_event_spec(event);
    auto rep = cascsim::cascade::run_cascade(net->net, ev,
                                             cascade_params(opts));
    *out = new casc_report{std::move(rep)};
    return CASC_OK;
  });
}

void casc_report_free(casc_report* r) { delete r; }

namespace {
thread_local std::string g_event_buf;
}

const char* casc_report_event(const casc_report* r) {
  if (!r) return "";
  g_event_buf = cascsim::net::format_event(r->rep.event);
  return g_event_buf.c_str();
}

const char* casc_report_outcome(const casc_report* r) {
  if (!r) return "";
  static thread_local std::string buf;
  buf = cascsim::cascade::to_string(r->rep.outcome);
  return buf.c_str();
}

int casc_report_stage_count(const casc_report* r) {
  return r ? static_cast<int>(r->rep.stages.size()) : 0;
}
int casc_report_truncated(const casc_report* r) {
  return r && r->rep.truncated ? 1 : 0;
}
int casc_report_any_unresolved(const casc_report* r) {
  return r && r->rep.any_unresolved() ? 1 : 0;
}
int casc_report_has_collapse(const casc_report* r) {
  return r && cascsim::cascade::has_collapse(r->rep) ? 1 : 0;
}

casc_status casc_report_json(const casc_report* r, char** out) {
  if (!r || !out) return arg_error("null argument");
  return guarded([&] {
    *out = dup_string(cascsim::cascade::report_to_json(r->rep).dump(2) + "\n");
    return CASC_OK;
  });
}

casc_status casc_report_area_csv(const casc_report* r,
                                 const casc_network* net, char** out) {
  if (!r || !net || !out) return arg_error("null argument");
  return guarded([&] {
    *out = dup_string(cascsim::cascade::area_csv(net->net, r->rep));
    return CASC_OK;
  });
}

casc_status casc_run_contingency_set(const casc_network* net,
                                     const char* const* events, int n_events,
                                     const casc_options* opts,
                                     int parallelism, casc_report_set** out) {
  if (!net || !out || (n_events > 0 && !events))
    return arg_error("null argument");
  if (n_events < 0) return arg_error("negative event count");
  return guarded([&] {
    std::vector<cascsim::net::Event> evs;
    evs.reserve(n_events);
    for (int i = 0; i < n_events; ++i) {
      if (!events[i]) return arg_error("null event string");
      evs.push_back(cascsim::net::parse_event_spec(events[i]));
    }
    auto reports = cascsim::runner::run_contingency_set(
        net->net, evs, cascade_params(opts), parallelism);
    auto set = new casc_report_set;
    set->items.reserve(reports.size());
    for (auto& rep : reports) set->items.push_back({std::move(rep)});
    *out = set;
    return CASC_OK;
  });
}

void casc_report_set_free(casc_report_set* s) { delete s; }

int casc_report_set_count(const casc_report_set* s) {
  return s ? static_cast<int>(s->items.size()) : 0;
}

const casc_report* casc_report_set_get(const casc_report_set* s, int i) {
  if (!s || i < 0 || i >= static_cast<int>(s->items.size())) return nullptr;
  return &s->items[i];
}

casc_status casc_report_set_summary_csv(const casc_report_set* s,
                                        char** out) {
  if (!s || !out) return arg_error("null argument");
  return guarded([&] {
    std::vector<cascsim::cascade::CascadeReport> reps;
    reps.reserve(s->items.size());
    for (const auto& it : s->items) reps.push_back(it.rep);
    *out = dup_string(cascsim::cascade::summary_csv(reps));
    return CASC_OK;
  });
}

casc_status casc_report_set_emit(const casc_report_set* s,
                                 const casc_network* net,
                                 const char* out_dir) {
  if (!s || !net || !out_dir) return arg_error("null argument");
  return guarded([&]() -> casc_status {
    try {
      std::vector<cascsim::cascade::CascadeReport> reps;
      reps.reserve(s->items.size());
      for (const auto& it : s->items) reps.push_back(it.rep);
      cascsim::cascade::emit_reports(reps, net->net, out_dir);
      return CASC_OK;
    } catch (const std::runtime_error& e) {
      set_error(e.what());
      return CASC_ERR_IO;
    }
  });
}

}  // extern "C"

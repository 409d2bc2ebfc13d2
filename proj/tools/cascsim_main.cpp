// Command-line front end. Everything goes through the public C interface;
// no core headers are included here.
#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "cascsim.h"

namespace {

struct NetDeleter {
  void operator()(casc_network* p) const { casc_network_free(p); }
};
using NetPtr = std::unique_ptr<casc_network, NetDeleter>;

struct StrDeleter {
  void operator()(char* p) const { casc_string_free(p); }
};
using StrPtr = std::unique_ptr<char, StrDeleter>;

int fail(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return 1;
}

NetPtr load_case(const std::string& path, int& err) {
  casc_network* raw = nullptr;
  if (casc_network_from_file(path.c_str(), &raw) != CASC_OK) {
    err = fail(casc_last_error());
    return nullptr;
  }
  err = 0;
  return NetPtr(raw);
}

// Prints violations and returns their count, or -1 on error.
int report_violations(const casc_network* net) {
  char* raw = nullptr;
  if (casc_network_validate(net, &raw) != CASC_OK) {
    fail(casc_last_error());
    return -1;
  }
  StrPtr json(raw);
  std::string s(json.get());
  // The report is a JSON array of {"where","message"} objects; print one
  // line per entry without dragging a parser into the front end.
  int count = 0;
  size_t pos = 0;
  while ((pos = s.find("\"where\":\"", pos)) != std::string::npos) {
    pos += 9;
    size_t we = s.find('"', pos);
    size_t mp = s.find("\"message\":\"", we);
    if (mp == std::string::npos) break;
    mp += 11;
    size_t me = s.find('"', mp);
    std::fprintf(stderr, "%s: %s\n", s.substr(pos, we - pos).c_str(),
                 s.substr(mp, me - mp).c_str());
    pos = me;
    ++count;
  }
  return count;
}

struct CommonArgs {
  std::string case_path;
  double lf = 1.0;
  casc_options opts;
};

NetPtr prepare(const CommonArgs& a, int& err) {
  NetPtr net = load_case(a.case_path, err);
  if (!net) return nullptr;
  int nviol = report_violations(net.get());
  if (nviol < 0) {
    err = 1;
    return nullptr;
  }
  if (nviol > 0) {
    err = fail("case has validation violations");
    return nullptr;
  }
  if (a.lf != 1.0) {
    casc_network* scaled = nullptr;
    if (casc_network_scale_loading(net.get(), a.lf, &scaled) != CASC_OK) {
      err = fail(casc_last_error());
      return nullptr;
    }
    net.reset(scaled);
  }
  err = 0;
  return net;
}

int cmd_validate(const std::string& path) {
  int err = 0;
  NetPtr net = load_case(path, err);
  if (!net) return err;
  int nviol = report_violations(net.get());
  if (nviol < 0) return 1;
  if (nviol > 0) return 2;
  std::printf("%s: ok (%d buses, %d branches, %d generators, %d loads)\n",
              path.c_str(), casc_network_bus_count(net.get()),
              casc_network_branch_count(net.get()),
              casc_network_gen_count(net.get()),
              casc_network_load_count(net.get()));
  return 0;
}

int cmd_solve(const CommonArgs& a, bool as_json) {
  int err = 0;
  NetPtr net = prepare(a, err);
  if (!net) return err;

  casc_solution* raw = nullptr;
  if (casc_solve(net.get(), &a.opts, &raw) != CASC_OK)
    return fail(casc_last_error());
  std::unique_ptr<casc_solution, decltype(&casc_solution_free)> sol(
      raw, casc_solution_free);

  if (as_json) {
    char* js = nullptr;
    if (casc_solution_json(sol.get(), &js) != CASC_OK)
      return fail(casc_last_error());
    StrPtr out(js);
    std::fputs(out.get(), stdout);
  }

  bool any_infeasible = false, any_diverged = false;
  int n = casc_solution_island_count(sol.get());
  for (int i = 0; i < n; ++i) {
    std::string state = casc_solution_island_state(sol.get(), i);
    if (!as_json) {
      if (state == "FEASIBLE" || state == "INFEASIBLE")
        std::printf(
            "island %d (%d buses): %s  df=%+.4f Hz  shed=%.1f MW  "
            "max_if=%.3e pu @ bus %d\n",
            i, casc_solution_island_bus_count(sol.get(), i), state.c_str(),
            casc_solution_island_delta_f(sol.get(), i),
            casc_solution_island_shed_mw(sol.get(), i),
            casc_solution_island_max_if(sol.get(), i),
            casc_solution_island_worst_bus(sol.get(), i));
      else
        std::printf("island %d (%d buses): %s\n", i,
                    casc_solution_island_bus_count(sol.get(), i),
                    state.c_str());
    }
    if (state == "DIVERGED") any_diverged = true;
    else if (state != "FEASIBLE") any_infeasible = true;
  }
  if (any_diverged) return 3;
  if (any_infeasible) return 2;
  return 0;
}

int cmd_run(const CommonArgs& a, std::vector<std::string> events,
            bool all_branches, bool all_gens, const std::string& out_dir,
            int parallel) {
  int err = 0;
  NetPtr net = prepare(a, err);
  if (!net) return err;

  if (all_branches)
    for (int i = 0; i < casc_network_branch_count(net.get()); ++i)
      events.push_back("trip:branch:" +
                       std::to_string(casc_network_branch_id(net.get(), i)));
  if (all_gens)
    for (int i = 0; i < casc_network_gen_count(net.get()); ++i)
      events.push_back("trip:gen:" +
                       std::to_string(casc_network_gen_id(net.get(), i)));
  if (events.empty()) return fail("no events given; use --event or --all-branches");

  std::vector<const char*> raw_events;
  raw_events.reserve(events.size());
  for (const auto& e : events) raw_events.push_back(e.c_str());

  casc_report_set* raw = nullptr;
  if (casc_run_contingency_set(net.get(), raw_events.data(),
                               static_cast<int>(raw_events.size()), &a.opts,
                               parallel, &raw) != CASC_OK)
    return fail(casc_last_error());
  std::unique_ptr<casc_report_set, decltype(&casc_report_set_free)> set(
      raw, casc_report_set_free);

  bool any_unresolved = false, any_insecure = false;
  for (int i = 0; i < casc_report_set_count(set.get()); ++i) {
    const casc_report* r = casc_report_set_get(set.get(), i);
    if (casc_report_any_unresolved(r)) any_unresolved = true;
    std::string outcome = casc_report_outcome(r);
    if (outcome != "SECURE") any_insecure = true;
    std::fprintf(stderr, "%s: %s in %d stage(s)%s\n", casc_report_event(r),
                 outcome.c_str(), casc_report_stage_count(r),
                 casc_report_truncated(r) ? " [truncated]" : "");
  }

  if (!out_dir.empty()) {
    if (casc_report_set_emit(set.get(), net.get(), out_dir.c_str()) !=
        CASC_OK)
      return fail(casc_last_error());
  } else {
    char* csv = nullptr;
    if (casc_report_set_summary_csv(set.get(), &csv) != CASC_OK)
      return fail(casc_last_error());
    StrPtr out(csv);
    std::fputs(out.get(), stdout);
  }

  if (any_unresolved) return 3;
  if (any_insecure) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steady-state cascading outage simulator"};
  app.require_subcommand(1);

  CommonArgs common;
  casc_options_defaults(&common.opts);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("case", common.case_path, "case file (JSON)")
        ->required();
    cmd->add_option("--lf", common.lf, "loading factor applied to all loads")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--feas-tol", common.opts.feas_tol,
                    "feasibility threshold on per-bus current, p.u.");
    cmd->add_option("--tol", common.opts.tol_residual,
                    "Newton residual tolerance");
    cmd->add_option("--max-iter", common.opts.max_iter,
                    "Newton iteration cap");
    cmd->add_option("--beta", common.opts.discrete_beta,
                    "ramp slope for discrete shed segments without one");
    cmd->add_option("--snap-threshold", common.opts.snap_threshold,
                    "undecided discrete fraction at/above snaps to 1");
  };

  auto* validate = app.add_subcommand("validate", "check a case file");
  std::string validate_path;
  validate->add_option("case", validate_path, "case file (JSON)")->required();

  auto* solve = app.add_subcommand("solve", "one steady-state solve");
  add_common(solve);
  bool solve_json = false;
  solve->add_flag("--json", solve_json, "print the solution as JSON");

  auto* run = app.add_subcommand("run", "cascade simulation per event");
  add_common(run);
  std::vector<std::string> events;
  bool all_branches = false, all_gens = false;
  std::string out_dir;
  int parallel = 1;
  run->add_option("--event", events,
                  "initiating event, repeatable (e.g. trip:branch:5)");
  run->add_flag("--all-branches", all_branches,
                "one cascade per branch outage");
  run->add_flag("--all-gens", all_gens, "one cascade per generator outage");
  run->add_option("--out", out_dir,
                  "directory for report files, created if needed; summary "
                  "CSV goes to stdout when omitted");
  run->add_option("--parallel", parallel, "worker threads")
      ->check(CLI::PositiveNumber);
  run->add_option("--deadband", common.opts.relay_deadband,
                  "fractional relay margin before a limit trips");
  run->add_option("--max-stages", common.opts.max_stages,
                  "cascade stage cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (validate->parsed()) return cmd_validate(validate_path);
  if (solve->parsed()) return cmd_solve(common, solve_json);
  return cmd_run(common, events, all_branches, all_gens, out_dir, parallel);
}

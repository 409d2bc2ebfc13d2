/* C interface to the cascading-outage steady-state simulator.
 *
 * All objects are opaque handles created and destroyed by this library.
 * Functions return CASC_OK on success; on failure casc_last_error() holds a
 * message for the calling thread until its next failing call. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with casc_string_free().
 */
#ifndef CASCSIM_H
#define CASCSIM_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum casc_status {
  CASC_OK = 0,
  CASC_ERR_ARG = 1,      /* bad argument, null handle, unknown event */
  CASC_ERR_PARSE = 2,    /* malformed case JSON */
  CASC_ERR_IO = 3,       /* file could not be read or written */
  CASC_ERR_INTERNAL = 4
} casc_status;

const char* casc_version(void);
const char* casc_last_error(void);
void casc_string_free(char* s);

/* ---- network -------------------------------------------------------- */

typedef struct casc_network casc_network;

casc_status casc_network_from_json(const char* text, casc_network** out);
casc_status casc_network_from_file(const char* path, casc_network** out);
void casc_network_free(casc_network* net);

/* JSON array of {"where","message"}; an empty array means a clean case. */
casc_status casc_network_validate(const casc_network* net,
                                  char** report_json);

/* Scales every load by lf (> 0) into a new network. */
casc_status casc_network_scale_loading(const casc_network* net, double lf,
                                       casc_network** out);

/* event is "trip:branch:ID", "trip:gen:ID", "trip:load:ID", or "none".
 * *redundant (optional) is set to 1 when the target was already out. */
casc_status casc_network_apply_event(const casc_network* net,
                                     const char* event, casc_network** out,
                                     int* redundant);

int casc_network_bus_count(const casc_network* net);
int casc_network_branch_count(const casc_network* net);
int casc_network_gen_count(const casc_network* net);
int casc_network_load_count(const casc_network* net);

/* Device ids in file order, for enumerating contingencies; -1 when the
 * index is out of range. */
int casc_network_branch_id(const casc_network* net, int index);
int casc_network_gen_id(const casc_network* net, int index);
int casc_network_load_id(const casc_network* net, int index);

/* ---- options -------------------------------------------------------- */

typedef struct casc_options {
  double tol_residual;   /* Newton residual tolerance (infinity norm) */
  double feas_tol;       /* max per-bus infeasibility current, p.u. */
  int max_iter;          /* Newton iteration cap per solve */
  double v_step_cap;     /* per-iteration voltage component step, p.u. */
  double alpha_step_cap; /* per-iteration shed fraction step */
  double df_step_cap;    /* per-iteration frequency deviation step, Hz */
  double discrete_beta;  /* ramp slope for discrete segments without one */
  double snap_threshold; /* undecided discrete fraction at/above goes to 1 */
  double relay_deadband; /* fractional margin before a limit trips */
  int max_stages;        /* cascade stage cap */
} casc_options;

void casc_options_defaults(casc_options* opts);

/* ---- single steady-state solve -------------------------------------- */

typedef struct casc_solution casc_solution;

/* Solves each island of the network as-is. NULL opts means defaults. */
casc_status casc_solve(const casc_network* net, const casc_options* opts,
                       casc_solution** out);
void casc_solution_free(casc_solution* s);

int casc_solution_island_count(const casc_solution* s);
int casc_solution_island_bus_count(const casc_solution* s, int island);
/* "FEASIBLE", "INFEASIBLE", "DIVERGED", or "NO_SOURCE" */
const char* casc_solution_island_state(const casc_solution* s, int island);
double casc_solution_island_delta_f(const casc_solution* s, int island);
double casc_solution_island_shed_mw(const casc_solution* s, int island);
double casc_solution_island_max_if(const casc_solution* s, int island);
int casc_solution_island_worst_bus(const casc_solution* s, int island);
casc_status casc_solution_json(const casc_solution* s, char** out);

/* ---- cascade -------------------------------------------------------- */

typedef struct casc_report casc_report;

casc_status casc_run_cascade(const casc_network* net, const char* event,
                             const casc_options* opts, casc_report** out);
void casc_report_free(casc_report* r);

const char* casc_report_event(const casc_report* r);
/* "SECURE", "PARTIAL_COLLAPSE", or "SYSTEM_BLACKOUT" */
const char* casc_report_outcome(const casc_report* r);
int casc_report_stage_count(const casc_report* r);
int casc_report_truncated(const casc_report* r);
int casc_report_any_unresolved(const casc_report* r);
int casc_report_has_collapse(const casc_report* r);
casc_status casc_report_json(const casc_report* r, char** out);
casc_status casc_report_area_csv(const casc_report* r,
                                 const casc_network* net, char** out);

/* ---- contingency sets ------------------------------------------------ */

typedef struct casc_report_set casc_report_set;

/* Runs one cascade per event over `parallelism` workers. Results keep the
 * input order and do not depend on the parallelism level. */
casc_status casc_run_contingency_set(const casc_network* net,
                                     const char* const* events, int n_events,
                                     const casc_options* opts,
                                     int parallelism, casc_report_set** out);
void casc_report_set_free(casc_report_set* s);

int casc_report_set_count(const casc_report_set* s);
const casc_report* casc_report_set_get(const casc_report_set* s, int i);
casc_status casc_report_set_summary_csv(const casc_report_set* s, char** out);
/* Writes per-event JSON reports, summary.csv, and per-event area CSVs for
 * collapsed outcomes into out_dir, creating the directory if needed. */
casc_status casc_report_set_emit(const casc_report_set* s,
                                 const casc_network* net,
                                 const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif

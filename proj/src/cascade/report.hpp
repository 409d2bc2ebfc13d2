#ifndef CASCSIM_CASCADE_REPORT_HPP
#define CASCSIM_CASCADE_REPORT_HPP

#include <json.hpp>
#include <string>
#include <vector>

#include "cascade/cascade.hpp"

namespace cascsim::cascade {

nlohmann::ordered_json report_to_json(const CascadeReport& report);

// One line per report: event,outcome,stages,total_shed_mw,final_delta_f_hz.
// Shed totals over the final stage; the frequency column is taken from the
// largest converged island at the final stage and left empty if none.
std::string summary_csv(const std::vector<CascadeReport>& reports);

// area,aggregate_if_pu,bus_count aggregated over converged islands at the
// final stage, grouped by bus area.
std::string area_csv(const net::Network& net, const CascadeReport& report);

// Whether the final stage left any island collapsed (the area breakdown is
// only written for these).
bool has_collapse(const CascadeReport& report);

// "trip:branch:5" -> "trip_branch_5" for use in file names.
std::string event_file_stem(const net::Event& event);

// Writes <event>.json per report, summary.csv, and <event>_areas.csv for
// reports with a collapsed island at the final stage. Creates the directory
// if needed. Throws std::runtime_error on IO failure.
void emit_reports(const std::vector<CascadeReport>& reports,
                  const net::Network& net, const std::string& out_dir);

}  // namespace cascsim::cascade

#endif

#include "cascade/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

namespace cascsim::cascade {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

nlohmann::ordered_json island_json(const IslandRecord& isl) {
  nlohmann::ordered_json j;
  j["buses"] = isl.buses;
  j["status"] = to_string(isl.status);
  if (isl.solved) {
    j["delta_f_hz"] = isl.delta_f;
    j["max_if_pu"] = isl.max_if;
    j["worst_if_bus"] = isl.worst_if_bus;
  } else {
    j["delta_f_hz"] = nullptr;
    j["max_if_pu"] = nullptr;
    j["worst_if_bus"] = nullptr;
  }
  j["shed_mw"] = isl.shed_mw;
  return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const CascadeReport& report) {
  nlohmann::ordered_json j;
  j["event"] = net::format_event(report.event);
  j["outcome"] = to_string(report.outcome);
  j["truncated"] = report.truncated;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& st : report.stages) {
    nlohmann::ordered_json js;
    js["stage"] = st.stage;
    js["trips"] = nlohmann::ordered_json::array();
    for (const auto& t : st.trips) js["trips"].push_back(net::format_event(t));
    js["islands"] = nlohmann::ordered_json::array();
    for (const auto& isl : st.islands) js["islands"].push_back(island_json(isl));
    js["violations"] = nlohmann::ordered_json::array();
    for (const auto& v : st.violations) {
      nlohmann::ordered_json jv;
      jv["kind"] = v.kind == ViolationRec::Kind::branch_overload
                       ? "branch_overload"
                       : "gen_voltage";
      jv["id"] = v.id;
      jv["observed_pu"] = v.observed;
      jv["limit_pu"] = v.limit;
      js["violations"].push_back(jv);
    }
    j["stages"].push_back(js);
  }
  return j;
}

std::string summary_csv(const std::vector<CascadeReport>& reports) {
  std::string out = "event,outcome,stages,total_shed_mw,final_delta_f_hz\n";
  for (const auto& r : reports) {
    double shed = 0;
    const IslandRecord* biggest = nullptr;
    if (!r.stages.empty()) {
      for (const auto& isl : r.stages.back().islands) {
        shed += isl.shed_mw;
        if (isl.solved &&
            (!biggest || isl.buses.size() > biggest->buses.size()))
          biggest = &isl;
      }
    }
    out += net::format_event(r.event) + ',' + to_string(r.outcome) + ',' +
           std::to_string(r.stages.size()) + ',' + fmt(shed) + ',' +
           (biggest ? fmt(biggest->delta_f) : std::string()) + '\n';
  }
  return out;
}

bool has_collapse(const CascadeReport& report) {
  if (report.stages.empty()) return false;
  for (const auto& isl : report.stages.back().islands)
    if (isl.status == IslandStatus::collapsed) return true;
  return false;
}

std::string area_csv(const net::Network& net, const CascadeReport& report) {
  std::map<int, std::pair<double, int>> by_area;  // area -> (sum, count)
  if (!report.stages.empty()) {
    for (const auto& isl : report.stages.back().islands) {
      if (!isl.solved) continue;
      for (const auto& [bus_id, mag] : isl.bus_if) {
        int area = net.buses[net.bus_index(bus_id)].area;
        by_area[area].first += mag;
        by_area[area].second += 1;
      }
    }
  }
  std::string out = "area,aggregate_if_pu,bus_count\n";
  for (const auto& [area, agg] : by_area)
    out += std::to_string(area) + ',' + fmt(agg.first) + ',' +
           std::to_string(agg.second) + '\n';
  return out;
}

std::string event_file_stem(const net::Event& event) {
  std::string s = net::format_event(event);
  for (char& c : s)
    if (c == ':') c = '_';
  return s;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path);
}

}  // namespace

void emit_reports(const std::vector<CascadeReport>& reports,
                  const net::Network& net, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& r : reports) {
    std::string stem = out_dir + "/" + event_file_stem(r.event);
    write_file(stem + ".json", report_to_json(r).dump(2) + "\n");
    if (has_collapse(r)) write_file(stem + "_areas.csv", area_csv(net, r));
  }
  write_file(out_dir + "/summary.csv", summary_csv(reports));
}

}  // namespace cascsim::cascade

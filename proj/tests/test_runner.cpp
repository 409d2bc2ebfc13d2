#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cascade/report.hpp"
#include "net/case_io.hpp"
#include "net/network.hpp"
#include "runner/contingency.hpp"

using namespace cascsim;
using cascade::CascadeReport;
using cascade::Outcome;

namespace {

net::Network fixture(const std::string& name) {
  return net::parse_case_file(std::string(CASCSIM_DATA_DIR) + "/" + name);
}

net::Event ev(net::EventKind kind, int target = 0) {
  net::Event e;
  e.kind = kind;
  e.target = target;
  return e;
}

// A mixed bag on the fourteen-bus case: the quiet base point, line trips
// that cascade for one to three stages, and machine trips covering a secure
// redispatch and an island the solver cannot balance at all.
std::vector<net::Event> mixed_events() {
  using net::EventKind;
  std::vector<net::Event> events;
  events.push_back(ev(EventKind::none));
  for (int b : {1, 2, 3, 7, 10, 15}) events.push_back(ev(EventKind::trip_branch, b));
  for (int g : {1, 2, 5}) events.push_back(ev(EventKind::trip_gen, g));
  return events;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("worker count never changes the answer") {
  auto net = fixture("ieee14.json");
  auto events = mixed_events();
  cascade::CascadeParams params;

  auto serial = runner::run_contingency_set(net, events, params, 1);
  auto parallel = runner::run_contingency_set(net, events, params, 8);

  REQUIRE(serial.size() == events.size());
  REQUIRE(parallel.size() == events.size());
  for (size_t i = 0; i < events.size(); ++i) {
    CHECK(serial[i].event.kind == events[i].kind);
    CHECK(serial[i].event.target == events[i].target);
    CHECK(cascade::report_to_json(serial[i]).dump(2) ==
          cascade::report_to_json(parallel[i]).dump(2));
  }
  CHECK(cascade::summary_csv(serial) == cascade::summary_csv(parallel));

  // Emitted artifacts match file for file as well.
  namespace fs = std::filesystem;
  fs::path base = fs::temp_directory_path() / "cascsim_runner_test";
  fs::remove_all(base);
  cascade::emit_reports(serial, net, (base / "serial").string());
  cascade::emit_reports(parallel, net, (base / "parallel").string());

  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(base / "serial"))
    names.insert(entry.path().filename().string());
  std::set<std::string> names8;
  for (const auto& entry : fs::directory_iterator(base / "parallel"))
    names8.insert(entry.path().filename().string());
  CHECK(names == names8);
  CHECK(names.count("summary.csv") == 1);
  CHECK(names.count("none.json") == 1);
  CHECK(names.count("trip_branch_1.json") == 1);
  for (const auto& name : names)
    CHECK(slurp(base / "serial" / name) == slurp(base / "parallel" / name));
  fs::remove_all(base);
}

TEST_CASE("fourteen-bus contingency outcomes hold steady") {
  auto net = fixture("ieee14.json");
  auto events = mixed_events();
  cascade::CascadeParams params;
  auto reports = runner::run_contingency_set(net, events, params, 4);

  // (outcome, stage count) per event, in input order.
  std::vector<std::pair<Outcome, size_t>> expected = {
      {Outcome::secure, 1},           // none
      {Outcome::partial_collapse, 2},  // branch 1
      {Outcome::partial_collapse, 2},  // branch 2
      {Outcome::partial_collapse, 3},  // branch 3
      {Outcome::partial_collapse, 3},  // branch 7
      {Outcome::partial_collapse, 2},  // branch 10
      {Outcome::partial_collapse, 3},  // branch 15
      {Outcome::partial_collapse, 1},  // gen 1
      {Outcome::secure, 1},            // gen 2
      {Outcome::secure, 1},            // gen 5
  };
  REQUIRE(reports.size() == expected.size());
  for (size_t i = 0; i < reports.size(); ++i) {
    CHECK(reports[i].outcome == expected[i].first);
    CHECK(reports[i].stages.size() == expected[i].second);
  }

  // Losing the big machine leaves an island the solver cannot balance;
  // it stays unresolved rather than pretending, and the summary leaves the
  // frequency column empty for it.
  CHECK(reports[7].any_unresolved());
  std::string csv = cascade::summary_csv(reports);
  CHECK(csv.find("trip:gen:1,PARTIAL_COLLAPSE,1,0,\n") != std::string::npos);
  CHECK(csv.find("none,SECURE,1,0,-0.1079775745\n") != std::string::npos);
}

TEST_CASE("empty event set yields an empty result") {
  auto net = fixture("ieee14.json");
  cascade::CascadeParams params;
  auto reports = runner::run_contingency_set(net, {}, params, 8);
  CHECK(reports.empty());
}

}  // TEST_SUITE

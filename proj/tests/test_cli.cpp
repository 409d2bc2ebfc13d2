// End-to-end checks of the command line tool: exit codes, the stdout/stderr
// split, and emitted report files. Each case shells out to the built binary.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Runs the tool with the given arguments, capturing both streams.
RunResult cli(const std::string& args) {
  fs::path tmp = fs::temp_directory_path() / "cascsim_cli_test";
  fs::create_directories(tmp);
  fs::path out = tmp / "stdout.txt";
  fs::path err = tmp / "stderr.txt";
  std::string cmd = std::string(CASCSIM_CLI_PATH) + " " + args + " > " +
                    out.string() + " 2> " + err.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string data(const std::string& name) {
  return std::string(CASCSIM_DATA_DIR) + "/" + name;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate: clean case passes, missing file fails") {
  auto ok = cli("validate " + data("ieee14.json"));
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find(": ok (14 buses, 20 branches") != std::string::npos);

  auto missing = cli("validate /no/such/case.json");
  CHECK(missing.exit_code == 1);
  CHECK(missing.err.find("error:") != std::string::npos);

  auto usage = cli("validate");
  CHECK(usage.exit_code != 0);
}

TEST_CASE("solve: json goes to stdout and shedding reproduces itself") {
  auto r = cli("solve --json --lf 4.2 " + data("ieee14.json"));
  CHECK(r.exit_code == 0);
  REQUIRE(!r.out.empty());
  CHECK(r.out[0] == '{');
  auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["islands"].size() == 1);
  CHECK(j["islands"][0]["state"] == "FEASIBLE");
  CHECK(j["islands"][0]["delta_f_hz"].get<double>() ==
        doctest::Approx(-0.4890558578150193).epsilon(1e-9));
  CHECK(j["islands"][0]["shed_mw"].get<double>() ==
        doctest::Approx(184.926).epsilon(1e-9));
}

TEST_CASE("solve: infeasible island exits 2") {
  auto r = cli("solve " + data("six_bus_area.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("INFEASIBLE") != std::string::npos);
}

TEST_CASE("run: csv on stdout, progress on stderr") {
  auto r = cli("run --event none " + data("ieee14.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "event,outcome,stages,total_shed_mw,final_delta_f_hz\n"
        "none,SECURE,1,0,-0.1079775745\n");
  CHECK(r.err.find("none: SECURE in 1 stage(s)") != std::string::npos);
}

TEST_CASE("run: insecure events exit 2, unresolved islands exit 3") {
  auto insecure =
      cli("run --event trip:branch:29 --event none " + data("grid30.json"));
  CHECK(insecure.exit_code == 2);
  // Input order survives into the summary.
  CHECK(insecure.out.find("trip:branch:29,PARTIAL_COLLAPSE,2,") <
        insecure.out.find("none,SECURE,1,"));

  auto unresolved = cli("run --event trip:gen:1 --event none " +
                        data("ieee14.json"));
  CHECK(unresolved.exit_code == 3);
}

TEST_CASE("run: --out writes files instead of stdout") {
  fs::path dir = fs::temp_directory_path() / "cascsim_cli_test" / "reports";
  fs::remove_all(dir);
  auto r = cli("run --event trip:branch:29 --out " + dir.string() + " " +
               data("grid30.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.out.empty());
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "trip_branch_29.json"));
  // The split leaves a collapsed island, so the area rollup appears too.
  CHECK(fs::exists(dir / "trip_branch_29_areas.csv"));
  auto j = nlohmann::json::parse(slurp(dir / "trip_branch_29.json"));
  CHECK(j["outcome"] == "PARTIAL_COLLAPSE");
  fs::remove_all(dir);
}

TEST_CASE("run: every branch of the parallel pair, one flag") {
  auto r = cli("run --all-branches " + data("three_bus_parallel.json"));
  CHECK(r.exit_code == 2);
  int lines = 0;
  for (char c : r.out) lines += c == '\n';
  CHECK(lines == 4);  // header + one row per branch
  CHECK(r.out.find("trip:branch:1,PARTIAL_COLLAPSE,") != std::string::npos);
}

TEST_CASE("run: argument errors exit 1 with a message") {
  auto none = cli("run " + data("ieee14.json"));
  CHECK(none.exit_code == 1);
  CHECK(none.err.find("no events given") != std::string::npos);

  auto bad = cli("run --event trip:widget:1 " + data("ieee14.json"));
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("event spec") != std::string::npos);

  auto badlf = cli("run --lf -1 --event none " + data("ieee14.json"));
  CHECK(badlf.exit_code != 0);
}

}  // TEST_SUITE

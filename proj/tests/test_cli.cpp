#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

namespace {

struct CmdResult {
  int rc = -1;
  std::string out;
};

std::string cli_path() {
  const char* bin = std::getenv("FTFLOOR_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "FTFLOOR_BIN must point at the ftfloor binary");
  return bin;
}

std::string data_dir() {
  const char* data = std::getenv("FTFLOOR_DATA");
  REQUIRE_MESSAGE(data != nullptr, "FTFLOOR_DATA must point at the data directory");
  return data;
}

// args is appended verbatim after the binary; stderr is dropped unless the
// caller folds it in with 2>&1.
CmdResult run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult result;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.out.append(buf.data(), n);
  const int status = pclose(pipe);
  result.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string line;
  for (char c : text) {
    if (c == '\n') {
      out.push_back(line);
      line.clear();
    } else {
      line += c;
    }
  }
  if (!line.empty()) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("catalog counts prints the totals footer") {
  CmdResult r = run_cli("catalog counts 2>/dev/null");
  CHECK(r.rc == 0);
  CHECK(r.out.find("base: 67, total: 341") != std::string::npos);
  CHECK(r.out.find("nominal catalog size is 336") != std::string::npos);
  CHECK(r.out.find("pickUpAndTransport (72)") != std::string::npos);
}

TEST_CASE("catalog list emits one url per service") {
  CmdResult r = run_cli("catalog list 2>/dev/null");
  CHECK(r.rc == 0);
  CHECK(lines_of(r.out).size() == 341);

  CmdResult two = run_cli("--floors 2 catalog list 2>/dev/null");
  CHECK(two.rc == 0);
  CHECK(lines_of(two.out).size() == 644);
}

TEST_CASE("config file via environment variable and --config flag") {
  const std::string path = "/tmp/ftfloor_cli_test.conf";
  std::ofstream(path) << "[factory]\nfloors = 2\n";

  // env var in front of the command line reaches the tool through the shell
  const std::string cmd = "FTFLOOR_CONFIG=" + path + " " + cli_path() + " catalog list 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  pclose(pipe);
  CHECK(lines_of(out).size() == 644);

  CmdResult flagged = run_cli("--config " + path + " catalog list 2>/dev/null");
  CHECK(flagged.rc == 0);
  CHECK(lines_of(flagged.out).size() == 644);
  std::remove(path.c_str());
}

TEST_CASE("invoke runs one service against a scenario") {
  const std::string url =
      "'http://127.0.0.1:5000/vgr/pick_up_and_transport?machine=vgr_1&start=sink_1&end=oven'";
  CmdResult ok = run_cli("invoke " + url + " --scenario " + data_dir() +
                         "/single_workpiece.scenario 2>/dev/null");
  CHECK(ok.rc == 0);
  CHECK(ok.out.find("\"status\":\"ok\"") != std::string::npos);
  CHECK(ok.out.find("start_time") != std::string::npos);

  CmdResult denied = run_cli("invoke " + url + " 2>/dev/null");  // empty factory
  CHECK(denied.rc == 1);
  CHECK(denied.out.find("precondition_violated") != std::string::npos);

  CmdResult unknown =
      run_cli("invoke 'http://127.0.0.1:5000/ov/teleport?machine=ov_1' 2>/dev/null");
  CHECK(unknown.rc == 1);

  CmdResult sensing = run_cli("invoke 'http://127.0.0.1:5000/ov/state_of_machine?machine=ov_1' "
                              "2>/dev/null");
  CHECK(sensing.rc == 0);
  CHECK(sensing.out.find("\"state\":\"ready\"") != std::string::npos);
}

TEST_CASE("workflow run executes the bundled flow") {
  CmdResult ok = run_cli("workflow run " + data_dir() + "/burn_and_store.workflow --scenario " +
                         data_dir() + "/single_workpiece.scenario --auto-complete-human "
                         "2>/dev/null");
  CHECK(ok.rc == 0);
  auto trace = lines_of(ok.out);
  CHECK(trace.size() == 5);
  CHECK(trace[0].find("\"step\":1") != std::string::npos);

  CmdResult aborted = run_cli("workflow run " + data_dir() +
                              "/burn_and_store.workflow --auto-complete-human 2>&1");
  CHECK(aborted.rc == 1);
  CHECK(aborted.out.find("workflow aborted at step 1") != std::string::npos);
}

TEST_CASE("pddl plan solves and optionally replays") {
  const std::string base = "pddl plan --goal " + data_dir() + "/burn_and_store.goal --scenario " +
                           data_dir() + "/single_workpiece.scenario";
  CmdResult plan = run_cli(base + " 2>/dev/null");
  CHECK(plan.rc == 0);
  auto steps = lines_of(plan.out);
  REQUIRE(steps.size() == 4);
  CHECK(steps[0] == "(pick_up_and_transport vgr_1 wp_1 sink_1 oven ov_1)");
  CHECK(steps[3] == "(store hbw_1 wp_1 high_bay_warehouse hbw_1_slot_1)");

  CmdResult replayed = run_cli(base + " --replay 2>/dev/null");
  CHECK(replayed.rc == 0);
  CHECK(lines_of(replayed.out).size() == 8);  // 4 actions + 4 service urls

  CmdResult diag = run_cli(base + " 2>&1 >/dev/null");
  CHECK(diag.out.find("plan found: 4 steps") != std::string::npos);
}

TEST_CASE("pddl export commands emit checkable documents") {
  CmdResult domain = run_cli("pddl export-domain 2>/dev/null");
  CHECK(domain.rc == 0);
  CHECK(domain.out.find("(define (domain") != std::string::npos);

  CmdResult problem = run_cli("pddl export-problem --goal " + data_dir() +
                              "/burn_and_store.goal --scenario " + data_dir() +
                              "/single_workpiece.scenario 2>/dev/null");
  CHECK(problem.rc == 0);
  CHECK(problem.out.find("(define (problem") != std::string::npos);
  CHECK(problem.out.find("(:goal") != std::string::npos);
}

TEST_CASE("kb query prints the resolved bindings") {
  CmdResult r = run_cli(
      "kb query --service "
      "'http://127.0.0.1:5000/vgr/pick_up_and_transport?machine=vgr_1&start=sink_1&end=oven' "
      "--role pre 2>/dev/null");
  CHECK(r.rc == 0);
  auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].find("Precondition_OV_1_State_Of_Machine_Ready") != std::string::npos);
  CHECK(rows[4].find("Precondition_WT_1_Check_Position_Oven_False") != std::string::npos);
}

TEST_CASE("validate checks the ontology and the model end to end") {
  CmdResult r = run_cli("validate 2>&1");
  CHECK(r.rc == 0);
  CHECK(r.out.find("validate: ok (2071 triples, 341 services)") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli("2>&1").rc == 2);
  CHECK(run_cli("frobnicate 2>&1").rc == 2);
  CHECK(run_cli("kb query --service x --role during 2>&1").rc == 2);
  CHECK(run_cli("pddl plan 2>&1").rc == 2);  // --goal is required
  CHECK(run_cli("--help 2>&1").rc == 0);
  CHECK(run_cli("--floors 99 catalog list 2>&1").rc == 2);
}

// Acceptance gate: one self-contained check per release criterion, one
// PASS/FAIL line each on stdout. Exits non-zero if any check fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ftfloor/engine.hpp"
#include "ftfloor/gateway.hpp"
#include "ftfloor/kb.hpp"
#include "ftfloor/pddl.hpp"
#include "ftfloor/workflow.hpp"

using namespace ftfloor;
using json = nlohmann::json;

namespace {

struct CheckFailure {
  std::string why;
};

void require(bool ok, const std::string& why) {
  if (!ok) throw CheckFailure{why};
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

std::shared_ptr<const ServiceCatalog> catalog_ptr() {
  static auto catalog = std::make_shared<const ServiceCatalog>(generate(default_topology()));
  return catalog;
}

FactoryState state_with(const std::string& scenario) {
  return initial_state(catalog_ptr()->topology(), parse_scenario(scenario));
}

std::string data_file(const std::string& name) {
  const char* dir = std::getenv("FTFLOOR_DATA");
  require(dir != nullptr, "FTFLOOR_DATA is not set");
  std::ifstream in(std::string(dir) + "/" + name);
  require(in.good(), "cannot open " + name);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kTransportUrl =
    "http://127.0.0.1:5000/vgr/pick_up_and_transport?machine=vgr_1&start=sink_1&end=oven";

// --- the ten checks ----------------------------------------------------

void check_catalog_shape() {
  const auto t0 = std::chrono::steady_clock::now();
  const ServiceCatalog catalog = generate(default_topology());
  const double elapsed = ms_since(t0);

  require(catalog.base_services().size() == 67,
          "expected 67 base services, got " + std::to_string(catalog.base_services().size()));
  require(catalog.services().size() == 341,
          "expected 341 services, got " + std::to_string(catalog.services().size()));

  std::map<std::pair<std::string, std::string>, int> cells;
  for (const auto& [url, svc] : catalog.services()) cells[{svc.provider, svc.base_name}]++;
  require(cells[{"vgr_1", "pickUpAndTransport"}] == 72, "pickUpAndTransport grid is not 72");
  require(cells[{"hbw_1", "changeBuckets"}] == 81, "changeBuckets grid is not 81");
  require(cells[{"sm_1", "sort"}] == 20, "sort grid is not 20");
  require(cells[{"hbw_1", "store"}] == 10, "store grid is not 10");

  const std::string table = counts_table(catalog);
  require(table.find("base: 67, total: 341") != std::string::npos, "totals footer missing");
  require(table.find("nominal catalog size is 336") != std::string::npos,
          "the 336-vs-341 note is not reported");
  require(elapsed < 1000.0, "generation took " + std::to_string(elapsed) + " ms");
}

void check_condition_fidelity() {
  KnowledgeBase kb(as_triples(*catalog_ptr()));
  const std::vector<std::string> expected_pre{
      "Precondition_OV_1_State_Of_Machine_Ready",
      "Precondition_OV_1_Status_Of_Light_Barrier_5_Interrupted_False",
      "Precondition_SM_1_Status_Of_Light_Barrier_6_Interrupted_True",
      "Precondition_VGR_1_State_Of_Machine_Ready",
      "Precondition_WT_1_Check_Position_Oven_False",
  };
  auto pre = kb.conditions_of(kTransportUrl, ConditionRole::pre);
  require(pre.size() == expected_pre.size(),
          "expected 5 preconditions, got " + std::to_string(pre.size()));
  for (std::size_t i = 0; i < pre.size(); ++i)
    require(pre[i].condition.local_name() == expected_pre[i],
            "precondition " + std::to_string(i) + " is " + pre[i].condition.local_name());

  auto post = kb.conditions_of(kTransportUrl, ConditionRole::post);
  require(post.size() == 1, "expected one postcondition");
  require(post[0].condition.local_name() ==
              "Postcondition_OV_1_Status_Of_Light_Barrier_5_Interrupted_True",
          "postcondition is " + post[0].condition.local_name());
}

void check_workflow_end_to_end() {
  const auto t0 = std::chrono::steady_clock::now();
  FactoryState initial = state_with("workpiece wp_1 sink_1 red\n");
  auto engine = std::make_shared<Engine>(catalog_ptr(), initial);
  Gateway gateway(engine, initial);

  Workflow wf = parse_workflow(data_file("burn_and_store.workflow"));
  WorkflowResult result = run_workflow(wf, local_client(gateway), true);
  require(result.completed, "workflow aborted at step " +
                                std::to_string(result.steps.empty() ? 0 : result.steps.back().index));

  std::string last_end = "1970-01-01T00:00:00.000Z";
  for (const StepResult& step : result.steps) {
    if (step.kind != "service") continue;
    require(step.outcome == "ok", "step " + std::to_string(step.index) + ": " + step.outcome);
    require(step.response.at("start_time") >= last_end,
            "step " + std::to_string(step.index) + " started before its predecessor ended");
    last_end = step.response.at("end_time");
  }

  const FactoryState final_state = engine->snapshot();
  require(final_state.workpieces.at("wp_1").flags.count("burned") == 1, "wp_1 is not burned");
  bool racked = false;
  for (const auto& [slot, wp] : final_state.slots.at("hbw_1")) racked |= (wp == "wp_1");
  require(racked, "wp_1 did not end up in a rack slot");
  require(ms_since(t0) < 2000.0, "simulated run exceeded 2 s wall time");
}

void check_mutual_exclusion() {
  Engine engine(catalog_ptr(), state_with(""));
  const std::string url = "http://127.0.0.1:5000/vgr/calibrate?machine=vgr_1&reference=ref_1";
  std::vector<std::thread> workers;
  std::mutex mu;
  std::vector<Ticket> tickets;
  for (int i = 0; i < 10; ++i)
    workers.emplace_back([&] {
      Ticket t = engine.submit(url);
      std::lock_guard lk(mu);
      tickets.push_back(t);
    });
  for (auto& w : workers) w.join();
  engine.run_until_idle();

  std::sort(tickets.begin(), tickets.end());  // submission order == ticket order
  auto records = engine.records();
  require(records.size() == 10, "expected 10 records, got " + std::to_string(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    require(records[i].outcome == Outcome::ok,
            "record " + std::to_string(i) + ": " + std::string(to_string(records[i].outcome)));
    require(records[i].ticket == tickets[i], "completion order differs from submission order");
    if (i > 0)
      require(records[i].start_ms >= records[i - 1].end_ms,
              "intervals overlap at record " + std::to_string(i));
  }
}

void check_sensing_liveness() {
  // simulated clock: a probe submitted mid-burn resolves before the burn ends
  Engine sim(catalog_ptr(), state_with("workpiece wp_1 oven\n"));
  Ticket burn = sim.submit("http://127.0.0.1:5000/ov/burn?machine=ov_1&duration=standard");
  sim.run_scan();
  Ticket probe = sim.submit("http://127.0.0.1:5000/ov/status_of_light_barrier?machine=ov_1&lb=5");
  sim.run_scan();
  auto probe_rec = sim.poll(probe);
  require(probe_rec.has_value(), "probe did not resolve during the burn");
  require(!sim.poll(burn).has_value(), "burn finished before the probe was answered");
  ExecutionRecord burn_rec = sim.await(burn);
  require(probe_rec->end_ms < burn_rec.end_ms, "probe answered after the burn's end_time");

  // real clock: depth-10 actuation queue, read latency stays under 100 ms
  Engine real(catalog_ptr(), state_with(""), ClockMode::real, 10);
  real.start_scheduler();
  for (int i = 0; i < 10; ++i)
    real.submit("http://127.0.0.1:5000/vgr/calibrate?machine=vgr_1&reference=ref_1");
  std::this_thread::sleep_for(std::chrono::milliseconds(5));
  const auto t0 = std::chrono::steady_clock::now();
  auto reading = real.sense("http://127.0.0.1:5000/vgr/state_of_machine?machine=vgr_1");
  const double latency = ms_since(t0);
  real.stop_scheduler();
  require(reading.has_value(), "sensing returned nothing under load");
  require(latency < 100.0, "read latency " + std::to_string(latency) + " ms");
}

void check_guarded_execution() {
  FactoryState initial = state_with("workpiece wp_1 sink_1\nworkpiece wp_2 oven\n");
  auto engine = std::make_shared<Engine>(catalog_ptr(), initial);
  Gateway gateway(engine, initial);

  const std::string before = gateway.handle("GET", "/admin/state").body;
  HttpResponse res = gateway.handle("GET", kTransportUrl);
  require(res.status == 422, "expected 422, got " + std::to_string(res.status));
  json doc = json::parse(res.body);
  require(doc.at("failed_condition") ==
              "Precondition_OV_1_Status_Of_Light_Barrier_5_Interrupted_False",
          std::string("failed_condition is ") + doc.at("failed_condition").get<std::string>());
  require(gateway.handle("GET", "/admin/state").body == before,
          "simulator state changed across the rejected call");
}

void check_fault_propagation() {
  KnowledgeBase kb(as_triples(*catalog_ptr()));
  auto unavailable = kb.unavailable_services(Iri::local("ov_1"));

  std::set<std::string> brute;
  for (const auto& [url, svc] : catalog_ptr()->services()) {
    if (svc.provider == "ov_1") {
      brute.insert(url);
      continue;
    }
    for (const ConditionBinding& b : svc.preconditions) {
      if (b.required_key == "state" && b.required_value == "ready" &&
          b.checker_url.find("machine=ov_1") != std::string::npos) {
        brute.insert(url);
        break;
      }
    }
  }
  require(std::set<std::string>(unavailable.begin(), unavailable.end()) == brute,
          "unavailable_services disagrees with the per-service scan (" +
              std::to_string(unavailable.size()) + " vs " + std::to_string(brute.size()) + ")");

  Engine engine(catalog_ptr(), state_with("workpiece wp_1 oven\n"));
  engine.set_fault("ov_1", true);
  ExecutionRecord rec = engine.await(
      engine.submit("http://127.0.0.1:5000/ov/burn?machine=ov_1&duration=standard"));
  require(rec.outcome == Outcome::machine_error,
          std::string("expected machine_error, got ") + std::string(to_string(rec.outcome)));
  require(rec.failed_condition.has_value() &&
              rec.failed_condition->local_name() == "Precondition_OV_1_State_Of_Machine_Ready",
          "failure does not name the readiness precondition");
}

void check_planning_round_trip() {
  const FactoryState st = state_with("workpiece wp_1 sink_1 red\n");
  const std::vector<std::string> goal{"(burned wp_1)", "(stored wp_1 hbw_1_slot_1)"};

  const auto t0 = std::chrono::steady_clock::now();
  pddl::PlanResult planned = pddl::solve(*catalog_ptr(), st, goal);
  const double elapsed = ms_since(t0);
  require(planned.found, "no plan: " + planned.reason);
  require(planned.plan.steps.size() == 4,
          "plan has " + std::to_string(planned.plan.steps.size()) + " steps");
  require(elapsed < 5000.0, "search took " + std::to_string(elapsed) + " ms");

  pddl::ReplayResult replayed = pddl::replay(*catalog_ptr(), st, planned.plan);
  require(replayed.ok, "replay failed: " + replayed.error);
  require(replayed.final_state.workpieces.at("wp_1").flags.count("burned") == 1,
          "replayed state is not burned");
  require(replayed.final_state.slots.at("hbw_1").at(1) == "wp_1",
          "replayed state does not store wp_1 in slot 1");

  auto domain_problems = pddl::check_domain(pddl::export_domain(*catalog_ptr()));
  require(domain_problems.empty(),
          "domain: " + (domain_problems.empty() ? "" : domain_problems.front()));
  auto problem_problems =
      pddl::check_problem(pddl::export_problem(*catalog_ptr(), st, goal));
  require(problem_problems.empty(),
          "problem: " + (problem_problems.empty() ? "" : problem_problems.front()));
}

void check_ontology_consistency() {
  KnowledgeBase kb(as_triples(*catalog_ptr()));
  KnowledgeBase reloaded = load_triples(dump_triples(kb));
  require(reloaded.size() == kb.size(), "round trip lost triples");
  auto report = reloaded.validate();
  require(report.empty(),
          std::to_string(report.size()) + " violations, first: " +
              (report.empty() ? "" : report.front().kind));
}

void check_query_latency() {
  KnowledgeBase kb(as_triples(*catalog_ptr()));
  std::vector<double> samples;
  for (const auto& [url, svc] : catalog_ptr()->services()) {
    const auto t0 = std::chrono::steady_clock::now();
    auto got = kb.conditions_of(url, ConditionRole::pre);
    samples.push_back(ms_since(t0));
    require(got == svc.preconditions, "bindings mismatch for " + url);
  }
  std::sort(samples.begin(), samples.end());
  const double median = samples[samples.size() / 2];
  require(median < 10.0, "median " + std::to_string(median) + " ms");
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    std::function<void()> run;
  };
  const std::vector<Criterion> criteria{
      {"catalog shape: 67 bases expand to 341 services with the size note", check_catalog_shape},
      {"condition fidelity: transport to the oven carries the canonical guard set",
       check_condition_fidelity},
      {"end-to-end workflow: burn and store completes on the simulated floor",
       check_workflow_end_to_end},
      {"mutual exclusion: 10 concurrent calibrates serialize in submission order",
       check_mutual_exclusion},
      {"sensing liveness: reads answer while actuations hold the floor",
       check_sensing_liveness},
      {"guarded execution: occupied oven rejects the transport with 422, state intact",
       check_guarded_execution},
      {"fault propagation: unavailable set matches the scan and burn cites readiness",
       check_fault_propagation},
      {"planning round trip: 4-step plan replays onto the simulator and exports parse",
       check_planning_round_trip},
      {"ontology consistency: reloaded catalog triples validate clean",
       check_ontology_consistency},
      {"query latency: condition retrieval stays under 10 ms median", check_query_latency},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string verdict = "PASS";
    std::string note;
    try {
      criteria[i].run();
    } catch (const CheckFailure& f) {
      verdict = "FAIL";
      note = f.why;
      ++failures;
    } catch (const std::exception& e) {
      verdict = "FAIL";
      note = std::string("unexpected error: ") + e.what();
      ++failures;
    }
    std::cout << verdict << "  " << (i + 1) << ". " << criteria[i].label
              << (note.empty() ? "" : " — " + note) << "\n";
  }
  std::cerr << "acceptance: " << (criteria.size() - failures) << "/" << criteria.size()
            << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}

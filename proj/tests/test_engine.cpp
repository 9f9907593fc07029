#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <random>
#include <thread>
#include <vector>

#include "ftfloor/engine.hpp"

using namespace ftfloor;

namespace {

std::shared_ptr<const ServiceCatalog> shared_catalog() {
  static auto catalog = std::make_shared<const ServiceCatalog>(generate(default_topology()));
  return catalog;
}

FactoryState state_with(const std::string& scenario) {
  return initial_state(shared_catalog()->topology(), parse_scenario(scenario));
}

const char* kBurn = "http://127.0.0.1:5000/ov/burn?machine=ov_1&duration=standard";
const char* kTransport =
    "http://127.0.0.1:5000/vgr/pick_up_and_transport?machine=vgr_1&start=sink_1&end=oven";
const char* kOvenState = "http://127.0.0.1:5000/ov/state_of_machine?machine=ov_1";

}  // namespace

TEST_CASE("evaluate_conditions walks bindings in order and short-circuits") {
  std::vector<ConditionBinding> bindings{
      {Iri::local("A"), "http://h/a", "state", "Ready"},
      {Iri::local("B"), "http://h/b", "interrupted", "false"},
      {Iri::local("C"), "http://h/c", "state", "ready"},
  };
  std::vector<std::string> calls;
  auto dispatch = [&](const std::string& url) -> std::optional<Reading> {
    calls.push_back(url);
    if (url == "http://h/a") return Reading{{"state", "ready"}};  // case-insensitive match
    if (url == "http://h/b") return Reading{{"interrupted", "true"}};
    return Reading{{"state", "ready"}};
  };

  ConditionCheck check = evaluate_conditions(bindings, dispatch);
  CHECK(!check.passed);
  CHECK(check.condition == Iri::local("B"));
  CHECK(check.observed == "true");
  CHECK(calls == std::vector<std::string>{"http://h/a", "http://h/b"});  // C never probed

  SUBCASE("unreachable checker") {
    auto down = [](const std::string&) -> std::optional<Reading> { return std::nullopt; };
    ConditionCheck c = evaluate_conditions(bindings, down);
    CHECK(!c.passed);
    CHECK(c.observed == "unreachable");
  }
  SUBCASE("missing key") {
    auto odd = [](const std::string&) -> std::optional<Reading> {
      return Reading{{"other", "1"}};
    };
    ConditionCheck c = evaluate_conditions(bindings, odd);
    CHECK(!c.passed);
    CHECK(c.observed == "absent");
  }
  SUBCASE("all pass") {
    auto yes = [&](const std::string& url) -> std::optional<Reading> {
      if (url == "http://h/b") return Reading{{"interrupted", "False"}};
      return Reading{{"state", "READY"}};
    };
    CHECK(evaluate_conditions(bindings, yes).passed);
  }
}

TEST_CASE("single actuation lifecycle in simulated time") {
  Engine engine(shared_catalog(), state_with("workpiece wp_1 sink_1\n"));
  Ticket t = engine.submit(kTransport);
  CHECK(!engine.idle());
  ExecutionRecord rec = engine.await(t);
  CHECK(rec.outcome == Outcome::ok);
  CHECK(rec.start_ms == 0);
  CHECK(rec.end_ms == 5000);
  CHECK(rec.response.at("status") == "ok");
  CHECK(rec.response.at("start_time") == "1970-01-01T00:00:00.000Z");
  CHECK(rec.response.at("end_time") == "1970-01-01T00:00:05.000Z");
  CHECK(engine.idle());
  CHECK(engine.now_ms() == 5000);
  CHECK(occupant(engine.snapshot(), "oven") == "wp_1");
}

TEST_CASE("unknown service and unknown ticket") {
  Engine engine(shared_catalog(), state_with(""));
  Ticket t = engine.submit("http://127.0.0.1:5000/ov/explode?machine=ov_1");
  ExecutionRecord rec = engine.await(t);
  CHECK(rec.outcome == Outcome::unknown_service);
  CHECK(rec.response.at("error_type") == "unknown_service");
  CHECK_THROWS_AS(engine.await(t + 99), UnknownTicketError);
  CHECK_THROWS_AS((void)engine.poll(t + 99), UnknownTicketError);
  CHECK(engine.sense(kBurn) == std::nullopt);        // actuation, not sensing
  CHECK(engine.sense("http://x/y?machine=ov_1") == std::nullopt);
}

TEST_CASE("precondition failure picks the first violated binding in iri order") {
  Engine engine(shared_catalog(), state_with(""));  // empty factory: nothing to pick up
  ExecutionRecord rec = engine.await(engine.submit(kTransport));
  CHECK(rec.outcome == Outcome::precondition_violated);
  REQUIRE(rec.failed_condition.has_value());
  CHECK(rec.failed_condition->local_name() ==
        "Precondition_SM_1_Status_Of_Light_Barrier_6_Interrupted_True");
  CHECK(rec.response.at("failed_condition") ==
        "Precondition_SM_1_Status_Of_Light_Barrier_6_Interrupted_True");
  CHECK(rec.start_ms == rec.end_ms);
  // nothing changed
  CHECK(dump_state(engine.snapshot()) == dump_state(state_with("")));
}

TEST_CASE("faulted machine rejects actuations and names the readiness guard") {
  Engine engine(shared_catalog(), state_with("workpiece wp_1 oven\nfault ov_1\n"));
  ExecutionRecord rec = engine.await(engine.submit(kBurn));
  CHECK(rec.outcome == Outcome::machine_error);
  REQUIRE(rec.failed_condition.has_value());
  CHECK(rec.failed_condition->local_name() == "Precondition_OV_1_State_Of_Machine_Ready");

  // sensing still answers while the machine is down
  auto sensed = engine.sense(kOvenState);
  REQUIRE(sensed.has_value());
  CHECK(sensed->response.at("state") == "error");

  engine.set_fault("ov_1", false);
  ExecutionRecord again = engine.await(engine.submit(kBurn));
  CHECK(again.outcome == Outcome::ok);
  CHECK_THROWS_AS(engine.set_fault("toaster_9", true), std::invalid_argument);
}

TEST_CASE("sensing answers while an actuation is in flight") {
  Engine engine(shared_catalog(), state_with("workpiece wp_1 oven\n"));
  Ticket burn = engine.submit(kBurn);
  engine.run_scan();  // burn is now in flight, clock has not advanced
  CHECK(!engine.poll(burn).has_value());

  Ticket probe = engine.submit(kOvenState);
  engine.run_scan();
  auto rec = engine.poll(probe);
  REQUIRE(rec.has_value());
  CHECK(rec->response.at("state") == "busy");
  CHECK(!engine.poll(burn).has_value());  // still burning
  CHECK(rec->end_ms < 8000);              // answered well before the burn completes

  ExecutionRecord done = engine.await(burn);
  CHECK(done.outcome == Outcome::ok);
  CHECK(done.end_ms == 8000);
  auto after = engine.sense(kOvenState);
  REQUIRE(after.has_value());
  CHECK(after->response.at("state") == "ready");
}

TEST_CASE("per-machine fifo: same-resource requests neither overlap nor reorder") {
  Engine engine(shared_catalog(), state_with(""));
  const std::string calibrate = "http://127.0.0.1:5000/vgr/calibrate?machine=vgr_1&reference=ref_1";
  REQUIRE(shared_catalog()->lookup(calibrate) != nullptr);
  std::vector<Ticket> tickets;
  for (int i = 0; i < 10; ++i) tickets.push_back(engine.submit(calibrate));
  engine.run_until_idle();

  std::vector<ExecutionRecord> order = engine.records();
  REQUIRE(order.size() == 10);
  for (std::size_t i = 0; i < order.size(); ++i) {
    CHECK(order[i].ticket == tickets[i]);  // completion order == submission order
    CHECK(order[i].outcome == Outcome::ok);
    if (i > 0) CHECK(order[i].start_ms >= order[i - 1].end_ms);  // no overlap
  }
}

TEST_CASE("disjoint resources overtake a blocked queue head") {
  Engine engine(shared_catalog(),
                state_with("workpiece wp_1 oven\nworkpiece wp_2 sm_1_entry red\n"));
  Ticket burn1 = engine.submit(kBurn);   // holds ov_1 for 8s
  Ticket burn2 = engine.submit(kBurn);   // queued behind burn1
  Ticket sort = engine.submit(
      "http://127.0.0.1:5000/sm/sort?machine=sm_1&color=red&ejection=sink_1");  // sm_1 only
  engine.run_until_idle();

  ExecutionRecord r1 = *engine.poll(burn1);
  ExecutionRecord r2 = *engine.poll(burn2);
  ExecutionRecord rs = *engine.poll(sort);
  CHECK(r1.outcome == Outcome::ok);
  CHECK(rs.outcome == Outcome::ok);
  CHECK(rs.start_ms == 0);            // started immediately despite the queue
  CHECK(r2.start_ms >= r1.end_ms);    // second burn waited for the oven
  // burn2 re-burns the same workpiece: still ok (idempotent flag set)
  CHECK(r2.outcome == Outcome::ok);
}

TEST_CASE("randomized load: every ticket resolves, busy machines never overlap") {
  auto catalog = shared_catalog();
  std::vector<std::string> urls;
  for (const auto& [url, svc] : catalog->services()) urls.push_back(url);

  std::mt19937 rng(424242);
  Engine engine(catalog,
                state_with("workpiece wp_1 sink_1 red\nworkpiece wp_2 sm_1_entry blue\n"
                           "workpiece wp_3 hbw_1_slot_2 white\n"));
  std::vector<std::pair<Ticket, std::string>> submitted;
  for (int i = 0; i < 1000; ++i) {
    std::string url = rng() % 8 == 0
                          ? "http://127.0.0.1:5000/nope/what?machine=unknown"
                          : urls[rng() % urls.size()];
    submitted.emplace_back(engine.submit(url), url);
  }
  engine.run_until_idle();
  CHECK(engine.idle());

  auto all = engine.records();
  REQUIRE(all.size() == submitted.size());
  for (const auto& [ticket, url] : submitted) {
    auto rec = engine.poll(ticket);
    REQUIRE(rec.has_value());
    CHECK(rec->service_url == url);
    CHECK(rec->end_ms >= rec->start_ms);
  }

  // per-provider busy intervals are pairwise disjoint
  std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> busy;
  for (const ExecutionRecord& r : all) {
    if (r.outcome != Outcome::ok) continue;
    const auto* svc = catalog->lookup(r.service_url);
    REQUIRE(svc != nullptr);
    if (svc->kind != ServiceKind::actuation) continue;
    for (const std::string& resource : svc->required_resources)
      busy[resource].emplace_back(r.start_ms, r.end_ms);
  }
  for (auto& [resource, spans] : busy) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
      CHECK_MESSAGE(spans[i].first >= spans[i - 1].second,
                    resource << " overlaps at " << spans[i].first);
  }

  // fifo among started pairs that contend for at least one shared resource
  std::vector<const ExecutionRecord*> started;
  for (const ExecutionRecord& r : all)
    if (r.outcome == Outcome::ok && catalog->lookup(r.service_url)->kind == ServiceKind::actuation)
      started.push_back(&r);
  for (std::size_t i = 0; i < started.size(); ++i) {
    const auto& ri = catalog->lookup(started[i]->service_url)->required_resources;
    for (std::size_t j = i + 1; j < started.size(); ++j) {
      const auto& rj = catalog->lookup(started[j]->service_url)->required_resources;
      const bool overlap = std::any_of(ri.begin(), ri.end(),
                                       [&](const std::string& r) { return rj.count(r) > 0; });
      if (!overlap) continue;
      if (started[i]->ticket < started[j]->ticket)
        CHECK(started[i]->start_ms <= started[j]->start_ms);
      else
        CHECK(started[j]->start_ms <= started[i]->start_ms);
    }
  }
}

TEST_CASE("dry-run failures surface the simulator's reason") {
  Engine engine(shared_catalog(), state_with("workpiece wp_1 sm_1_entry red\n"));
  ExecutionRecord rec = engine.await(engine.submit(
      "http://127.0.0.1:5000/sm/sort?machine=sm_1&color=blue&ejection=sink_1"));
  CHECK(rec.outcome == Outcome::not_applicable);
  CHECK(rec.response.at("error_type") == "not_applicable");

  std::string fill;
  for (int i = 1; i <= 9; ++i) fill += "workpiece f" + std::to_string(i) + " hbw_1_slot_" +
                                       std::to_string(i) + "\n";
  Engine full(shared_catalog(), state_with(fill + "workpiece wp_x high_bay_warehouse\n"));
  ExecutionRecord store = full.await(
      full.submit("http://127.0.0.1:5000/hbw/store?machine=hbw_1&slot=auto"));
  CHECK(store.outcome == Outcome::resource_full);
}

TEST_CASE("mid-flight fault turns the completion into machine_error") {
  Engine engine(shared_catalog(), state_with("workpiece wp_1 oven\n"));
  Ticket burn = engine.submit(kBurn);
  engine.run_scan();
  engine.set_fault("ov_1", true);
  engine.run_until_idle();
  ExecutionRecord rec = *engine.poll(burn);
  CHECK(rec.outcome == Outcome::machine_error);
  // the burn never committed
  CHECK(engine.snapshot().workpieces.at("wp_1").flags.count("burned") == 0);
}

TEST_CASE("runtime arguments pass through to the simulator") {
  Engine engine(shared_catalog(), state_with(""));
  ExecutionRecord rec = engine.await(engine.submit(
      "http://127.0.0.1:5000/wt/set_motor_speed?machine=wt_1&motor=rotation&speed=777"));
  CHECK(rec.outcome == Outcome::ok);
  auto speed = engine.sense(
      "http://127.0.0.1:5000/wt/get_motor_speed?machine=wt_1&motor=rotation");
  REQUIRE(speed.has_value());
  CHECK(speed->response.at("speed") == "777");
}

TEST_CASE("reset restores a given state and clears history effects") {
  Engine engine(shared_catalog(), state_with("workpiece wp_1 sink_1\n"));
  engine.await(engine.submit(kTransport));
  CHECK(occupant(engine.snapshot(), "oven") == "wp_1");
  engine.reset(state_with("workpiece wp_1 sink_1\n"));
  CHECK(occupant(engine.snapshot(), "sink_1") == "wp_1");
  CHECK(engine.now_ms() == 0);
  ExecutionRecord rec = engine.await(engine.submit(kTransport));
  CHECK(rec.outcome == Outcome::ok);
}

TEST_CASE("trace log lists one timestamped line per record") {
  Engine engine(shared_catalog(), state_with("workpiece wp_1 sink_1\n"));
  engine.await(engine.submit(kTransport));
  engine.await(engine.submit(kTransport));  // second one fails: sink empty now
  const std::string log = engine.trace_log();
  std::vector<std::string> lines;
  std::size_t at = 0;
  while (at < log.size()) {
    auto nl = log.find('\n', at);
    lines.push_back(log.substr(at, nl - at));
    at = nl + 1;
  }
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "ticket\turl\toutcome\tstart\tend\tfailed_condition");
  CHECK(lines[1].find("\tok\t1970-01-01T00:00:00.000Z\t1970-01-01T00:00:05.000Z\t-") !=
        std::string::npos);
  CHECK(lines[2].find("precondition_violated") != std::string::npos);
  // Both "sink occupied" and "oven free" fail on the retry; the report names the
  // first in condition-IRI order, which is the oven light barrier.
  CHECK(lines[2].find("Precondition_OV_1_Status_Of_Light_Barrier_5_Interrupted_False") !=
        std::string::npos);
}

TEST_CASE("read_station_rfid reports occupancy") {
  Engine engine(shared_catalog(), state_with("workpiece wp_1 sink_1 red\n"));
  CHECK(engine.read_station_rfid("sink_1") == Reading{{"tag", "wp_1"}});
  CHECK(engine.read_station_rfid("oven") == Reading{{"tag", "none"}});
  CHECK_THROWS_AS(engine.read_station_rfid("the_moon"), SensorError);
}

TEST_CASE("real-time mode schedules in the background at the configured scale") {
  Engine engine(shared_catalog(), state_with("workpiece wp_1 oven\n"), ClockMode::real, 10);
  engine.start_scheduler();
  const auto wall_start = std::chrono::steady_clock::now();

  Ticket burn = engine.submit(kBurn);  // 8 sim s -> 80 ms wall
  // a sensing probe while the burn holds the oven
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  auto probe = engine.sense(kOvenState);
  REQUIRE(probe.has_value());
  CHECK(probe->response.at("state") == "busy");

  ExecutionRecord rec = engine.await(burn);
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - wall_start)
                           .count();
  CHECK(rec.outcome == Outcome::ok);
  CHECK(rec.end_ms - rec.start_ms == 80);
  CHECK(elapsed >= 75);  // duration_cast floors, so an 80 ms sleep can read 79
  CHECK(elapsed < 5000);  // scheduler actually ran; no sim-speed shortcut
  engine.stop_scheduler();
}

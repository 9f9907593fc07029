#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "ftfloor/catalog.hpp"
#include "ftfloor/util.hpp"

using namespace ftfloor;

namespace {

const ServiceCatalog& default_catalog() {
  static const ServiceCatalog catalog = generate(default_topology());
  return catalog;
}

std::map<std::string, int> count_by_provider(const ServiceCatalog& catalog) {
  std::map<std::string, int> out;
  for (const auto& [url, svc] : catalog.services()) out[svc.provider]++;
  return out;
}

}  // namespace

TEST_CASE("catalog totals per machine") {
  const auto counts = count_by_provider(default_catalog());
  const std::map<std::string, int> expected{
      {"dm_1", 19}, {"hbw_1", 120}, {"mm_1", 29}, {"ov_1", 8},
      {"pm_1", 19}, {"sm_1", 29},   {"vgr_1", 102}, {"wt_1", 15},
  };
  CHECK(counts == expected);
  CHECK(default_catalog().services().size() == 341);
  CHECK(default_catalog().base_services().size() == 67);
}

TEST_CASE("per-base expansion counts") {
  // the full bracket table: one entry per base service and machine kind
  using Cell = std::pair<MachineKind, std::string>;
  const std::map<Cell, int> expected{
      {{MachineKind::drilling_machine, "calibrate"}, 1},
      {{MachineKind::drilling_machine, "drill"}, 2},
      {{MachineKind::drilling_machine, "transportFromTo"}, 3},
      {{MachineKind::drilling_machine, "getMotorSpeed"}, 3},
      {{MachineKind::drilling_machine, "setMotorSpeed"}, 3},
      {{MachineKind::drilling_machine, "resetAllMotors"}, 1},
      {{MachineKind::drilling_machine, "capacitiveSensor"}, 3},
      {{MachineKind::drilling_machine, "statusOfLightBarrier"}, 2},
      {{MachineKind::drilling_machine, "stateOfMachine"}, 1},
      {{MachineKind::high_bay_warehouse, "calibrate"}, 4},
      {{MachineKind::high_bay_warehouse, "changeBuckets"}, 81},
      {{MachineKind::high_bay_warehouse, "store"}, 10},
      {{MachineKind::high_bay_warehouse, "unload"}, 10},
      {{MachineKind::high_bay_warehouse, "getMotorSpeed"}, 4},
      {{MachineKind::high_bay_warehouse, "setMotorSpeed"}, 4},
      {{MachineKind::high_bay_warehouse, "resetAllMotors"}, 1},
      {{MachineKind::high_bay_warehouse, "statusOfLightBarrier"}, 4},
      {{MachineKind::high_bay_warehouse, "stateOfMachine"}, 1},
      {{MachineKind::high_bay_warehouse, "getAmountOfStoredWorkpieces"}, 1},
      {{MachineKind::milling_machine, "calibrate"}, 1},
      {{MachineKind::milling_machine, "mill"}, 4},
      {{MachineKind::milling_machine, "moveFromTo"}, 6},
      {{MachineKind::milling_machine, "transportFromTo"}, 6},
      {{MachineKind::milling_machine, "checkPosition"}, 3},
      {{MachineKind::milling_machine, "getMotorSpeed"}, 3},
      {{MachineKind::milling_machine, "setMotorSpeed"}, 3},
      {{MachineKind::milling_machine, "resetAllMotors"}, 1},
      {{MachineKind::milling_machine, "statusOfLightBarrier"}, 1},
      {{MachineKind::milling_machine, "stateOfMachine"}, 1},
      {{MachineKind::oven, "calibrate"}, 1},
      {{MachineKind::oven, "burn"}, 2},
      {{MachineKind::oven, "getMotorSpeed"}, 1},
      {{MachineKind::oven, "setMotorSpeed"}, 1},
      {{MachineKind::oven, "resetAllMotors"}, 1},
      {{MachineKind::oven, "statusOfLightBarrier"}, 1},
      {{MachineKind::oven, "stateOfMachine"}, 1},
      {{MachineKind::punching_machine, "calibrate"}, 1},
      {{MachineKind::punching_machine, "punch"}, 2},
      {{MachineKind::punching_machine, "transportFromTo"}, 3},
      {{MachineKind::punching_machine, "getMotorSpeed"}, 3},
      {{MachineKind::punching_machine, "setMotorSpeed"}, 3},
      {{MachineKind::punching_machine, "resetAllMotors"}, 1},
      {{MachineKind::punching_machine, "capacitiveSensor"}, 3},
      {{MachineKind::punching_machine, "statusOfLightBarrier"}, 2},
      {{MachineKind::punching_machine, "stateOfMachine"}, 1},
      {{MachineKind::sorting_machine, "sort"}, 20},
      {{MachineKind::sorting_machine, "getMotorSpeed"}, 1},
      {{MachineKind::sorting_machine, "setMotorSpeed"}, 1},
      {{MachineKind::sorting_machine, "resetAllMotors"}, 1},
      {{MachineKind::sorting_machine, "statusOfLightBarrier"}, 5},
      {{MachineKind::sorting_machine, "stateOfMachine"}, 1},
      {{MachineKind::vacuum_gripper_robot, "calibrate"}, 4},
      {{MachineKind::vacuum_gripper_robot, "moveTo"}, 9},
      {{MachineKind::vacuum_gripper_robot, "pickUpAndTransport"}, 72},
      {{MachineKind::vacuum_gripper_robot, "checkPosition"}, 9},
      {{MachineKind::vacuum_gripper_robot, "getMotorSpeed"}, 3},
      {{MachineKind::vacuum_gripper_robot, "setMotorSpeed"}, 3},
      {{MachineKind::vacuum_gripper_robot, "resetAllMotors"}, 1},
      {{MachineKind::vacuum_gripper_robot, "stateOfMachine"}, 1},
      {{MachineKind::workstation_transport, "calibrate"}, 1},
      {{MachineKind::workstation_transport, "moveTo"}, 2},
      {{MachineKind::workstation_transport, "pickUpAndTransport"}, 2},
      {{MachineKind::workstation_transport, "checkPosition"}, 2},
      {{MachineKind::workstation_transport, "getMotorSpeed"}, 3},
      {{MachineKind::workstation_transport, "setMotorSpeed"}, 3},
      {{MachineKind::workstation_transport, "resetAllMotors"}, 1},
      {{MachineKind::workstation_transport, "stateOfMachine"}, 1},
  };

  std::map<Cell, int> declared;
  for (const BaseServiceEntry& base : default_catalog().base_services())
    declared[{base.machine_kind, base.name}] = base.expansions_per_machine;
  CHECK(declared == expected);

  // what the bases declare is what the grid actually produced
  std::map<Cell, int> produced;
  const Topology& topo = default_catalog().topology();
  for (const auto& [url, svc] : default_catalog().services()) {
    const MachineSpec* m = topo.machine(svc.provider);
    REQUIRE(m != nullptr);
    produced[{m->kind, svc.base_name}]++;
  }
  CHECK(produced == expected);
}

TEST_CASE("catalog generation is pure and deterministic") {
  const ServiceCatalog a = generate(default_topology());
  const ServiceCatalog b = generate(default_topology());
  REQUIRE(a.services().size() == b.services().size());
  auto ita = a.services().begin();
  auto itb = b.services().begin();
  for (; ita != a.services().end(); ++ita, ++itb) {
    CHECK(ita->first == itb->first);
    CHECK(ita->second.iri == itb->second.iri);
    CHECK(ita->second.preconditions == itb->second.preconditions);
    CHECK(ita->second.postconditions == itb->second.postconditions);
    CHECK(ita->second.required_resources == itb->second.required_resources);
  }
}

TEST_CASE("service urls and iris are distinct") {
  std::set<std::string> iris;
  for (const auto& [url, svc] : default_catalog().services()) {
    CHECK(url == svc.url);
    iris.insert(svc.iri.value);
  }
  CHECK(iris.size() == default_catalog().services().size());
}

TEST_CASE("condition lists are sorted and duplicate-free") {
  for (const auto& [url, svc] : default_catalog().services()) {
    for (const auto* list : {&svc.preconditions, &svc.postconditions}) {
      CHECK(std::is_sorted(list->begin(), list->end(),
                           [](const ConditionBinding& a, const ConditionBinding& b) {
                             return a.condition < b.condition;
                           }));
      std::set<Iri> seen;
      for (const auto& b : *list) CHECK(seen.insert(b.condition).second);
    }
    if (svc.kind == ServiceKind::sensing) {
      CHECK(svc.preconditions.empty());
      CHECK(svc.postconditions.empty());
    }
  }
}

TEST_CASE("transport to the oven carries the full guard set") {
  const std::string url =
      "http://127.0.0.1:5000/vgr/pick_up_and_transport?machine=vgr_1&start=sink_1&end=oven";
  const auto* svc = default_catalog().lookup(url);
  REQUIRE(svc != nullptr);

  std::vector<ConditionBinding> expected_pre{
      {Iri::local("Precondition_OV_1_State_Of_Machine_Ready"),
       "http://127.0.0.1:5000/ov/state_of_machine?machine=ov_1", "state", "ready"},
      {Iri::local("Precondition_OV_1_Status_Of_Light_Barrier_5_Interrupted_False"),
       "http://127.0.0.1:5000/ov/status_of_light_barrier?machine=ov_1&lb=5", "interrupted",
       "false"},
      {Iri::local("Precondition_SM_1_Status_Of_Light_Barrier_6_Interrupted_True"),
       "http://127.0.0.1:5000/sm/status_of_light_barrier?machine=sm_1&lb=6", "interrupted",
       "true"},
      {Iri::local("Precondition_VGR_1_State_Of_Machine_Ready"),
       "http://127.0.0.1:5000/vgr/state_of_machine?machine=vgr_1", "state", "ready"},
      {Iri::local("Precondition_WT_1_Check_Position_Oven_False"),
       "http://127.0.0.1:5000/wt/check_position?machine=wt_1&position=oven", "at_position",
       "false"},
  };
  std::vector<ConditionBinding> expected_post{
      {Iri::local("Postcondition_OV_1_Status_Of_Light_Barrier_5_Interrupted_True"),
       "http://127.0.0.1:5000/ov/status_of_light_barrier?machine=ov_1&lb=5", "interrupted",
       "true"},
  };
  CHECK(svc->preconditions == expected_pre);
  CHECK(svc->postconditions == expected_post);
  CHECK(svc->required_resources == std::set<std::string>{"ov_1", "sm_1", "vgr_1"});
  CHECK(svc->nominal_duration == doctest::Approx(5.0));
}

TEST_CASE("lookup canonicalizes parameter order, ignores runtime extras") {
  const ServiceCatalog& catalog = default_catalog();
  std::mt19937 rng(7);
  int checked = 0;
  for (const auto& [url, svc] : catalog.services()) {
    if (checked++ % 7 != 0) continue;  // spot-check a deterministic slice
    auto parsed = util::parse_url(url);
    std::shuffle(parsed.query.begin(), parsed.query.end(), rng);
    std::string shuffled = "http://elsewhere:9999" + parsed.path + "?";
    for (std::size_t i = 0; i < parsed.query.size(); ++i) {
      if (i) shuffled += "&";
      shuffled += parsed.query[i].first + "=" + parsed.query[i].second;
    }
    const auto* hit = catalog.lookup(shuffled);
    REQUIRE(hit != nullptr);
    CHECK(hit->url == url);
  }

  const std::string base =
      "http://127.0.0.1:5000/hbw/set_motor_speed?machine=hbw_1&motor=horizontal";
  CHECK(catalog.lookup(base + "&speed=300") == catalog.lookup(base));
  CHECK(catalog.lookup("http://127.0.0.1:5000/vgr/fly?machine=vgr_1") == nullptr);
  CHECK(catalog.lookup("http://127.0.0.1:5000/ov/burn?machine=ov_9&duration=standard") == nullptr);
  CHECK(catalog.lookup("http://127.0.0.1:5000/ov/burn?machine=ov_1&duration=forever") == nullptr);
}

TEST_CASE("service_url renders the canonical form") {
  CHECK(service_url("127.0.0.1:5000", "vgr", "pick_up_and_transport",
                    {{"machine", "vgr_1"}, {"start", "sink_1"}, {"end", "oven"}}) ==
        "http://127.0.0.1:5000/vgr/pick_up_and_transport?machine=vgr_1&start=sink_1&end=oven");
  CHECK(service_url("h", "ov", "reset_all_motors", {{"machine", "ov_1"}}) ==
        "http://h/ov/reset_all_motors?machine=ov_1");
}

TEST_CASE("two floors double the per-floor machines and share the stations") {
  const ServiceCatalog catalog = generate(make_topology(2, "127.0.0.1:5000"));
  CHECK(catalog.services().size() == 644);
  const auto counts = count_by_provider(catalog);
  CHECK(counts.at("vgr_2") == 102);
  CHECK(counts.at("hbw_2") == 120);
  CHECK(counts.count("dm_2") == 0);  // processing stations are shared
  CHECK(counts.at("dm_1") == 19);
  // floor-2 transport grounds to the suffixed world positions
  const auto* svc = catalog.lookup(
      "http://127.0.0.1:5000/vgr/pick_up_and_transport?machine=vgr_2&start=sink_1&end=oven");
  REQUIRE(svc != nullptr);
  bool mentions_ov_2 = false;
  for (const auto& b : svc->preconditions)
    if (b.checker_url.find("machine=ov_2") != std::string::npos) mentions_ov_2 = true;
  CHECK(mentions_ov_2);
}

TEST_CASE("duration overrides apply per base service") {
  const ServiceCatalog catalog = generate(default_topology(), {{"burn", 42.0}});
  const auto* burn = catalog.lookup("http://127.0.0.1:5000/ov/burn?machine=ov_1&duration=standard");
  REQUIRE(burn != nullptr);
  CHECK(burn->nominal_duration == doctest::Approx(42.0));
  const auto* calibrate =
      catalog.lookup("http://127.0.0.1:5000/ov/calibrate?machine=ov_1");
  REQUIRE(calibrate != nullptr);
  CHECK(calibrate->nominal_duration ==
        default_catalog().lookup("http://127.0.0.1:5000/ov/calibrate?machine=ov_1")
            ->nominal_duration);
}

TEST_CASE("counts table reports totals and the nominal-size note") {
  const std::string table = counts_table(default_catalog());
  CHECK(table.find("base: 67, total: 341") != std::string::npos);
  CHECK(table.find("nominal catalog size is 336") != std::string::npos);
  CHECK(table.find("pickUpAndTransport (72)") != std::string::npos);
  CHECK(table.find("changeBuckets (81)") != std::string::npos);
  CHECK(table.find("sort (20)") != std::string::npos);
  CHECK(table.find("store (10)") != std::string::npos);
}

TEST_CASE("ontology triples cover every service with grounding and description") {
  const ServiceCatalog& catalog = default_catalog();
  KnowledgeBase kb(as_triples(catalog));
  CHECK(kb.size() == 2071);
  for (const auto& [url, svc] : catalog.services()) {
    CHECK(kb.contains({svc.iri, vocab::kHasUrl, Literal::str(url)}));
    CHECK(kb.conditions_of(url, ConditionRole::pre) == svc.preconditions);
    CHECK(kb.conditions_of(url, ConditionRole::post) == svc.postconditions);
  }
}

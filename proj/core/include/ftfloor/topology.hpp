#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ftfloor {

enum class MachineKind {
  drilling_machine,
  high_bay_warehouse,
  milling_machine,
  oven,
  punching_machine,
  sorting_machine,
  vacuum_gripper_robot,
  workstation_transport,
};

std::string_view kind_name(MachineKind k);    // "vacuum_gripper_robot"
std::string_view kind_prefix(MachineKind k);  // "vgr"
std::string kind_tag(MachineKind k);          // "VGR"
std::optional<MachineKind> kind_from_prefix(std::string_view prefix);

enum class SensorKind { light_barrier, capacitive };

// Occupancy sensor watching a world position.
struct Monitor {
  std::string machine;  // owning machine id, e.g. "ov_1"
  SensorKind kind = SensorKind::light_barrier;
  int pin = 0;
};

struct MachineSpec {
  std::string id;  // "vgr_1"
  MachineKind kind{};
  std::vector<std::string> positions;  // service-parameter position names
  std::vector<std::string> motors;
  std::vector<int> light_barriers;
  std::vector<int> capacitive_sensors;
  int slots = 0;  // high-bay warehouse rack size
  std::string url_prefix;
};

struct WorldPosition {
  std::string name;   // canonical world-unique name, e.g. "oven", "dm_1_entry"
  std::string owner;  // machine id responsible for the spot
  std::optional<Monitor> monitor;
};

// A service position parameter resolves to real world positions; pickup and
// deposit may differ (a drilling station is fed at its entry and emptied at
// its exit).
struct PositionEndpoints {
  std::string pickup;
  std::string deposit;
};

struct Topology {
  std::vector<MachineSpec> machines;
  std::vector<WorldPosition> positions;
  std::string host = "127.0.0.1:5000";
  int floors = 1;

  const MachineSpec* machine(std::string_view id) const;
  const WorldPosition* position(std::string_view name) const;
  PositionEndpoints resolve(const MachineSpec& provider, std::string_view param_value) const;
};

Topology default_topology();
Topology make_topology(int floors, std::string host);

}  // namespace ftfloor

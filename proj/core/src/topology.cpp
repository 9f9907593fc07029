#include "ftfloor/topology.hpp"

#include <algorithm>
#include <stdexcept>

namespace ftfloor {

namespace {

struct KindInfo {
  MachineKind kind;
  std::string_view name;
  std::string_view prefix;
  std::string_view tag;
};

constexpr KindInfo kKinds[] = {
    {MachineKind::drilling_machine, "drilling_machine", "dm", "DM"},
    {MachineKind::high_bay_warehouse, "high_bay_warehouse", "hbw", "HBW"},
    {MachineKind::milling_machine, "milling_machine", "mm", "MM"},
    {MachineKind::oven, "oven", "ov", "OV"},
    {MachineKind::punching_machine, "punching_machine", "pm", "PM"},
    {MachineKind::sorting_machine, "sorting_machine", "sm", "SM"},
    {MachineKind::vacuum_gripper_robot, "vacuum_gripper_robot", "vgr", "VGR"},
    {MachineKind::workstation_transport, "workstation_transport", "wt", "WT"},
};

const KindInfo& info(MachineKind k) {
  for (const KindInfo& i : kKinds)
    if (i.kind == k) return i;
  throw std::logic_error("unknown machine kind");
}

}  // namespace

std::string_view kind_name(MachineKind k) { return info(k).name; }
std::string_view kind_prefix(MachineKind k) { return info(k).prefix; }
std::string kind_tag(MachineKind k) { return std::string(info(k).tag); }

std::optional<MachineKind> kind_from_prefix(std::string_view prefix) {
  for (const KindInfo& i : kKinds)
    if (i.prefix == prefix) return i.kind;
  return std::nullopt;
}

const MachineSpec* Topology::machine(std::string_view id) const {
  for (const MachineSpec& m : machines)
    if (m.id == id) return &m;
  return nullptr;
}

const WorldPosition* Topology::position(std::string_view name) const {
  for (const WorldPosition& p : positions)
    if (p.name == name) return &p;
  return nullptr;
}

namespace {

// Per-floor suffix for the shared open-floor spots ("" on floor 1, "_f2" above).
std::string floor_suffix(int floor) { return floor <= 1 ? "" : "_f" + std::to_string(floor); }

MachineSpec make_machine(MachineKind kind, int index) {
  MachineSpec m;
  m.kind = kind;
  m.url_prefix = std::string(kind_prefix(kind));
  m.id = m.url_prefix + "_" + std::to_string(index);
  switch (kind) {
    case MachineKind::drilling_machine:
    case MachineKind::punching_machine:
      m.positions = {"entry", "machine", "exit"};
      m.motors = {"conveyor", kind == MachineKind::drilling_machine ? "drill" : "punch", "feeder"};
      m.light_barriers = {1, 2};
      m.capacitive_sensors = {1, 2, 3};
      break;
    case MachineKind::high_bay_warehouse:
      m.motors = {"horizontal", "vertical", "cantilever", "conveyor"};
      m.light_barriers = {1, 2, 3, 4};
      m.slots = 9;
      break;
    case MachineKind::milling_machine:
      m.positions = {"pos_input", "pos_milling", "pos_output"};
      m.motors = {"turntable", "spindle", "conveyor"};
      m.light_barriers = {1};
      break;
    case MachineKind::oven:
      m.positions = {"oven"};
      m.motors = {"feeder"};
      m.light_barriers = {5};
      break;
    case MachineKind::sorting_machine:
      m.positions = {"entry", "reject", "pass_through"};
      m.motors = {"conveyor"};
      m.light_barriers = {1, 2, 6, 7, 8};
      break;
    case MachineKind::vacuum_gripper_robot:
      m.positions = {"sink_1", "sink_2", "sink_3", "oven", "high_bay_warehouse",
                     "drilling_machine", "punching_machine", "delivery_station", "storage_buffer"};
      m.motors = {"horizontal", "vertical", "rotation"};
      break;
    case MachineKind::workstation_transport:
      m.positions = {"oven", "milling_machine"};
      m.motors = {"rotation", "conveyor", "vacuum"};
      break;
  }
  return m;
}

void add_floor_positions(Topology& t, int floor) {
  const std::string fs = floor_suffix(floor);
  const std::string n = "_" + std::to_string(floor);
  auto lb = [&](std::string machine, int pin) {
    return Monitor{std::move(machine), SensorKind::light_barrier, pin};
  };
  auto cap = [&](std::string machine, int pin) {
    return Monitor{std::move(machine), SensorKind::capacitive, pin};
  };

  const std::string sm = "sm" + n, ov = "ov" + n, hbw = "hbw" + n, mm = "mm" + n,
                    vgr = "vgr" + n;
  // Open-floor spots reachable by the gripper arm.
  t.positions.push_back({"sink_1" + fs, sm, lb(sm, 6)});
  t.positions.push_back({"sink_2" + fs, sm, lb(sm, 7)});
  t.positions.push_back({"sink_3" + fs, sm, lb(sm, 8)});
  t.positions.push_back({"oven" + fs, ov, lb(ov, 5)});
  t.positions.push_back({"high_bay_warehouse" + fs, hbw, lb(hbw, 1)});
  t.positions.push_back({"delivery_station" + fs, vgr, std::nullopt});
  t.positions.push_back({"storage_buffer" + fs, vgr, std::nullopt});
  // Sorting line spots.
  t.positions.push_back({sm + "_entry", sm, lb(sm, 1)});
  t.positions.push_back({sm + "_reject", sm, lb(sm, 2)});
  t.positions.push_back({sm + "_pass_through", sm, std::nullopt});
  // Milling turntable spots.
  t.positions.push_back({mm + "_pos_input", mm, std::nullopt});
  t.positions.push_back({mm + "_pos_milling", mm, lb(mm, 1)});
  t.positions.push_back({mm + "_pos_output", mm, std::nullopt});
  (void)cap;
}

void add_station_positions(Topology& t, const std::string& id) {
  // Drilling/punching conveyor line: barrier at each end, capacitive sensor
  // under the tool head.
  t.positions.push_back({id + "_entry", id, Monitor{id, SensorKind::light_barrier, 1}});
  t.positions.push_back({id + "_machine", id, Monitor{id, SensorKind::capacitive, 2}});
  t.positions.push_back({id + "_exit", id, Monitor{id, SensorKind::light_barrier, 2}});
}

}  // namespace

Topology make_topology(int floors, std::string host) {
  if (floors < 1 || floors > 2) throw std::invalid_argument("floors must be 1 or 2");
  Topology t;
  t.host = std::move(host);
  t.floors = floors;

  const MachineKind shared[] = {
      MachineKind::high_bay_warehouse, MachineKind::milling_machine,  MachineKind::oven,
      MachineKind::sorting_machine,    MachineKind::vacuum_gripper_robot,
      MachineKind::workstation_transport,
  };
  for (int floor = 1; floor <= floors; ++floor)
    for (MachineKind k : shared) t.machines.push_back(make_machine(k, floor));
  // One drilling and one punching station serve the whole factory.
  t.machines.push_back(make_machine(MachineKind::drilling_machine, 1));
  t.machines.push_back(make_machine(MachineKind::punching_machine, 1));

  std::sort(t.machines.begin(), t.machines.end(),
            [](const MachineSpec& a, const MachineSpec& b) { return a.id < b.id; });

  for (int floor = 1; floor <= floors; ++floor) add_floor_positions(t, floor);
  add_station_positions(t, "dm_1");
  add_station_positions(t, "pm_1");
  std::sort(t.positions.begin(), t.positions.end(),
            [](const WorldPosition& a, const WorldPosition& b) { return a.name < b.name; });
  return t;
}

Topology default_topology() { return make_topology(1, "127.0.0.1:5000"); }

PositionEndpoints Topology::resolve(const MachineSpec& provider,
                                    std::string_view param_value) const {
  const std::string value(param_value);
  // Machines with an index above 1 live on the corresponding upper floor.
  const int floor = provider.id.back() - '0';
  const std::string fs = floor_suffix(floor);

  switch (provider.kind) {
    case MachineKind::vacuum_gripper_robot: {
      if (value == "drilling_machine") return {"dm_1_exit", "dm_1_entry"};
      if (value == "punching_machine") return {"pm_1_exit", "pm_1_entry"};
      const std::string world = value + fs;
      if (!position(world)) throw std::invalid_argument("unknown position " + value);
      return {world, world};
    }
    case MachineKind::workstation_transport: {
      const std::string mm = "mm_" + std::to_string(floor);
      if (value == "milling_machine") return {mm + "_pos_output", mm + "_pos_input"};
      if (value == "oven") return {"oven" + fs, "oven" + fs};
      throw std::invalid_argument("unknown position " + value);
    }
    case MachineKind::milling_machine: {
      const std::string world = provider.id + "_" + value;
      if (!position(world)) throw std::invalid_argument("unknown position " + value);
      return {world, world};
    }
    case MachineKind::drilling_machine:
    case MachineKind::punching_machine:
    case MachineKind::sorting_machine: {
      // Sorting ejection targets are either line-local or open-floor sinks.
      const std::string local = provider.id + "_" + value;
      if (position(local)) return {local, local};
      const std::string world = value + fs;
      if (position(world)) return {world, world};
      throw std::invalid_argument("unknown position " + value);
    }
    case MachineKind::oven: {
      const std::string world = value + fs;
      if (!position(world)) throw std::invalid_argument("unknown position " + value);
      return {world, world};
    }
    default:
      throw std::invalid_argument("machine " + provider.id + " has no positions");
  }
}

}  // namespace ftfloor

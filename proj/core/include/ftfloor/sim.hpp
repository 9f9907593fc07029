#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ftfloor/catalog.hpp"
#include "ftfloor/topology.hpp"

namespace ftfloor {

// A workpiece is either at a named world position or racked in a slot.
struct SlotRef {
  std::string machine;
  int slot = 0;
  auto operator<=>(const SlotRef&) const = default;
  std::string name() const { return machine + "_slot_" + std::to_string(slot); }
};

struct Workpiece {
  std::string id;
  std::variant<std::string, SlotRef> location;
  std::string color = "white";
  std::set<std::string> flags;  // burned, milled, drilled, punched, sorted
  auto operator<=>(const Workpiece&) const = default;
};

enum class MachineState { ready, busy, error };
std::string_view to_string(MachineState s);

struct MachineRuntime {
  std::string id;
  MachineState state = MachineState::ready;
  std::map<std::string, int> motor_speeds;  // 0–1000
  std::string element_position;             // arm/platform/turntable position, "" if fixed
  auto operator<=>(const MachineRuntime&) const = default;
};

struct FactoryState {
  std::int64_t clock_ms = 0;
  std::map<std::string, Workpiece> workpieces;
  std::map<std::string, MachineRuntime> machines;
  std::map<std::string, std::map<int, std::string>> slots;  // machine → slot → wp id or ""
  auto operator<=>(const FactoryState&) const = default;
};

struct Placement {
  std::string workpiece;
  std::string position;  // world position or "<machine>_slot_<n>"
  std::string color = "white";
};

struct Scenario {
  std::vector<Placement> placements;
  std::vector<std::string> faults;
};

Scenario parse_scenario(const std::string& text);

FactoryState initial_state(const Topology& topology, const Scenario& scenario = {});

enum class SensorRead {
  state_of_machine,
  status_of_light_barrier,
  capacitive_sensor,
  check_position,
  get_motor_speed,
  get_amount_of_stored_workpieces,
  read_rfid,
};

using Reading = std::map<std::string, std::string>;

struct SensorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pure read; selector carries the pin / position / motor / station argument.
Reading read_sensor(const FactoryState& state, const Topology& topology,
                    const std::string& machine, SensorRead kind,
                    const std::string& selector = "");

struct TransitionResult {
  FactoryState new_state;
  double duration = 0;  // simulated seconds
  std::vector<std::pair<std::int64_t, std::string>> events;
};

enum class ApplyErrorKind { machine_error, not_applicable, resource_full };

struct ApplyError {
  ApplyErrorKind kind{};
  std::string message;
};

std::variant<TransitionResult, ApplyError> apply(
    const FactoryState& state, const Topology& topology, const ServiceDescription& service,
    const std::map<std::string, std::string>& runtime_args = {});

FactoryState inject_fault(const FactoryState& state, const std::string& machine, bool on);

// Canonical line-oriented snapshot used for bit-identity checks.
std::string dump_state(const FactoryState& state);

// Returns human-readable invariant violations (empty = consistent).
std::vector<std::string> check_invariants(const FactoryState& state, const Topology& topology);

// Workpiece id occupying a world position, or "" when free.
std::string occupant(const FactoryState& state, const std::string& position);

}  // namespace ftfloor

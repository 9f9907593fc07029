#include "ftfloor/sim.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "ftfloor/util.hpp"

namespace ftfloor {

std::string_view to_string(MachineState s) {
  switch (s) {
    case MachineState::ready: return "ready";
    case MachineState::busy: return "busy";
    case MachineState::error: return "error";
  }
  return "ready";
}

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "workpiece") {
      Placement p;
      ls >> p.workpiece >> p.position;
      if (p.workpiece.empty() || p.position.empty())
        throw std::runtime_error("scenario line " + std::to_string(line_no) +
                                 ": expected `workpiece <id> <position> [<color>]`");
      std::string color;
      if (ls >> color) p.color = color;
      sc.placements.push_back(std::move(p));
    } else if (keyword == "fault") {
      std::string machine;
      ls >> machine;
      if (machine.empty())
        throw std::runtime_error("scenario line " + std::to_string(line_no) +
                                 ": expected `fault <machine>`");
      sc.faults.push_back(std::move(machine));
    } else {
      throw std::runtime_error("scenario line " + std::to_string(line_no) +
                               ": unknown keyword " + keyword);
    }
  }
  return sc;
}

namespace {

// "<machine>_slot_<n>" → SlotRef for a machine with a rack.
std::optional<SlotRef> parse_slot_name(const Topology& topo, const std::string& name) {
  auto pos = name.rfind("_slot_");
  if (pos == std::string::npos) return std::nullopt;
  const std::string machine = name.substr(0, pos);
  const MachineSpec* m = topo.machine(machine);
  if (!m || m->slots == 0) return std::nullopt;
  try {
    int n = std::stoi(name.substr(pos + 6));
    if (n < 1 || n > m->slots) return std::nullopt;
    return SlotRef{machine, n};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string default_element_position(const MachineSpec& m) {
  switch (m.kind) {
    case MachineKind::vacuum_gripper_robot: return "delivery_station";
    case MachineKind::workstation_transport: return "milling_machine";
    case MachineKind::milling_machine: return "pos_input";
    default: return "";
  }
}

constexpr int kDefaultSpeed = 512;

}  // namespace

FactoryState initial_state(const Topology& topology, const Scenario& scenario) {
  FactoryState st;
  for (const MachineSpec& m : topology.machines) {
    MachineRuntime rt;
    rt.id = m.id;
    for (const std::string& motor : m.motors) rt.motor_speeds[motor] = kDefaultSpeed;
    rt.element_position = default_element_position(m);
    st.machines[m.id] = std::move(rt);
    if (m.slots > 0)
      for (int i = 1; i <= m.slots; ++i) st.slots[m.id][i] = "";
  }

  for (const Placement& p : scenario.placements) {
    if (st.workpieces.count(p.workpiece))
      throw std::invalid_argument("duplicate workpiece id " + p.workpiece);
    Workpiece wp{p.workpiece, std::string{}, p.color, {}};
    if (auto slot = parse_slot_name(topology, p.position)) {
      std::string& cell = st.slots[slot->machine][slot->slot];
      if (!cell.empty()) throw std::invalid_argument("duplicate placement at " + p.position);
      cell = p.workpiece;
      wp.location = *slot;
    } else {
      if (!topology.position(p.position))
        throw std::invalid_argument("unknown position " + p.position);
      if (!occupant(st, p.position).empty())
        throw std::invalid_argument("duplicate placement at " + p.position);
      wp.location = p.position;
    }
    st.workpieces[p.workpiece] = std::move(wp);
  }

  for (const std::string& machine : scenario.faults) {
    auto it = st.machines.find(machine);
    if (it == st.machines.end()) throw std::invalid_argument("unknown machine " + machine);
    it->second.state = MachineState::error;
  }
  return st;
}

std::string occupant(const FactoryState& state, const std::string& position) {
  for (const auto& [id, wp] : state.workpieces)
    if (const auto* pos = std::get_if<std::string>(&wp.location); pos && *pos == position)
      return id;
  return "";
}

Reading read_sensor(const FactoryState& state, const Topology& topology,
                    const std::string& machine, SensorRead kind, const std::string& selector) {
  if (kind == SensorRead::read_rfid) {
    if (!topology.position(selector)) throw SensorError("unknown_sensor: no station " + selector);
    const std::string tag = occupant(state, selector);
    return {{"tag", tag.empty() ? "none" : tag}};
  }

  const MachineSpec* spec = topology.machine(machine);
  auto rt = state.machines.find(machine);
  if (!spec || rt == state.machines.end())
    throw SensorError("unknown_sensor: no machine " + machine);

  switch (kind) {
    case SensorRead::state_of_machine:
      return {{"state", std::string(to_string(rt->second.state))}};
    case SensorRead::status_of_light_barrier:
    case SensorRead::capacitive_sensor: {
      const SensorKind sensor =
          kind == SensorRead::status_of_light_barrier ? SensorKind::light_barrier
                                                      : SensorKind::capacitive;
      const auto& pins = sensor == SensorKind::light_barrier ? spec->light_barriers
                                                             : spec->capacitive_sensors;
      int pin = 0;
      try {
        pin = std::stoi(selector);
      } catch (const std::exception&) {
        throw SensorError("unknown_sensor: bad pin " + selector);
      }
      if (std::find(pins.begin(), pins.end(), pin) == pins.end())
        throw SensorError("unknown_sensor: " + machine + " has no pin " + selector);
      bool tripped = false;
      for (const WorldPosition& p : topology.positions)
        if (p.monitor && p.monitor->machine == machine && p.monitor->kind == sensor &&
            p.monitor->pin == pin)
          tripped = !occupant(state, p.name).empty();
      const char* key = sensor == SensorKind::light_barrier ? "interrupted" : "detected";
      return {{key, tripped ? "true" : "false"}};
    }
    case SensorRead::check_position: {
      if (std::find(spec->positions.begin(), spec->positions.end(), selector) ==
          spec->positions.end())
        throw SensorError("unknown_sensor: " + machine + " has no position " + selector);
      return {{"at_position", rt->second.element_position == selector ? "true" : "false"}};
    }
    case SensorRead::get_motor_speed: {
      auto it = rt->second.motor_speeds.find(selector);
      if (it == rt->second.motor_speeds.end())
        throw SensorError("unknown_sensor: " + machine + " has no motor " + selector);
      return {{"speed", std::to_string(it->second)}};
    }
    case SensorRead::get_amount_of_stored_workpieces: {
      auto slots = state.slots.find(machine);
      int amount = 0;
      if (slots != state.slots.end())
        for (const auto& [n, wp] : slots->second)
          if (!wp.empty()) ++amount;
      return {{"amount", std::to_string(amount)}};
    }
    default:
      throw SensorError("unknown_sensor");
  }
}

namespace {

struct EffectContext {
  const Topology& topo;
  const ServiceDescription& svc;
  const MachineSpec& spec;
  FactoryState& st;
  std::vector<std::pair<std::int64_t, std::string>>& events;
  std::int64_t start_ms;
  std::int64_t end_ms;

  std::string param(const char* key) const {
    for (const auto& [k, v] : svc.parameters)
      if (k == key) return v;
    throw std::logic_error(std::string("service missing parameter ") + key);
  }
};

ApplyError na(std::string message) {
  return ApplyError{ApplyErrorKind::not_applicable, std::move(message)};
}

// Relocates a workpiece between two world positions; "" result means applied.
std::optional<ApplyError> move_workpiece(EffectContext& c, const std::string& from,
                                         const std::string& to) {
  const std::string wp = occupant(c.st, from);
  if (wp.empty()) return na("no workpiece at " + from);
  if (from != to && !occupant(c.st, to).empty()) return na("position " + to + " occupied");
  c.st.workpieces[wp].location = to;
  c.events.emplace_back(c.start_ms, c.svc.provider + " picked up " + wp + " at " + from);
  c.events.emplace_back(c.end_ms, c.svc.provider + " deposited " + wp + " at " + to);
  return std::nullopt;
}

std::optional<ApplyError> apply_effect(EffectContext& c) {
  const std::string& base = c.svc.base_name;
  MachineRuntime& rt = c.st.machines[c.svc.provider];

  if (base == "pickUpAndTransport" || base == "moveFromTo" ||
      (base == "transportFromTo" && c.spec.kind == MachineKind::milling_machine)) {
    const std::string start = c.param("start"), end = c.param("end");
    auto err = move_workpiece(c, c.topo.resolve(c.spec, start).pickup,
                              c.topo.resolve(c.spec, end).deposit);
    if (err) return err;
    if (!rt.element_position.empty()) rt.element_position = end;
    return std::nullopt;
  }
  if (base == "transportFromTo") {  // drilling/punching conveyor
    const std::string route = c.param("route");
    auto sep = route.find("_to_");
    return move_workpiece(c, c.topo.resolve(c.spec, route.substr(0, sep)).pickup,
                          c.topo.resolve(c.spec, route.substr(sep + 4)).deposit);
  }
  if (base == "sort") {
    const std::string entry = c.svc.provider + "_entry";
    const std::string wp = occupant(c.st, entry);
    if (wp.empty()) return na("no workpiece at " + entry);
    if (c.st.workpieces[wp].color != c.param("color"))
      return na("workpiece at " + entry + " is " + c.st.workpieces[wp].color + ", not " +
                c.param("color"));
    auto err = move_workpiece(c, entry, c.topo.resolve(c.spec, c.param("ejection")).deposit);
    if (err) return err;
    c.st.workpieces[wp].flags.insert("sorted");
    return std::nullopt;
  }
  if (base == "burn" || base == "mill" || base == "drill" || base == "punch") {
    std::string station;
    if (base == "burn") station = c.topo.resolve(c.spec, "oven").deposit;
    else if (base == "mill") station = c.svc.provider + "_pos_milling";
    else station = c.svc.provider + "_machine";
    const std::string wp = occupant(c.st, station);
    if (wp.empty()) return na("no workpiece at " + station);
    const char* flag = base == "burn"    ? "burned"
                       : base == "mill"  ? "milled"
                       : base == "drill" ? "drilled"
                                         : "punched";
    c.st.workpieces[wp].flags.insert(flag);
    c.events.emplace_back(c.end_ms, c.svc.provider + " " + flag + " " + wp);
    return std::nullopt;
  }
  if (base == "store") {
    const std::string tray = "high_bay_warehouse" + (c.spec.id.back() == '1'
                                                         ? std::string{}
                                                         : "_f" + std::string(1, c.spec.id.back()));
    const std::string wp = occupant(c.st, tray);
    if (wp.empty()) return na("no workpiece on the handover tray");
    auto& rack = c.st.slots[c.svc.provider];
    int target = 0;
    const std::string slot = c.param("slot");
    if (slot == "auto") {
      for (auto& [n, cell] : rack)
        if (cell.empty()) {
          target = n;
          break;
        }
      if (target == 0) return ApplyError{ApplyErrorKind::resource_full, "no empty slot"};
    } else {
      target = std::stoi(slot);
      if (!rack[target].empty()) return na("slot " + slot + " occupied");
    }
    rack[target] = wp;
    c.st.workpieces[wp].location = SlotRef{c.svc.provider, target};
    c.events.emplace_back(c.end_ms, c.svc.provider + " stored " + wp + " in slot " +
                                        std::to_string(target));
    return std::nullopt;
  }
  if (base == "unload") {
    const std::string tray = "high_bay_warehouse" + (c.spec.id.back() == '1'
                                                         ? std::string{}
                                                         : "_f" + std::string(1, c.spec.id.back()));
    if (!occupant(c.st, tray).empty()) return na("handover tray occupied");
    auto& rack = c.st.slots[c.svc.provider];
    int source = 0;
    const std::string slot = c.param("slot");
    if (slot == "auto") {
      for (auto& [n, cell] : rack)
        if (!cell.empty()) {
          source = n;
          break;
        }
      if (source == 0) return na("rack is empty");
    } else {
      source = std::stoi(slot);
      if (rack[source].empty()) return na("slot " + slot + " empty");
    }
    const std::string wp = rack[source];
    rack[source] = "";
    c.st.workpieces[wp].location = tray;
    c.events.emplace_back(c.end_ms, c.svc.provider + " unloaded " + wp + " from slot " +
                                        std::to_string(source));
    return std::nullopt;
  }
  if (base == "changeBuckets") {
    auto slot_no = [](const std::string& v) { return std::stoi(v.substr(5)); };
    auto& rack = c.st.slots[c.svc.provider];
    const int a = slot_no(c.param("start")), b = slot_no(c.param("end"));
    std::swap(rack[a], rack[b]);
    for (int n : {a, b})
      if (!rack[n].empty()) c.st.workpieces[rack[n]].location = SlotRef{c.svc.provider, n};
    c.events.emplace_back(c.end_ms, c.svc.provider + " swapped slots " + std::to_string(a) +
                                        " and " + std::to_string(b));
    return std::nullopt;
  }
  if (base == "moveTo") {
    rt.element_position = c.param("position");
    c.events.emplace_back(c.end_ms, c.svc.provider + " moved to " + rt.element_position);
    return std::nullopt;
  }
  if (base == "setMotorSpeed") {
    // speed is a runtime argument, not part of the parameter grid
    return std::nullopt;  // handled by caller with runtime args
  }
  if (base == "resetAllMotors") {
    for (auto& [motor, speed] : rt.motor_speeds) speed = kDefaultSpeed;
    c.events.emplace_back(c.end_ms, c.svc.provider + " reset all motors");
    return std::nullopt;
  }
  if (base == "calibrate") {
    c.events.emplace_back(c.end_ms, c.svc.provider + " calibrated");
    return std::nullopt;
  }
  return na("service has no modeled effect");
}

}  // namespace

std::variant<TransitionResult, ApplyError> apply(
    const FactoryState& state, const Topology& topology, const ServiceDescription& service,
    const std::map<std::string, std::string>& runtime_args) {
  if (service.kind != ServiceKind::actuation)
    return ApplyError{ApplyErrorKind::not_applicable, "sensing services have no effect"};
  const MachineSpec* spec = topology.machine(service.provider);
  if (!spec) return ApplyError{ApplyErrorKind::machine_error, "unknown machine " + service.provider};

  auto rt = state.machines.find(service.provider);
  if (rt == state.machines.end())
    return ApplyError{ApplyErrorKind::machine_error, "unknown machine " + service.provider};
  if (rt->second.state == MachineState::error)
    return ApplyError{ApplyErrorKind::machine_error, service.provider + " is in error state"};
  if (rt->second.state == MachineState::busy)
    return ApplyError{ApplyErrorKind::not_applicable, service.provider + " is busy"};

  TransitionResult result{state, service.nominal_duration, {}};
  const std::int64_t start_ms = state.clock_ms;
  const std::int64_t end_ms = start_ms + static_cast<std::int64_t>(service.nominal_duration * 1000);
  EffectContext ctx{topology, service, *spec, result.new_state, result.events, start_ms, end_ms};

  if (service.base_name == "setMotorSpeed") {
    int speed = kDefaultSpeed;
    if (auto it = runtime_args.find("speed"); it != runtime_args.end()) {
      try {
        speed = std::stoi(it->second);
      } catch (const std::exception&) {
        return ApplyError{ApplyErrorKind::not_applicable, "bad speed " + it->second};
      }
    }
    speed = std::clamp(speed, 0, 1000);
    MachineRuntime& machine = result.new_state.machines[service.provider];
    machine.motor_speeds[ctx.param("motor")] = speed;
    result.events.emplace_back(end_ms, service.provider + " set motor " + ctx.param("motor") +
                                           " to " + std::to_string(speed));
  } else if (auto err = apply_effect(ctx)) {
    return *err;
  }

  result.new_state.clock_ms = end_ms;
  return result;
}

FactoryState inject_fault(const FactoryState& state, const std::string& machine, bool on) {
  FactoryState next = state;
  auto it = next.machines.find(machine);
  if (it == next.machines.end()) throw std::invalid_argument("unknown machine " + machine);
  it->second.state = on ? MachineState::error : MachineState::ready;
  return next;
}

std::string dump_state(const FactoryState& state) {
  std::ostringstream os;
  os << "clock_ms " << state.clock_ms << "\n";
  for (const auto& [id, rt] : state.machines) {
    os << "machine " << id << " state " << to_string(rt.state);
    if (!rt.element_position.empty()) os << " position " << rt.element_position;
    os << " motors";
    char sep = ' ';
    for (const auto& [motor, speed] : rt.motor_speeds) {
      os << sep << motor << "=" << speed;
      sep = ',';
    }
    os << "\n";
  }
  for (const auto& [machine, rack] : state.slots)
    for (const auto& [n, wp] : rack)
      os << "slot " << machine << "_slot_" << n << " " << (wp.empty() ? "-" : wp) << "\n";
  for (const auto& [id, wp] : state.workpieces) {
    os << "workpiece " << id;
    if (const auto* pos = std::get_if<std::string>(&wp.location))
      os << " at " << *pos;
    else
      os << " slot " << std::get<SlotRef>(wp.location).name();
    os << " color " << wp.color << " flags ";
    if (wp.flags.empty()) {
      os << "-";
    } else {
      char sep = 0;
      for (const std::string& f : wp.flags) {
        if (sep) os << sep;
        os << f;
        sep = '+';
      }
    }
    os << "\n";
  }
  return os.str();
}

std::vector<std::string> check_invariants(const FactoryState& state, const Topology& topology) {
  std::vector<std::string> problems;
  std::map<std::string, std::string> seen_position;
  std::map<std::string, std::string> seen_slot;

  for (const auto& [id, wp] : state.workpieces) {
    if (const auto* pos = std::get_if<std::string>(&wp.location)) {
      if (!topology.position(*pos)) problems.push_back(id + " at unknown position " + *pos);
      auto [it, fresh] = seen_position.emplace(*pos, id);
      if (!fresh) problems.push_back(*pos + " shared by " + it->second + " and " + id);
    } else {
      const SlotRef& slot = std::get<SlotRef>(wp.location);
      auto rack = state.slots.find(slot.machine);
      if (rack == state.slots.end() || !rack->second.count(slot.slot)) {
        problems.push_back(id + " in unknown slot " + slot.name());
        continue;
      }
      if (rack->second.at(slot.slot) != id)
        problems.push_back("slot " + slot.name() + " does not hold " + id);
      auto [it, fresh] = seen_slot.emplace(slot.name(), id);
      if (!fresh) problems.push_back(slot.name() + " shared by " + it->second + " and " + id);
    }
  }
  for (const auto& [machine, rack] : state.slots)
    for (const auto& [n, wp] : rack) {
      if (wp.empty()) continue;
      auto it = state.workpieces.find(wp);
      SlotRef ref{machine, n};
      if (it == state.workpieces.end() ||
          !std::holds_alternative<SlotRef>(it->second.location) ||
          std::get<SlotRef>(it->second.location) != ref)
        problems.push_back("slot " + ref.name() + " holds stale id " + wp);
    }
  return problems;
}

}  // namespace ftfloor

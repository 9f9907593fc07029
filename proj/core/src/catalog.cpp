#include "ftfloor/catalog.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "ftfloor/util.hpp"

namespace ftfloor {

namespace {

struct BaseDef {
  const char* camel;
  ServiceKind kind;
  double duration;  // simulated seconds
  int expected;     // expansions per machine instance
};

constexpr double kSense = 0.05;

// Normative base-service table; the bracketed expansion counts are load-bearing
// and validated after grid expansion.
const std::vector<BaseDef>& bases_for(MachineKind kind) {
  static const std::vector<BaseDef> dm = {
      {"calibrate", ServiceKind::actuation, 3, 1},
      {"drill", ServiceKind::actuation, 8, 2},
      {"transportFromTo", ServiceKind::actuation, 5, 3},
      {"getMotorSpeed", ServiceKind::sensing, kSense, 3},
      {"setMotorSpeed", ServiceKind::actuation, 1, 3},
      {"resetAllMotors", ServiceKind::actuation, 1, 1},
      {"capacitiveSensor", ServiceKind::sensing, kSense, 3},
      {"statusOfLightBarrier", ServiceKind::sensing, kSense, 2},
      {"stateOfMachine", ServiceKind::sensing, kSense, 1},
  };
  static const std::vector<BaseDef> hbw = {
      {"calibrate", ServiceKind::actuation, 3, 4},
      {"changeBuckets", ServiceKind::actuation, 5, 81},
      {"store", ServiceKind::actuation, 6, 10},
      {"unload", ServiceKind::actuation, 6, 10},
      {"getMotorSpeed", ServiceKind::sensing, kSense, 4},
      {"setMotorSpeed", ServiceKind::actuation, 1, 4},
      {"resetAllMotors", ServiceKind::actuation, 1, 1},
      {"statusOfLightBarrier", ServiceKind::sensing, kSense, 4},
      {"stateOfMachine", ServiceKind::sensing, kSense, 1},
      {"getAmountOfStoredWorkpieces", ServiceKind::sensing, kSense, 1},
  };
  static const std::vector<BaseDef> mm = {
      {"calibrate", ServiceKind::actuation, 3, 1},
      {"mill", ServiceKind::actuation, 8, 4},
      {"moveFromTo", ServiceKind::actuation, 5, 6},
      {"transportFromTo", ServiceKind::actuation, 5, 6},
      {"checkPosition", ServiceKind::sensing, kSense, 3},
      {"getMotorSpeed", ServiceKind::sensing, kSense, 3},
      {"setMotorSpeed", ServiceKind::actuation, 1, 3},
      {"resetAllMotors", ServiceKind::actuation, 1, 1},
      {"statusOfLightBarrier", ServiceKind::sensing, kSense, 1},
      {"stateOfMachine", ServiceKind::sensing, kSense, 1},
  };
  static const std::vector<BaseDef> ov = {
      {"calibrate", ServiceKind::actuation, 3, 1},
      {"burn", ServiceKind::actuation, 8, 2},
      {"getMotorSpeed", ServiceKind::sensing, kSense, 1},
      {"setMotorSpeed", ServiceKind::actuation, 1, 1},
      {"resetAllMotors", ServiceKind::actuation, 1, 1},
      {"statusOfLightBarrier", ServiceKind::sensing, kSense, 1},
      {"stateOfMachine", ServiceKind::sensing, kSense, 1},
  };
  static const std::vector<BaseDef> pm = {
      {"calibrate", ServiceKind::actuation, 3, 1},
      {"punch", ServiceKind::actuation, 8, 2},
      {"transportFromTo", ServiceKind::actuation, 5, 3},
      {"getMotorSpeed", ServiceKind::sensing, kSense, 3},
      {"setMotorSpeed", ServiceKind::actuation, 1, 3},
      {"resetAllMotors", ServiceKind::actuation, 1, 1},
      {"capacitiveSensor", ServiceKind::sensing, kSense, 3},
      {"statusOfLightBarrier", ServiceKind::sensing, kSense, 2},
      {"stateOfMachine", ServiceKind::sensing, kSense, 1},
  };
  static const std::vector<BaseDef> sm = {
      {"sort", ServiceKind::actuation, 5, 20},
      {"getMotorSpeed", ServiceKind::sensing, kSense, 1},
      {"setMotorSpeed", ServiceKind::actuation, 1, 1},
      {"resetAllMotors", ServiceKind::actuation, 1, 1},
      {"statusOfLightBarrier", ServiceKind::sensing, kSense, 5},
      {"stateOfMachine", ServiceKind::sensing, kSense, 1},
  };
  static const std::vector<BaseDef> vgr = {
      {"calibrate", ServiceKind::actuation, 3, 4},
      {"moveTo", ServiceKind::actuation, 5, 9},
      {"pickUpAndTransport", ServiceKind::actuation, 5, 72},
      {"checkPosition", ServiceKind::sensing, kSense, 9},
      {"getMotorSpeed", ServiceKind::sensing, kSense, 3},
      {"setMotorSpeed", ServiceKind::actuation, 1, 3},
      {"resetAllMotors", ServiceKind::actuation, 1, 1},
      {"stateOfMachine", ServiceKind::sensing, kSense, 1},
  };
  static const std::vector<BaseDef> wt = {
      {"calibrate", ServiceKind::actuation, 3, 1},
      {"moveTo", ServiceKind::actuation, 5, 2},
      {"pickUpAndTransport", ServiceKind::actuation, 5, 2},
      {"checkPosition", ServiceKind::sensing, kSense, 2},
      {"getMotorSpeed", ServiceKind::sensing, kSense, 3},
      {"setMotorSpeed", ServiceKind::actuation, 1, 3},
      {"resetAllMotors", ServiceKind::actuation, 1, 1},
      {"stateOfMachine", ServiceKind::sensing, kSense, 1},
  };
  switch (kind) {
    case MachineKind::drilling_machine: return dm;
    case MachineKind::high_bay_warehouse: return hbw;
    case MachineKind::milling_machine: return mm;
    case MachineKind::oven: return ov;
    case MachineKind::punching_machine: return pm;
    case MachineKind::sorting_machine: return sm;
    case MachineKind::vacuum_gripper_robot: return vgr;
    case MachineKind::workstation_transport: return wt;
  }
  throw std::logic_error("unknown machine kind");
}

using ParamList = std::vector<std::pair<std::string, std::string>>;

std::vector<ParamList> expand_grid(const MachineSpec& m, const std::string& base) {
  std::vector<ParamList> out;
  auto single = [&](const std::string& key, const std::vector<std::string>& values) {
    for (const std::string& v : values) out.push_back({{key, v}});
  };
  auto ordered_pairs = [&](const std::vector<std::string>& values, bool include_equal) {
    for (const std::string& a : values)
      for (const std::string& b : values) {
        if (!include_equal && a == b) continue;
        out.push_back({{"start", a}, {"end", b}});
      }
  };

  if (base == "calibrate") {
    if (m.kind == MachineKind::high_bay_warehouse || m.kind == MachineKind::vacuum_gripper_robot)
      single("reference", {"ref_1", "ref_2", "ref_3", "ref_4"});
    else
      out.push_back({});
  } else if (base == "drill" || base == "punch" || base == "burn") {
    single("duration", {"standard", "extended"});
  } else if (base == "mill") {
    single("program", {"p1", "p2", "p3", "p4"});
  } else if (base == "transportFromTo") {
    if (m.kind == MachineKind::milling_machine) ordered_pairs(m.positions, false);
    else single("route", {"entry_to_machine", "machine_to_exit", "entry_to_exit"});
  } else if (base == "moveFromTo") {
    ordered_pairs(m.positions, false);
  } else if (base == "changeBuckets") {
    std::vector<std::string> slots;
    for (int i = 1; i <= m.slots; ++i) slots.push_back("slot_" + std::to_string(i));
    ordered_pairs(slots, true);
  } else if (base == "store" || base == "unload") {
    std::vector<std::string> values;
    for (int i = 1; i <= m.slots; ++i) values.push_back(std::to_string(i));
    values.push_back("auto");
    single("slot", values);
  } else if (base == "moveTo" || base == "checkPosition") {
    single("position", m.positions);
  } else if (base == "pickUpAndTransport") {
    ordered_pairs(m.positions, false);
  } else if (base == "getMotorSpeed" || base == "setMotorSpeed") {
    single("motor", m.motors);
  } else if (base == "capacitiveSensor") {
    std::vector<std::string> pins;
    for (int p : m.capacitive_sensors) pins.push_back(std::to_string(p));
    single("position", pins);
  } else if (base == "statusOfLightBarrier") {
    std::vector<std::string> pins;
    for (int p : m.light_barriers) pins.push_back(std::to_string(p));
    single("lb", pins);
  } else if (base == "sort") {
    for (const char* color : {"white", "red", "blue", "yellow"})
      for (const char* target : {"sink_1", "sink_2", "sink_3", "reject", "pass_through"})
        out.push_back({{"color", color}, {"ejection", target}});
  } else if (base == "stateOfMachine" || base == "resetAllMotors" ||
             base == "getAmountOfStoredWorkpieces") {
    out.push_back({});
  } else {
    throw std::logic_error("no grid for base service " + base);
  }
  return out;
}

// Parameter-name order per base, used for URL canonicalization.
std::vector<std::string> param_names(const MachineSpec& m, const std::string& base) {
  if (base == "calibrate")
    return (m.kind == MachineKind::high_bay_warehouse ||
            m.kind == MachineKind::vacuum_gripper_robot)
               ? std::vector<std::string>{"reference"}
               : std::vector<std::string>{};
  if (base == "drill" || base == "punch" || base == "burn") return {"duration"};
  if (base == "mill") return {"program"};
  if (base == "transportFromTo")
    return m.kind == MachineKind::milling_machine ? std::vector<std::string>{"start", "end"}
                                                  : std::vector<std::string>{"route"};
  if (base == "moveFromTo" || base == "changeBuckets" || base == "pickUpAndTransport")
    return {"start", "end"};
  if (base == "store" || base == "unload") return {"slot"};
  if (base == "moveTo" || base == "checkPosition" || base == "capacitiveSensor")
    return {"position"};
  if (base == "getMotorSpeed" || base == "setMotorSpeed") return {"motor"};
  if (base == "statusOfLightBarrier") return {"lb"};
  if (base == "sort") return {"color", "ejection"};
  return {};
}

std::string machine_token(const MachineSpec& m) {
  // "vgr_1" → "VGR_1"
  return kind_tag(m.kind) + m.id.substr(m.url_prefix.size());
}

Iri service_iri(const MachineSpec& m, const std::string& base, const ParamList& params) {
  std::string name = "Service_" + kind_tag(m.kind) + "_" + util::title_snake(util::snake_case(base)) +
                     "_" + machine_token(m);
  for (const auto& [k, v] : params) name += "_" + util::title_snake(k) + "_" + util::title_snake(v);
  return Iri::local(name);
}

Iri class_iri(MachineKind kind, const std::string& base) {
  std::string camel = base;
  camel[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(camel[0])));
  return Iri::local("Service" + kind_tag(kind) + camel);
}

Iri description_iri(MachineKind kind, const std::string& base) {
  return Iri::local("Service_Description_" + kind_tag(kind) + "_" +
                    util::title_snake(util::snake_case(base)));
}

// Builds ConditionBindings; condition IRIs follow the fixed per-checker templates.
class ConditionFactory {
 public:
  ConditionFactory(const Topology& topo) : topo_(topo) {}

  ConditionBinding ready(ConditionRole role, const std::string& machine_id) const {
    const MachineSpec& m = spec(machine_id);
    return {Iri::local(prefix(role) + machine_token(m) + "_State_Of_Machine_Ready"),
            service_url(topo_.host, m.url_prefix, "state_of_machine", {{"machine", m.id}}),
            "state", "ready"};
  }

  ConditionBinding monitor_is(ConditionRole role, const Monitor& mon, bool expected) const {
    const MachineSpec& m = spec(mon.machine);
    const std::string pin = std::to_string(mon.pin);
    const std::string value = expected ? "true" : "false";
    const std::string tail = expected ? "True" : "False";
    if (mon.kind == SensorKind::light_barrier)
      return {Iri::local(prefix(role) + machine_token(m) + "_Status_Of_Light_Barrier_" + pin +
                         "_Interrupted_" + tail),
              service_url(topo_.host, m.url_prefix, "status_of_light_barrier",
                          {{"machine", m.id}, {"lb", pin}}),
              "interrupted", value};
    return {Iri::local(prefix(role) + machine_token(m) + "_Capacitive_Sensor_" + pin +
                       "_Detected_" + tail),
            service_url(topo_.host, m.url_prefix, "capacitive_sensor",
                        {{"machine", m.id}, {"position", pin}}),
            "detected", value};
  }

  ConditionBinding wt_not_at_oven(ConditionRole role, int floor) const {
    const MachineSpec& m = spec("wt_" + std::to_string(floor));
    return {Iri::local(prefix(role) + machine_token(m) + "_Check_Position_Oven_False"),
            service_url(topo_.host, m.url_prefix, "check_position",
                        {{"machine", m.id}, {"position", "oven"}}),
            "at_position", "false"};
  }

 private:
  static std::string prefix(ConditionRole role) {
    return role == ConditionRole::pre ? "Precondition_" : "Postcondition_";
  }
  const MachineSpec& spec(const std::string& id) const {
    const MachineSpec* m = topo_.machine(id);
    if (!m) throw std::logic_error("unknown machine " + id);
    return *m;
  }
  const Topology& topo_;
};

void add_condition(std::vector<ConditionBinding>& list, ConditionBinding binding) {
  auto pos = std::lower_bound(list.begin(), list.end(), binding,
                              [](const ConditionBinding& a, const ConditionBinding& b) {
                                return a.condition < b.condition;
                              });
  if (pos != list.end() && pos->condition == binding.condition) return;
  list.insert(pos, std::move(binding));
}

int world_floor(const std::string& position) {
  auto f = position.rfind("_f");
  if (f == std::string::npos) return 1;
  return std::stoi(position.substr(f + 2));
}

bool is_oven_spot(const std::string& position) {
  return position == "oven" || position.rfind("oven_f", 0) == 0;
}

// The transport rules: provider ready, destination owner ready, occupancy
// sensors at both ends, the shared-oven guard, and the arrival postcondition.
void transport_conditions(const Topology& topo, const ConditionFactory& f, ServiceDescription& svc,
                          const std::string& pickup_pos, const std::string& deposit_pos) {
  const WorldPosition* src = topo.position(pickup_pos);
  const WorldPosition* dst = topo.position(deposit_pos);
  if (!src || !dst) throw std::logic_error("unresolved transport endpoint");

  add_condition(svc.preconditions, f.ready(ConditionRole::pre, svc.provider));
  add_condition(svc.preconditions, f.ready(ConditionRole::pre, dst->owner));
  if (src->monitor)
    add_condition(svc.preconditions, f.monitor_is(ConditionRole::pre, *src->monitor, true));
  if (dst->monitor)
    add_condition(svc.preconditions, f.monitor_is(ConditionRole::pre, *dst->monitor, false));
  if (is_oven_spot(dst->name))
    add_condition(svc.preconditions,
                  f.wt_not_at_oven(ConditionRole::pre, world_floor(dst->name)));
  if (dst->monitor)
    add_condition(svc.postconditions, f.monitor_is(ConditionRole::post, *dst->monitor, true));

  svc.required_resources.insert(svc.provider);
  svc.required_resources.insert(src->owner);
  svc.required_resources.insert(dst->owner);
}

void processing_conditions(const Topology& topo, const ConditionFactory& f,
                           ServiceDescription& svc, const std::string& station_pos) {
  const WorldPosition* station = topo.position(station_pos);
  if (!station || !station->monitor) throw std::logic_error("processing station needs a sensor");
  add_condition(svc.preconditions, f.ready(ConditionRole::pre, svc.provider));
  add_condition(svc.preconditions, f.monitor_is(ConditionRole::pre, *station->monitor, true));
  add_condition(svc.postconditions, f.monitor_is(ConditionRole::post, *station->monitor, true));
  svc.required_resources.insert(svc.provider);
  svc.required_resources.insert(station->owner);
}

std::string floor_suffix_of(const MachineSpec& m) {
  const int floor = m.id.back() - '0';
  return floor <= 1 ? "" : "_f" + std::to_string(floor);
}

void attach_conditions(const Topology& topo, const ConditionFactory& f, ServiceDescription& svc,
                       const MachineSpec& m) {
  svc.required_resources.insert(svc.provider);
  if (svc.kind == ServiceKind::sensing) return;  // sensing carries no conditions

  auto param = [&](const char* key) -> std::string {
    for (const auto& [k, v] : svc.parameters)
      if (k == key) return v;
    throw std::logic_error(std::string("missing parameter ") + key);
  };

  const std::string& base = svc.base_name;
  if (base == "pickUpAndTransport" || (base == "transportFromTo" && !svc.parameters.empty() &&
                                       svc.parameters[1].first == "start") ||
      base == "moveFromTo") {
    transport_conditions(topo, f, svc, topo.resolve(m, param("start")).pickup,
                         topo.resolve(m, param("end")).deposit);
    return;
  }
  if (base == "transportFromTo") {  // drilling/punching conveyor routes
    const std::string route = param("route");
    auto sep = route.find("_to_");
    transport_conditions(topo, f, svc, topo.resolve(m, route.substr(0, sep)).pickup,
                         topo.resolve(m, route.substr(sep + 4)).deposit);
    return;
  }
  if (base == "sort") {
    transport_conditions(topo, f, svc, m.id + "_entry",
                         topo.resolve(m, param("ejection")).deposit);
    return;
  }
  if (base == "burn") {
    processing_conditions(topo, f, svc, "oven" + floor_suffix_of(m));
    return;
  }
  if (base == "mill") {
    processing_conditions(topo, f, svc, m.id + "_pos_milling");
    return;
  }
  if (base == "drill" || base == "punch") {
    processing_conditions(topo, f, svc, m.id + "_machine");
    return;
  }
  if (base == "store" || base == "unload") {
    const WorldPosition* tray = topo.position("high_bay_warehouse" + floor_suffix_of(m));
    if (!tray || !tray->monitor) throw std::logic_error("warehouse tray needs a sensor");
    const bool occupied_before = base == "store";
    add_condition(svc.preconditions, f.ready(ConditionRole::pre, svc.provider));
    add_condition(svc.preconditions,
                  f.monitor_is(ConditionRole::pre, *tray->monitor, occupied_before));
    add_condition(svc.postconditions,
                  f.monitor_is(ConditionRole::post, *tray->monitor, !occupied_before));
    return;
  }
  // calibrate, moveTo, setMotorSpeed, resetAllMotors, changeBuckets: provider readiness only.
  add_condition(svc.preconditions, f.ready(ConditionRole::pre, svc.provider));
}

}  // namespace

std::string service_url(const std::string& host, const std::string& prefix,
                        const std::string& base_snake,
                        const std::vector<std::pair<std::string, std::string>>& parameters) {
  auto kind = kind_from_prefix(prefix);
  if (!kind) throw std::invalid_argument("unknown service prefix " + prefix);
  const BaseDef* def = nullptr;
  for (const BaseDef& b : bases_for(*kind))
    if (util::snake_case(b.camel) == base_snake) def = &b;
  if (!def) throw std::invalid_argument("unknown base service " + base_snake);

  std::string url = "http://" + host + "/" + prefix + "/" + base_snake;
  char sep = '?';
  for (const auto& [k, v] : parameters) {
    url += sep;
    url += k + "=" + v;
    sep = '&';
  }
  return url;
}

ServiceCatalog generate(const Topology& topology,
                        const std::map<std::string, double>& duration_overrides) {
  std::map<std::string, ServiceDescription> services;
  std::vector<BaseServiceEntry> base_entries;
  ConditionFactory factory(topology);

  const MachineKind kind_order[] = {
      MachineKind::drilling_machine,   MachineKind::high_bay_warehouse,
      MachineKind::milling_machine,    MachineKind::oven,
      MachineKind::punching_machine,   MachineKind::sorting_machine,
      MachineKind::vacuum_gripper_robot, MachineKind::workstation_transport,
  };
  for (MachineKind kind : kind_order)
    for (const BaseDef& base : bases_for(kind))
      base_entries.push_back({base.camel, kind, base.kind, base.expected});

  for (const MachineSpec& m : topology.machines) {
    for (const BaseDef& base : bases_for(m.kind)) {
      const std::string base_snake = util::snake_case(base.camel);
      double duration = base.duration;
      if (auto it = duration_overrides.find(base_snake); it != duration_overrides.end())
        duration = it->second;

      std::vector<ParamList> grid = expand_grid(m, base.camel);
      if (static_cast<int>(grid.size()) != base.expected)
        throw std::runtime_error("parameter grid for " + m.id + " " + base.camel + " produced " +
                                 std::to_string(grid.size()) + " services, expected " +
                                 std::to_string(base.expected));

      for (const ParamList& params : grid) {
        ParamList full{{"machine", m.id}};
        full.insert(full.end(), params.begin(), params.end());
        ServiceDescription svc{
            service_iri(m, base.camel, params), base.camel,          m.id, base.kind, full,
            service_url(topology.host, m.url_prefix, base_snake, full), {},   {},        {},
            duration};
        attach_conditions(topology, factory, svc, m);
        if (!services.emplace(svc.url, std::move(svc)).second)
          throw std::runtime_error("duplicate service url for " + m.id + " " + base.camel);
      }
    }
  }
  return ServiceCatalog(topology, std::move(services), std::move(base_entries));
}

const ServiceDescription* ServiceCatalog::lookup(const std::string& url) const {
  const util::ParsedUrl parsed = util::parse_url(url);
  auto segments = util::split(parsed.path.substr(parsed.path.empty() ? 0 : 1), '/');
  if (segments.size() != 2) return nullptr;
  auto kind = kind_from_prefix(segments[0]);
  if (!kind) return nullptr;

  auto machine_value = util::query_value(parsed, "machine");
  if (!machine_value) return nullptr;
  const MachineSpec* m = topology_.machine(*machine_value);
  if (!m || m->url_prefix != segments[0]) return nullptr;

  const BaseDef* def = nullptr;
  for (const BaseDef& b : bases_for(*kind))
    if (util::snake_case(b.camel) == segments[1]) def = &b;
  if (!def) return nullptr;

  ParamList canonical{{"machine", m->id}};
  for (const std::string& name : param_names(*m, def->camel)) {
    auto value = util::query_value(parsed, name);
    if (!value) return nullptr;
    canonical.emplace_back(name, *value);
  }
  auto it = services_.find(service_url(topology_.host, segments[0], segments[1], canonical));
  return it == services_.end() ? nullptr : &it->second;
}

namespace {

void emit_condition(std::vector<Triple>& out, const ConditionBinding& c, bool is_pre,
                    const std::map<std::string, const ServiceDescription*>& by_url) {
  out.push_back({c.condition, vocab::kType,
                 Iri::local(is_pre ? "Precondition" : "Postcondition")});
  auto checker = by_url.find(c.checker_url);
  if (checker == by_url.end())
    throw std::logic_error("condition checker not in catalog: " + c.checker_url);
  out.push_back({c.condition, vocab::kIsCheckedBy, checker->second->iri});
  out.push_back({c.condition, vocab::kRequiredKey, Literal::str(c.required_key)});
  out.push_back({c.condition, vocab::kRequiredValue, Literal::str(c.required_value)});
}

}  // namespace

std::vector<Triple> as_triples(const ServiceCatalog& catalog) {
  std::vector<Triple> out;
  const Iri service_root = Iri::local("Service");
  const Iri actuation_root = Iri::local("ActuationService");
  const Iri sensing_root = Iri::local("SensingService");
  out.push_back({actuation_root, vocab::kSubClassOf, service_root});
  out.push_back({sensing_root, vocab::kSubClassOf, service_root});
  out.push_back({Iri::local("Precondition"), vocab::kSubClassOf, Iri::local("Condition")});
  out.push_back({Iri::local("Postcondition"), vocab::kSubClassOf, Iri::local("Condition")});

  std::map<std::string, const ServiceDescription*> by_url;
  for (const auto& [url, svc] : catalog.services()) by_url[url] = &svc;

  for (const MachineSpec& m : catalog.topology().machines) {
    const Iri machine_iri = Iri::local(m.id);
    Iri kind_class = Iri::local(util::title_snake(std::string(kind_name(m.kind))));
    // CamelCase class names: High_Bay_Warehouse → HighBayWarehouse
    std::string camel;
    for (char ch : kind_class.local_name())
      if (ch != '_') camel += ch;
    kind_class = Iri::local(camel);
    out.push_back({machine_iri, vocab::kType, kind_class});
    out.push_back({kind_class, vocab::kSubClassOf, Iri::local("Machine")});
    for (const std::string& motor : m.motors) {
      const Iri motor_iri = Iri::local("motor_" + m.id + "_" + motor);
      out.push_back({motor_iri, vocab::kType, Iri::local("Motor")});
      out.push_back({motor_iri, vocab::kActuates, machine_iri});
    }
  }

  for (const auto& [url, svc] : catalog.services()) {
    const MachineSpec* m = catalog.topology().machine(svc.provider);
    const Iri cls = class_iri(m->kind, svc.base_name);
    const Iri desc = description_iri(m->kind, svc.base_name);
    out.push_back({svc.iri, vocab::kType, cls});
    out.push_back({cls, vocab::kSubClassOf,
                   svc.kind == ServiceKind::actuation ? actuation_root : sensing_root});
    out.push_back({svc.iri, vocab::kHasDescription, desc});
    out.push_back({desc, vocab::kType, Iri::local("ServiceDescription")});
    out.push_back({svc.iri, vocab::kHasUrl, Literal::str(url)});
    for (const ConditionBinding& c : svc.preconditions) {
      out.push_back({svc.iri, vocab::kHasPrecondition, c.condition});
      emit_condition(out, c, true, by_url);
    }
    for (const ConditionBinding& c : svc.postconditions) {
      out.push_back({svc.iri, vocab::kHasPostcondition, c.condition});
      emit_condition(out, c, false, by_url);
    }
  }

  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string counts_table(const ServiceCatalog& catalog) {
  std::map<std::string, std::map<std::string, int>> per_machine;  // id → base → count
  for (const auto& [url, svc] : catalog.services()) per_machine[svc.provider][svc.base_name]++;

  std::ostringstream os;
  int total = 0;
  for (const MachineSpec& m : catalog.topology().machines) {
    int machine_total = 0;
    for (const auto& [base, n] : per_machine[m.id]) machine_total += n;
    os << kind_name(m.kind) << " (" << m.id << "): " << machine_total << "\n";
    for (const BaseServiceEntry& entry : catalog.base_services()) {
      if (entry.machine_kind != m.kind) continue;
      os << "  " << entry.name << " (" << per_machine[m.id][entry.name] << ")\n";
    }
    total += machine_total;
  }
  os << "base: " << catalog.base_services().size() << ", total: " << total << "\n";
  if (catalog.topology().floors == 1)
    os << "note: nominal catalog size is 336; the parameter grids sum to 341\n";
  return os.str();
}

}  // namespace ftfloor

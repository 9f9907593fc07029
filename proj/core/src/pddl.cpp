#include "ftfloor/pddl.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "ftfloor/util.hpp"

namespace ftfloor::pddl {
namespace {

// ---------------------------------------------------------------- schemas

struct Param {
  std::string name;  // with leading '?'
  std::string type;
};

struct SchemaAtom {
  std::string pred;
  std::vector<std::string> args;  // parameter names
  bool negated = false;
};

struct Schema {
  std::string name;
  std::vector<Param> params;
  std::vector<SchemaAtom> pre;
  std::vector<SchemaAtom> eff;
};

const std::set<std::string>& static_predicates() {
  static const std::set<std::string> preds{
      "vgr-route", "wt-route", "mm-route", "dm-route", "pm-route",
      "owner", "burn-station", "mill-station", "drill-station", "punch-station",
      "hbw-handover", "hbw-slot", "sort-entry", "sort-target"};
  return preds;
}

std::vector<SchemaAtom> move_effects() {
  return {{"at", {"?w", "?from"}, true},
          {"occupied", {"?from"}, true},
          {"at", {"?w", "?to"}, false},
          {"occupied", {"?to"}, false}};
}

Schema transport_schema(const std::string& name, const std::string& route_pred) {
  Schema s;
  s.name = name;
  s.params = {{"?m", "machine"}, {"?w", "workpiece"}, {"?from", "position"}, {"?to", "position"}};
  s.pre = {{"ready", {"?m"}, false},
           {route_pred, {"?m", "?from", "?to"}, false},
           {"at", {"?w", "?from"}, false},
           {"occupied", {"?to"}, true}};
  s.eff = move_effects();
  return s;
}

Schema station_schema(const std::string& name, const std::string& station_pred,
                      const std::string& flag_pred) {
  Schema s;
  s.name = name;
  s.params = {{"?m", "machine"}, {"?w", "workpiece"}, {"?p", "position"}};
  s.pre = {{"ready", {"?m"}, false},
           {station_pred, {"?p", "?m"}, false},
           {"at", {"?w", "?p"}, false}};
  s.eff = {{flag_pred, {"?w"}, false}};
  return s;
}

const std::vector<Schema>& schemas() {
  static const std::vector<Schema> all = [] {
    std::vector<Schema> out;

    out.push_back(station_schema("burn", "burn-station", "burned"));

    {
      Schema s;
      s.name = "change_buckets";
      s.params = {{"?m", "machine"}, {"?w", "workpiece"}, {"?s1", "slot"}, {"?s2", "slot"}};
      s.pre = {{"ready", {"?m"}, false},
               {"hbw-slot", {"?s1", "?m"}, false},
               {"hbw-slot", {"?s2", "?m"}, false},
               {"stored", {"?w", "?s1"}, false},
               {"slot-free", {"?s2"}, false}};
      s.eff = {{"stored", {"?w", "?s1"}, true},
               {"slot-free", {"?s1"}, false},
               {"stored", {"?w", "?s2"}, false},
               {"slot-free", {"?s2"}, true}};
      out.push_back(s);
    }

    out.push_back(transport_schema("dm_transport_from_to", "dm-route"));
    out.push_back(station_schema("drill", "drill-station", "drilled"));
    out.push_back(station_schema("mill", "mill-station", "milled"));
    out.push_back(transport_schema("mm_transport_from_to", "mm-route"));
    out.push_back(transport_schema("move_from_to", "mm-route"));

    {
      Schema s;
      s.name = "pick_up_and_transport";
      s.params = {{"?m", "machine"},
                  {"?w", "workpiece"},
                  {"?from", "position"},
                  {"?to", "position"},
                  {"?dest-machine", "machine"}};
      s.pre = {{"ready", {"?m"}, false},
               {"vgr-route", {"?m", "?from", "?to"}, false},
               {"at", {"?w", "?from"}, false},
               {"occupied", {"?to"}, true},
               {"owner", {"?to", "?dest-machine"}, false},
               {"ready", {"?dest-machine"}, false},
               {"wt-at-oven", {}, true}};
      s.eff = move_effects();
      out.push_back(s);
    }

    out.push_back(transport_schema("pm_transport_from_to", "pm-route"));
    out.push_back(station_schema("punch", "punch-station", "punched"));

    {
      Schema s;
      s.name = "sort";
      s.params = {{"?m", "machine"}, {"?w", "workpiece"}, {"?from", "position"}, {"?to", "position"}};
      s.pre = {{"ready", {"?m"}, false},
               {"sort-entry", {"?from", "?m"}, false},
               {"sort-target", {"?to", "?m"}, false},
               {"at", {"?w", "?from"}, false},
               {"occupied", {"?to"}, true}};
      s.eff = move_effects();
      s.eff.push_back({"sorted", {"?w"}, false});
      out.push_back(s);
    }

    {
      Schema s;
      s.name = "store";
      s.params = {{"?m", "machine"}, {"?w", "workpiece"}, {"?p", "position"}, {"?s", "slot"}};
      s.pre = {{"ready", {"?m"}, false},
               {"hbw-handover", {"?p", "?m"}, false},
               {"hbw-slot", {"?s", "?m"}, false},
               {"at", {"?w", "?p"}, false},
               {"slot-free", {"?s"}, false}};
      s.eff = {{"at", {"?w", "?p"}, true},
               {"occupied", {"?p"}, true},
               {"stored", {"?w", "?s"}, false},
               {"slot-free", {"?s"}, true}};
      out.push_back(s);
    }

    {
      Schema s;
      s.name = "unload";
      s.params = {{"?m", "machine"}, {"?w", "workpiece"}, {"?p", "position"}, {"?s", "slot"}};
      s.pre = {{"ready", {"?m"}, false},
               {"hbw-handover", {"?p", "?m"}, false},
               {"hbw-slot", {"?s", "?m"}, false},
               {"stored", {"?w", "?s"}, false},
               {"occupied", {"?p"}, true}};
      s.eff = {{"stored", {"?w", "?s"}, true},
               {"slot-free", {"?s"}, false},
               {"at", {"?w", "?p"}, false},
               {"occupied", {"?p"}, false}};
      out.push_back(s);
    }

    {
      Schema s;
      s.name = "wt_pick_up_and_transport";
      s.params = {{"?m", "machine"},
                  {"?w", "workpiece"},
                  {"?from", "position"},
                  {"?to", "position"},
                  {"?dest-machine", "machine"}};
      s.pre = {{"ready", {"?m"}, false},
               {"wt-route", {"?m", "?from", "?to"}, false},
               {"at", {"?w", "?from"}, false},
               {"occupied", {"?to"}, true},
               {"owner", {"?to", "?dest-machine"}, false},
               {"ready", {"?dest-machine"}, false}};
      s.eff = move_effects();
      s.eff.push_back({"wt-at-oven", {}, false});
      out.push_back(s);
    }

    std::sort(out.begin(), out.end(),
              [](const Schema& a, const Schema& b) { return a.name < b.name; });
    return out;
  }();
  return all;
}

// Typed signatures for the :predicates block.
const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>&
predicate_signatures() {
  using Sig = std::pair<std::string, std::vector<std::pair<std::string, std::string>>>;
  static const std::vector<Sig> sigs = [] {
    std::vector<Sig> out = {
        {"at", {{"?w", "workpiece"}, {"?p", "position"}}},
        {"burn-station", {{"?p", "position"}, {"?m", "machine"}}},
        {"burned", {{"?w", "workpiece"}}},
        {"dm-route", {{"?m", "machine"}, {"?from", "position"}, {"?to", "position"}}},
        {"drill-station", {{"?p", "position"}, {"?m", "machine"}}},
        {"drilled", {{"?w", "workpiece"}}},
        {"hbw-handover", {{"?p", "position"}, {"?m", "machine"}}},
        {"hbw-slot", {{"?s", "slot"}, {"?m", "machine"}}},
        {"mill-station", {{"?p", "position"}, {"?m", "machine"}}},
        {"milled", {{"?w", "workpiece"}}},
        {"mm-route", {{"?m", "machine"}, {"?from", "position"}, {"?to", "position"}}},
        {"occupied", {{"?p", "position"}}},
        {"owner", {{"?p", "position"}, {"?m", "machine"}}},
        {"pm-route", {{"?m", "machine"}, {"?from", "position"}, {"?to", "position"}}},
        {"punch-station", {{"?p", "position"}, {"?m", "machine"}}},
        {"punched", {{"?w", "workpiece"}}},
        {"ready", {{"?m", "machine"}}},
        {"slot-free", {{"?s", "slot"}}},
        {"sort-entry", {{"?p", "position"}, {"?m", "machine"}}},
        {"sort-target", {{"?p", "position"}, {"?m", "machine"}}},
        {"sorted", {{"?w", "workpiece"}}},
        {"stored", {{"?w", "workpiece"}, {"?s", "slot"}}},
        {"vgr-route", {{"?m", "machine"}, {"?from", "position"}, {"?to", "position"}}},
        {"wt-at-oven", {}},
        {"wt-route", {{"?m", "machine"}, {"?from", "position"}, {"?to", "position"}}},
    };
    return out;
  }();
  return sigs;
}

// ------------------------------------------------------------------ model

std::string atom_text(const std::string& pred, const std::vector<std::string>& args) {
  std::string out = "(" + pred;
  for (const auto& a : args) out += " " + a;
  out += ")";
  return out;
}

struct Model {
  std::map<std::string, std::vector<std::string>> objects;  // type -> names
  std::set<std::string> statics;
  std::set<std::string> dynamic_init;
};

std::string flag_pred(const std::string& flag) { return flag; }  // burned, milled, ...

Model build_model(const ServiceCatalog& catalog, const FactoryState& state) {
  const Topology& topo = catalog.topology();
  Model model;
  auto& machines = model.objects["machine"];
  auto& positions = model.objects["position"];
  auto& slots = model.objects["slot"];
  auto& workpieces = model.objects["workpiece"];

  for (const MachineSpec& m : topo.machines) {
    machines.push_back(m.id);
    for (int i = 1; i <= m.slots; ++i) slots.push_back(SlotRef{m.id, i}.name());
  }
  for (const WorldPosition& pos : topo.positions) {
    positions.push_back(pos.name);
    model.statics.insert(atom_text("owner", {pos.name, pos.owner}));
  }
  for (const auto& [id, wp] : state.workpieces) workpieces.push_back(id);

  for (const auto& [url, svc] : catalog.services()) {
    if (svc.kind != ServiceKind::actuation) continue;
    const std::string& m = svc.provider;
    const MachineSpec& spec = *topo.machine(m);
    auto param = [&](const std::string& key) -> std::string {
      for (const auto& [k, v] : svc.parameters)
        if (k == key) return v;
      return "";
    };
    const std::string& base = svc.base_name;
    if (base == "pickUpAndTransport") {
      const std::string from = topo.resolve(spec, param("start")).pickup;
      const std::string to = topo.resolve(spec, param("end")).deposit;
      const char* pred = spec.kind == MachineKind::workstation_transport ? "wt-route" : "vgr-route";
      model.statics.insert(atom_text(pred, {m, from, to}));
    } else if (base == "transportFromTo" || base == "moveFromTo") {
      std::string pred;
      std::string from, to;
      if (spec.kind == MachineKind::milling_machine) {
        pred = "mm-route";
        from = topo.resolve(spec, param("start")).pickup;
        to = topo.resolve(spec, param("end")).deposit;
      } else {
        pred = spec.kind == MachineKind::drilling_machine ? "dm-route" : "pm-route";
        const std::string route = param("route");
        auto cut = route.find("_to_");
        from = topo.resolve(spec, route.substr(0, cut)).pickup;
        to = topo.resolve(spec, route.substr(cut + 4)).deposit;
      }
      model.statics.insert(atom_text(pred, {m, from, to}));
    } else if (base == "burn") {
      model.statics.insert(atom_text("burn-station", {topo.resolve(spec, "oven").pickup, m}));
    } else if (base == "mill") {
      model.statics.insert(atom_text("mill-station", {topo.resolve(spec, "pos_milling").pickup, m}));
    } else if (base == "drill") {
      model.statics.insert(atom_text("drill-station", {topo.resolve(spec, "machine").pickup, m}));
    } else if (base == "punch") {
      model.statics.insert(atom_text("punch-station", {topo.resolve(spec, "machine").pickup, m}));
    } else if (base == "store" || base == "unload") {
      // The handover tray is the one world position the warehouse owns.
      for (const WorldPosition& pos : topo.positions)
        if (pos.owner == m) model.statics.insert(atom_text("hbw-handover", {pos.name, m}));
      for (int i = 1; i <= spec.slots; ++i)
        model.statics.insert(atom_text("hbw-slot", {SlotRef{m, i}.name(), m}));
    } else if (base == "sort") {
      model.statics.insert(atom_text("sort-entry", {topo.resolve(spec, "entry").pickup, m}));
      model.statics.insert(
          atom_text("sort-target", {topo.resolve(spec, param("ejection")).deposit, m}));
    }
  }

  for (const auto& [id, rt] : state.machines) {
    if (rt.state == MachineState::ready) model.dynamic_init.insert(atom_text("ready", {id}));
    const MachineSpec* spec = topo.machine(id);
    if (spec && spec->kind == MachineKind::workstation_transport && rt.element_position == "oven")
      model.dynamic_init.insert(atom_text("wt-at-oven", {}));
  }
  for (const auto& [id, wp] : state.workpieces) {
    if (const auto* pos = std::get_if<std::string>(&wp.location)) {
      model.dynamic_init.insert(atom_text("at", {id, *pos}));
      model.dynamic_init.insert(atom_text("occupied", {*pos}));
    } else {
      model.dynamic_init.insert(atom_text("stored", {id, std::get<SlotRef>(wp.location).name()}));
    }
    for (const char* flag : {"burned", "milled", "drilled", "punched", "sorted"})
      if (wp.flags.contains(flag))
        model.dynamic_init.insert(atom_text(flag_pred(flag), {id}));
  }
  for (const auto& [machine, per_slot] : state.slots)
    for (const auto& [idx, occupant] : per_slot)
      if (occupant.empty())
        model.dynamic_init.insert(atom_text("slot-free", {SlotRef{machine, idx}.name()}));

  return model;
}

// -------------------------------------------------------------- grounding

struct GroundAction {
  std::string label;
  std::vector<int> pre_pos, pre_neg, add, del;
};

struct Task {
  std::vector<std::string> atom_names;
  std::map<std::string, int> atom_ids;
  std::vector<GroundAction> actions;
  std::set<int> init;
  std::vector<int> goal;

  int intern(const std::string& atom) {
    auto [it, inserted] = atom_ids.try_emplace(atom, static_cast<int>(atom_names.size()));
    if (inserted) atom_names.push_back(atom);
    return it->second;
  }
};

std::string substitute(const SchemaAtom& atom, const std::map<std::string, std::string>& bind) {
  std::vector<std::string> args;
  args.reserve(atom.args.size());
  for (const auto& a : atom.args) args.push_back(bind.at(a));
  return atom_text(atom.pred, args);
}

void ground_schema(const Schema& schema, const Model& model, Task& task) {
  std::map<std::string, std::string> bind;
  auto rec = [&](auto&& self, std::size_t idx) -> void {
    if (idx == schema.params.size()) {
      GroundAction ga;
      ga.label = "(" + schema.name;
      for (const auto& p : schema.params) ga.label += " " + bind.at(p.name);
      ga.label += ")";
      for (const auto& atom : schema.pre) {
        if (static_predicates().contains(atom.pred)) continue;  // checked below
        int id = task.intern(substitute(atom, bind));
        (atom.negated ? ga.pre_neg : ga.pre_pos).push_back(id);
      }
      for (const auto& atom : schema.eff) {
        int id = task.intern(substitute(atom, bind));
        (atom.negated ? ga.del : ga.add).push_back(id);
      }
      task.actions.push_back(std::move(ga));
      return;
    }
    const Param& param = schema.params[idx];
    auto oit = model.objects.find(param.type);
    if (oit == model.objects.end()) return;
    for (const std::string& value : oit->second) {
      bind[param.name] = value;
      // Prune as soon as a fully bound static precondition is false.
      bool viable = true;
      for (const auto& atom : schema.pre) {
        if (!static_predicates().contains(atom.pred)) continue;
        bool bound = true;
        for (const auto& a : atom.args) bound = bound && bind.contains(a);
        if (!bound) continue;
        bool holds = model.statics.contains(substitute(atom, bind));
        if (holds == atom.negated) {
          viable = false;
          break;
        }
      }
      if (viable) self(self, idx + 1);
    }
    bind.erase(param.name);
  };
  rec(rec, 0);
}

Task build_task(const ServiceCatalog& catalog, const FactoryState& state,
                const std::vector<std::string>& goal_atoms) {
  Model model = build_model(catalog, state);
  Task task;
  for (const auto& atom : model.dynamic_init) task.init.insert(task.intern(atom));
  for (const Schema& schema : schemas()) ground_schema(schema, model, task);
  std::sort(task.actions.begin(), task.actions.end(),
            [](const GroundAction& a, const GroundAction& b) { return a.label < b.label; });
  for (const std::string& g : goal_atoms) task.goal.push_back(task.intern(util::trim(g)));
  return task;
}

bool applicable(const GroundAction& a, const std::set<int>& s) {
  for (int p : a.pre_pos)
    if (!s.contains(p)) return false;
  for (int n : a.pre_neg)
    if (s.contains(n)) return false;
  return true;
}

std::set<int> successor(const GroundAction& a, const std::set<int>& s) {
  std::set<int> out = s;
  for (int d : a.del) out.erase(d);
  for (int p : a.add) out.insert(p);
  return out;
}

// -------------------------------------------------------------- emit text

void emit_atom_list(std::ostringstream& os, const std::vector<SchemaAtom>& atoms,
                    const char* keyword) {
  os << "    " << keyword << " ";
  if (atoms.size() == 1 && !atoms[0].negated) {
    os << atom_text(atoms[0].pred, atoms[0].args);
  } else {
    os << "(and";
    for (const auto& a : atoms) {
      os << " ";
      if (a.negated) os << "(not " << atom_text(a.pred, a.args) << ")";
      else os << atom_text(a.pred, a.args);
    }
    os << ")";
  }
}

}  // namespace

std::string export_domain(const ServiceCatalog&) {
  std::ostringstream os;
  os << "(define (domain ftfloor)\n";
  os << "  (:requirements :strips :typing)\n";
  os << "  (:types machine position slot workpiece)\n";
  os << "  (:predicates\n";
  for (const auto& [pred, params] : predicate_signatures()) {
    os << "    (" << pred;
    for (const auto& [v, t] : params) os << " " << v << " - " << t;
    os << ")\n";
  }
  os << "  )\n";
  for (const Schema& schema : schemas()) {
    os << "  (:action " << schema.name << "\n";
    os << "    :parameters (";
    bool first = true;
    for (const auto& p : schema.params) {
      if (!first) os << " ";
      os << p.name << " - " << p.type;
      first = false;
    }
    os << ")\n";
    emit_atom_list(os, schema.pre, ":precondition");
    os << "\n";
    emit_atom_list(os, schema.eff, ":effect");
    os << "\n  )\n";
  }
  os << ")\n";
  return os.str();
}

std::string export_problem(const ServiceCatalog& catalog, const FactoryState& state,
                           const std::vector<std::string>& goal_atoms,
                           const std::string& name) {
  Model model = build_model(catalog, state);
  std::ostringstream os;
  os << "(define (problem " << name << ")\n";
  os << "  (:domain ftfloor)\n";
  os << "  (:objects\n";
  for (const char* type : {"machine", "position", "slot", "workpiece"}) {
    const auto& names = model.objects[type];
    if (names.empty()) continue;
    os << "    ";
    for (const auto& n : names) os << n << " ";
    os << "- " << type << "\n";
  }
  os << "  )\n";
  os << "  (:init\n";
  std::set<std::string> init = model.statics;
  init.insert(model.dynamic_init.begin(), model.dynamic_init.end());
  for (const auto& atom : init) os << "    " << atom << "\n";
  os << "  )\n";
  os << "  (:goal (and";
  for (const auto& g : goal_atoms) os << " " << util::trim(g);
  os << "))\n";
  os << ")\n";
  return os.str();
}

std::vector<std::string> parse_goal_file(std::string_view text) {
  std::vector<std::string> goals;
  int line_no = 0;
  for (const std::string& raw : util::split(std::string(text), '\n')) {
    ++line_no;
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() != '(' || line.back() != ')')
      throw SexprParseError("line " + std::to_string(line_no) +
                            ": goal atom must be parenthesized");
    goals.push_back(line);
  }
  return goals;
}

PlanResult solve(const ServiceCatalog& catalog, const FactoryState& state,
                 const std::vector<std::string>& goal_atoms, std::size_t max_states) {
  PlanResult result;
  if (goal_atoms.empty()) {
    result.reason = "empty goal";
    return result;
  }
  Task task = build_task(catalog, state, goal_atoms);

  // A goal atom no action can produce and the initial state lacks is a dead
  // end; report it instead of searching.
  std::set<int> producible = task.init;
  for (const auto& a : task.actions) producible.insert(a.add.begin(), a.add.end());
  for (std::size_t i = 0; i < task.goal.size(); ++i) {
    if (!producible.contains(task.goal[i])) {
      result.reason = "goal atom " + goal_atoms[i] + " is unreachable";
      return result;
    }
  }

  auto satisfied = [&](const std::set<int>& s) {
    for (int g : task.goal)
      if (!s.contains(g)) return false;
    return true;
  };

  std::vector<std::set<int>> states{task.init};
  std::map<std::set<int>, int> seen{{task.init, 0}};
  // parent state index and index of the action that produced the state
  std::vector<std::pair<int, int>> via{{-1, -1}};
  std::deque<int> frontier{0};

  auto reconstruct = [&](int idx) {
    std::vector<std::string> steps;
    while (via[idx].first >= 0) {
      steps.push_back(task.actions[via[idx].second].label);
      idx = via[idx].first;
    }
    std::reverse(steps.begin(), steps.end());
    return steps;
  };

  if (satisfied(task.init)) {
    result.found = true;
    return result;
  }

  while (!frontier.empty()) {
    int idx = frontier.front();
    frontier.pop_front();
    ++result.expanded;
    const std::set<int> current = states[idx];
    for (std::size_t ai = 0; ai < task.actions.size(); ++ai) {
      const GroundAction& action = task.actions[ai];
      if (!applicable(action, current)) continue;
      std::set<int> next = successor(action, current);
      auto [it, inserted] = seen.try_emplace(next, static_cast<int>(states.size()));
      if (!inserted) continue;
      states.push_back(next);
      via.emplace_back(idx, static_cast<int>(ai));
      if (satisfied(next)) {
        result.found = true;
        result.plan.steps = reconstruct(it->second);
        return result;
      }
      if (states.size() > max_states) {
        result.reason = "state cap of " + std::to_string(max_states) + " exceeded";
        return result;
      }
      frontier.push_back(it->second);
    }
  }
  result.reason = "search space exhausted without reaching the goal";
  return result;
}

// ----------------------------------------------------------------- replay

namespace {

std::vector<std::string> step_tokens(const std::string& step) {
  std::string inner = util::trim(step);
  if (inner.size() < 2 || inner.front() != '(' || inner.back() != ')')
    return {};
  inner = inner.substr(1, inner.size() - 2);
  std::vector<std::string> out;
  for (const auto& tok : util::split(inner, ' '))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

std::string slot_number(const std::string& machine, const std::string& slot_object) {
  const std::string prefix = machine + "_slot_";
  if (!slot_object.starts_with(prefix)) return "";
  return slot_object.substr(prefix.size());
}

}  // namespace

ReplayResult replay(const ServiceCatalog& catalog, FactoryState state, const Plan& plan) {
  const Topology& topo = catalog.topology();
  ReplayResult result;

  // Keyed lookup from ground-action shapes back to catalog URLs.
  std::map<std::string, std::string> keyed;
  for (const auto& [url, svc] : catalog.services()) {
    if (svc.kind != ServiceKind::actuation) continue;
    const std::string& m = svc.provider;
    const MachineSpec& spec = *topo.machine(m);
    auto param = [&](const std::string& key) -> std::string {
      for (const auto& [k, v] : svc.parameters)
        if (k == key) return v;
      return "";
    };
    const std::string& base = svc.base_name;
    if (base == "pickUpAndTransport") {
      const char* schema = spec.kind == MachineKind::workstation_transport
                               ? "wt_pick_up_and_transport"
                               : "pick_up_and_transport";
      keyed[std::string(schema) + "|" + m + "|" + topo.resolve(spec, param("start")).pickup + "|" +
            topo.resolve(spec, param("end")).deposit] = url;
    } else if (base == "transportFromTo" && spec.kind == MachineKind::milling_machine) {
      keyed["mm_transport_from_to|" + m + "|" + topo.resolve(spec, param("start")).pickup + "|" +
            topo.resolve(spec, param("end")).deposit] = url;
    } else if (base == "transportFromTo") {
      const std::string route = param("route");
      auto cut = route.find("_to_");
      const char* schema = spec.kind == MachineKind::drilling_machine ? "dm_transport_from_to"
                                                                      : "pm_transport_from_to";
      keyed[std::string(schema) + "|" + m + "|" + topo.resolve(spec, route.substr(0, cut)).pickup +
            "|" + topo.resolve(spec, route.substr(cut + 4)).deposit] = url;
    } else if (base == "moveFromTo") {
      keyed["move_from_to|" + m + "|" + topo.resolve(spec, param("start")).pickup + "|" +
            topo.resolve(spec, param("end")).deposit] = url;
    } else if (base == "burn" || base == "drill" || base == "punch") {
      if (param("duration") == "standard") keyed[util::snake_case(base) + "|" + m] = url;
    } else if (base == "mill") {
      if (param("program") == "p1") keyed["mill|" + m] = url;
    } else if (base == "store" || base == "unload") {
      keyed[base + "|" + m + "|" + param("slot")] = url;
    } else if (base == "changeBuckets") {
      keyed["change_buckets|" + m + "|" + param("start") + "|" + param("end")] = url;
    } else if (base == "sort") {
      keyed["sort|" + m + "|" + topo.resolve(spec, param("ejection")).deposit + "|" +
            param("color")] = url;
    }
  }

  auto fail = [&](std::size_t index, const std::string& step, const std::string& why) {
    result.error = "step " + std::to_string(index + 1) + " " + step + ": " + why;
    result.final_state = std::move(state);
    return result;
  };

  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const std::string& step = plan.steps[i];
    std::vector<std::string> tok = step_tokens(step);
    if (tok.size() < 2) return fail(i, step, "malformed ground action");
    const std::string& name = tok[0];
    const std::string& m = tok[1];
    std::string key;
    if (name == "pick_up_and_transport" || name == "wt_pick_up_and_transport" ||
        name == "dm_transport_from_to" || name == "mm_transport_from_to" ||
        name == "pm_transport_from_to" || name == "move_from_to") {
      if (tok.size() < 4) return fail(i, step, "malformed ground action");
      key = name + "|" + m + "|" + tok[2 + 1] + "|" + tok[3 + 1];  // skip ?w at tok[2]
    } else if (name == "burn" || name == "drill" || name == "punch" || name == "mill") {
      key = name + "|" + m;
    } else if (name == "store" || name == "unload") {
      if (tok.size() != 5) return fail(i, step, "malformed ground action");
      const std::string n = slot_number(m, tok[4]);
      if (n.empty()) return fail(i, step, "slot " + tok[4] + " does not belong to " + m);
      key = name + "|" + m + "|" + n;
    } else if (name == "change_buckets") {
      if (tok.size() != 5) return fail(i, step, "malformed ground action");
      const std::string a = slot_number(m, tok[3]);
      const std::string b = slot_number(m, tok[4]);
      if (a.empty() || b.empty()) return fail(i, step, "slots do not belong to " + m);
      key = name + "|" + m + "|slot_" + a + "|slot_" + b;
    } else if (name == "sort") {
      if (tok.size() != 5) return fail(i, step, "malformed ground action");
      const std::string occupant_id = occupant(state, tok[3]);
      if (occupant_id.empty()) return fail(i, step, "no workpiece at " + tok[3]);
      key = name + "|" + m + "|" + tok[4] + "|" + state.workpieces.at(occupant_id).color;
    } else {
      return fail(i, step, "unknown action schema '" + name + "'");
    }
    auto kit = keyed.find(key);
    if (kit == keyed.end()) return fail(i, step, "no catalog service matches");
    const ServiceDescription* svc = catalog.lookup(kit->second);
    auto applied = apply(state, topo, *svc);
    if (const auto* err = std::get_if<ApplyError>(&applied))
      return fail(i, step, err->message);
    state = std::move(std::get<TransitionResult>(applied).new_state);
    result.steps.push_back({step, kit->second});
  }
  result.ok = true;
  result.final_state = std::move(state);
  return result;
}

// ------------------------------------------------------------ s-expr text

Sexpr parse_sexpr(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == ';') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(' || c == ')') {
      flush();
      tokens.push_back(std::string(1, c));
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      current += c;
    }
  }
  flush();

  std::size_t pos = 0;
  auto parse = [&](auto&& self) -> Sexpr {
    if (pos >= tokens.size()) throw SexprParseError("unexpected end of input");
    const std::string tok = tokens[pos++];
    if (tok == "(") {
      Sexpr list;
      while (pos < tokens.size() && tokens[pos] != ")") list.items.push_back(self(self));
      if (pos >= tokens.size()) throw SexprParseError("missing closing parenthesis");
      ++pos;  // consume ')'
      return list;
    }
    if (tok == ")") throw SexprParseError("unbalanced closing parenthesis");
    Sexpr atom;
    atom.is_atom = true;
    atom.atom = tok;
    return atom;
  };
  Sexpr root = parse(parse);
  if (pos != tokens.size()) throw SexprParseError("trailing tokens after expression");
  return root;
}

std::string to_string(const Sexpr& e) {
  if (e.is_atom) return e.atom;
  std::string out = "(";
  for (std::size_t i = 0; i < e.items.size(); ++i) {
    if (i) out += " ";
    out += to_string(e.items[i]);
  }
  out += ")";
  return out;
}

namespace {

bool is_keyword(const Sexpr& e, const std::string& kw) {
  return !e.items.empty() && e.items[0].is_atom && e.items[0].atom == kw;
}

// Typed variable list: name* [- type]* sequences.
bool check_typed_list(const Sexpr& list, std::size_t start, bool variables,
                      std::vector<std::string>* errs, const std::string& where) {
  bool expect_type = false;
  bool any = true;
  for (std::size_t i = start; i < list.items.size(); ++i) {
    const Sexpr& item = list.items[i];
    if (!item.is_atom) {
      errs->push_back(where + ": expected a name, found a list");
      return false;
    }
    if (item.atom == "-") {
      expect_type = true;
      continue;
    }
    if (expect_type) {
      expect_type = false;
      continue;  // the type name
    }
    if (variables && item.atom[0] != '?')
      errs->push_back(where + ": variable '" + item.atom + "' must start with ?");
    if (!variables && item.atom[0] == '?')
      errs->push_back(where + ": unexpected variable '" + item.atom + "'");
  }
  if (expect_type) errs->push_back(where + ": dangling '-' without a type");
  return any;
}

void check_atom_shape(const Sexpr& e, bool allow_vars, std::vector<std::string>* errs,
                      const std::string& where) {
  if (e.is_atom || e.items.empty() || !e.items[0].is_atom) {
    errs->push_back(where + ": expected (predicate args...)");
    return;
  }
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    if (!e.items[i].is_atom) {
      errs->push_back(where + ": nested list inside atom");
      return;
    }
    if (!allow_vars && e.items[i].atom[0] == '?')
      errs->push_back(where + ": variable '" + e.items[i].atom + "' in ground atom");
  }
}

void check_condition(const Sexpr& e, bool allow_not, bool allow_vars,
                     std::vector<std::string>* errs, const std::string& where) {
  if (e.is_atom) {
    errs->push_back(where + ": bare atom, expected (pred ...)");
    return;
  }
  if (is_keyword(e, "and")) {
    for (std::size_t i = 1; i < e.items.size(); ++i)
      check_condition(e.items[i], allow_not, allow_vars, errs, where);
    return;
  }
  if (is_keyword(e, "not")) {
    if (!allow_not) {
      errs->push_back(where + ": negation is not allowed here");
      return;
    }
    if (e.items.size() != 2) {
      errs->push_back(where + ": (not ...) takes exactly one atom");
      return;
    }
    check_atom_shape(e.items[1], allow_vars, errs, where);
    return;
  }
  check_atom_shape(e, allow_vars, errs, where);
}

}  // namespace

std::vector<std::string> check_domain(const std::string& text) {
  std::vector<std::string> errs;
  Sexpr root;
  try {
    root = parse_sexpr(text);
  } catch (const SexprParseError& e) {
    errs.push_back(e.what());
    return errs;
  }
  if (!is_keyword(root, "define")) {
    errs.push_back("domain must start with (define ...)");
    return errs;
  }
  bool saw_domain = false, saw_predicates = false;
  for (std::size_t i = 1; i < root.items.size(); ++i) {
    const Sexpr& section = root.items[i];
    if (section.is_atom) {
      errs.push_back("unexpected bare atom '" + section.atom + "' in define");
      continue;
    }
    if (is_keyword(section, "domain")) {
      saw_domain = true;
    } else if (is_keyword(section, ":requirements")) {
      for (std::size_t j = 1; j < section.items.size(); ++j) {
        const std::string& req = section.items[j].atom;
        if (req != ":strips" && req != ":typing")
          errs.push_back("unsupported requirement " + req);
      }
    } else if (is_keyword(section, ":types")) {
      check_typed_list(section, 1, false, &errs, ":types");
    } else if (is_keyword(section, ":predicates")) {
      saw_predicates = true;
      for (std::size_t j = 1; j < section.items.size(); ++j) {
        const Sexpr& pred = section.items[j];
        if (pred.is_atom || pred.items.empty() || !pred.items[0].is_atom) {
          errs.push_back(":predicates entries must be (name ?v - type ...)");
          continue;
        }
        check_typed_list(pred, 1, true, &errs, "predicate " + pred.items[0].atom);
      }
    } else if (is_keyword(section, ":action")) {
      if (section.items.size() < 2 || !section.items[1].is_atom) {
        errs.push_back(":action without a name");
        continue;
      }
      const std::string name = section.items[1].atom;
      bool saw_params = false, saw_pre = false, saw_eff = false;
      for (std::size_t j = 2; j + 1 < section.items.size(); j += 2) {
        const Sexpr& kw = section.items[j];
        const Sexpr& value = section.items[j + 1];
        if (!kw.is_atom) {
          errs.push_back("action " + name + ": expected a keyword");
          continue;
        }
        if (kw.atom == ":parameters") {
          saw_params = true;
          if (value.is_atom) errs.push_back("action " + name + ": :parameters must be a list");
          else check_typed_list(value, 0, true, &errs, "action " + name + " parameters");
        } else if (kw.atom == ":precondition") {
          saw_pre = true;
          check_condition(value, true, true, &errs, "action " + name + " precondition");
        } else if (kw.atom == ":effect") {
          saw_eff = true;
          check_condition(value, true, true, &errs, "action " + name + " effect");
        } else {
          errs.push_back("action " + name + ": unsupported keyword " + kw.atom);
        }
      }
      if (!saw_params || !saw_pre || !saw_eff)
        errs.push_back("action " + name + ": needs :parameters, :precondition and :effect");
    } else {
      errs.push_back("unsupported domain section " +
                     (section.items.empty() ? "()" : section.items[0].atom));
    }
  }
  if (!saw_domain) errs.push_back("missing (domain <name>)");
  if (!saw_predicates) errs.push_back("missing (:predicates ...)");
  return errs;
}

std::vector<std::string> check_problem(const std::string& text) {
  std::vector<std::string> errs;
  Sexpr root;
  try {
    root = parse_sexpr(text);
  } catch (const SexprParseError& e) {
    errs.push_back(e.what());
    return errs;
  }
  if (!is_keyword(root, "define")) {
    errs.push_back("problem must start with (define ...)");
    return errs;
  }
  bool saw_problem = false, saw_domain = false, saw_init = false, saw_goal = false;
  for (std::size_t i = 1; i < root.items.size(); ++i) {
    const Sexpr& section = root.items[i];
    if (section.is_atom) {
      errs.push_back("unexpected bare atom '" + section.atom + "' in define");
      continue;
    }
    if (is_keyword(section, "problem")) {
      saw_problem = true;
    } else if (is_keyword(section, ":domain")) {
      saw_domain = true;
    } else if (is_keyword(section, ":objects")) {
      check_typed_list(section, 1, false, &errs, ":objects");
    } else if (is_keyword(section, ":init")) {
      saw_init = true;
      for (std::size_t j = 1; j < section.items.size(); ++j)
        check_atom_shape(section.items[j], false, &errs, ":init");
    } else if (is_keyword(section, ":goal")) {
      saw_goal = true;
      if (section.items.size() != 2) errs.push_back(":goal takes exactly one condition");
      else check_condition(section.items[1], false, false, &errs, ":goal");
    } else {
      errs.push_back("unsupported problem section " +
                     (section.items.empty() ? "()" : section.items[0].atom));
    }
  }
  if (!saw_problem) errs.push_back("missing (problem <name>)");
  if (!saw_domain) errs.push_back("missing (:domain <name>)");
  if (!saw_init) errs.push_back("missing (:init ...)");
  if (!saw_goal) errs.push_back("missing (:goal ...)");
  return errs;
}

}  // namespace ftfloor::pddl

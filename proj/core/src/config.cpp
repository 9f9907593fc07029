#include "ftfloor/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ftfloor/topology.hpp"
#include "ftfloor/util.hpp"

namespace ftfloor {

namespace {

std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  for (const std::string& item : util::split(value, ',')) {
    std::string v = util::trim(item);
    if (!v.empty()) out.push_back(std::move(v));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& value, int line) {
  std::vector<int> out;
  for (const std::string& item : parse_list(value)) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw std::runtime_error("config line " + std::to_string(line) + ": bad integer " + item);
    }
  }
  return out;
}

}  // namespace

Config parse_config(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section = "factory";
  std::string machine_id;
  int line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line_no) + ": unclosed section");
      std::string name = util::trim(line.substr(1, line.size() - 2));
      if (name.rfind("machine ", 0) == 0) {
        section = "machine";
        machine_id = util::trim(name.substr(8));
        if (machine_id.empty())
          throw std::runtime_error("config line " + std::to_string(line_no) +
                                   ": machine section needs an id");
      } else if (name == "factory" || name == "durations") {
        section = name;
      } else {
        throw std::runtime_error("config line " + std::to_string(line_no) + ": unknown section " +
                                 name);
      }
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = util::trim(line.substr(0, eq));
    const std::string value = util::trim(line.substr(eq + 1));

    if (section == "factory") {
      if (key == "host") {
        cfg.host = value;
      } else if (key == "floors") {
        cfg.floors = std::stoi(value);
      } else if (key == "clock") {
        if (value == "sim" || value == "simulated") cfg.clock = ClockMode::simulated;
        else if (value == "real") cfg.clock = ClockMode::real;
        else
          throw std::runtime_error("config line " + std::to_string(line_no) +
                                   ": clock must be sim or real");
      } else if (key == "real_ms_per_sim_second") {
        cfg.real_ms_per_sim_second = std::stoi(value);
      } else {
        throw std::runtime_error("config line " + std::to_string(line_no) + ": unknown key " + key);
      }
    } else if (section == "durations") {
      cfg.durations[key] = std::stod(value);
    } else {  // machine
      MachineOverride& ov = cfg.machine_overrides[machine_id];
      if (key == "positions") ov.positions = parse_list(value);
      else if (key == "motors") ov.motors = parse_list(value);
      else if (key == "light_barriers") ov.light_barriers = parse_int_list(value, line_no);
      else if (key == "capacitive_sensors") ov.capacitive_sensors = parse_int_list(value, line_no);
      else
        throw std::runtime_error("config line " + std::to_string(line_no) + ": unknown key " + key);
    }
  }
  return cfg;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

Config resolve_config(const std::optional<std::string>& explicit_path) {
  if (explicit_path) return load_config_file(*explicit_path);
  if (const char* env = std::getenv("FTFLOOR_CONFIG"); env && *env) return load_config_file(env);
  return Config{};
}

Topology build_topology(const Config& config) {
  Topology topo = make_topology(config.floors, config.host);
  for (auto& machine : topo.machines) {
    auto it = config.machine_overrides.find(machine.id);
    if (it == config.machine_overrides.end()) continue;
    const MachineOverride& ov = it->second;
    if (ov.positions) machine.positions = *ov.positions;
    if (ov.motors) machine.motors = *ov.motors;
    if (ov.light_barriers) machine.light_barriers = *ov.light_barriers;
    if (ov.capacitive_sensors) machine.capacitive_sensors = *ov.capacitive_sensors;
  }
  return topo;
}

}  // namespace ftfloor

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ftfloor {

enum class ClockMode { simulated, real };

struct MachineOverride {
  std::optional<std::vector<std::string>> positions;
  std::optional<std::vector<std::string>> motors;
  std::optional<std::vector<int>> light_barriers;
  std::optional<std::vector<int>> capacitive_sensors;
};

struct Config {
  std::string host = "127.0.0.1:5000";
  int floors = 1;
  ClockMode clock = ClockMode::simulated;
  int real_ms_per_sim_second = 10;
  std::map<std::string, double> durations;  // base service name → sim seconds
  std::map<std::string, MachineOverride> machine_overrides;
};

// Key-value sections: [factory], [durations], [machine <id>]. '#' comments.
Config parse_config(const std::string& text);
Config load_config_file(const std::string& path);

// Resolution order: explicit path, then $FTFLOOR_CONFIG, then defaults.
Config resolve_config(const std::optional<std::string>& explicit_path);

struct Topology;

// Floor layout for the configured site with machine overrides applied.
Topology build_topology(const Config& config);

}  // namespace ftfloor

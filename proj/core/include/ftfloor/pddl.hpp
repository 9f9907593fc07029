#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftfloor/catalog.hpp"
#include "ftfloor/sim.hpp"

namespace ftfloor::pddl {

// --- s-expressions -----------------------------------------------------

struct Sexpr {
  std::string atom;          // set when leaf
  std::vector<Sexpr> items;  // set when list
  bool is_atom = false;
};

struct SexprParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Sexpr parse_sexpr(std::string_view text);
std::string to_string(const Sexpr& e);

// Structural checks against the :strips :typing subset this exporter emits.
// Returns human-readable problems; empty means well-formed.
std::vector<std::string> check_domain(const std::string& text);
std::vector<std::string> check_problem(const std::string& text);

// --- model export ------------------------------------------------------

std::string export_domain(const ServiceCatalog& catalog);
std::string export_problem(const ServiceCatalog& catalog, const FactoryState& state,
                           const std::vector<std::string>& goal_atoms,
                           const std::string& name = "floor");

// Goal files hold one ground atom per line, e.g. "(burned wp_1)".
std::vector<std::string> parse_goal_file(std::string_view text);

// --- planning ----------------------------------------------------------

struct Plan {
  // Ground steps like "(pick_up_and_transport vgr_1 wp_1 sink_1 oven ov_1)".
  std::vector<std::string> steps;
};

struct PlanResult {
  bool found = false;
  Plan plan;
  std::size_t expanded = 0;
  std::string reason;  // set when !found
};

// Breadth-first search over the grounded task: optimal in plan length,
// deterministic (actions expanded in lexicographic order).
PlanResult solve(const ServiceCatalog& catalog, const FactoryState& state,
                 const std::vector<std::string>& goal_atoms,
                 std::size_t max_states = 1000000);

// --- replay ------------------------------------------------------------

struct ReplayStep {
  std::string action;  // ground step
  std::string url;     // service invocation it maps to
};

struct ReplayResult {
  bool ok = false;
  std::vector<ReplayStep> steps;
  FactoryState final_state;
  std::string error;
};

// Maps ground actions back onto catalog services and applies each one to the
// simulated state; parameters the model abstracts away (sort colors) are
// taken from the state at replay time.
ReplayResult replay(const ServiceCatalog& catalog, FactoryState state, const Plan& plan);

}  // namespace ftfloor::pddl

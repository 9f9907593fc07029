#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ftfloor {

class Gateway;

struct ServiceStep {
  std::string url;
};
struct HumanStep {
  std::string id;
  std::string label;
};
using WorkflowStep = std::variant<ServiceStep, HumanStep>;

struct Workflow {
  std::vector<WorkflowStep> steps;
};

struct WorkflowParseError : std::runtime_error {
  WorkflowParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
  int line;
};

// Line format:
//   service <url>
//   human <id> "<label>"
// Blank lines and lines starting with # are skipped.
Workflow parse_workflow(std::string_view text);

struct StepResult {
  int index = 0;  // 1-based
  std::string kind;
  std::string detail;  // service url or task id
  int status = 0;      // HTTP status; 0 for human steps
  std::string outcome; // "ok", "completed", or an error_type
  std::map<std::string, std::string> response;
};

struct WorkflowResult {
  bool completed = false;
  std::vector<StepResult> steps;
  std::string trace;  // one JSON object per line, one line per executed step
};

// How the runner reaches the factory; the same runner drives an in-process
// gateway or a remote endpoint.
struct WorkflowClient {
  std::function<std::pair<int, std::map<std::string, std::string>>(const std::string& url)>
      invoke;
  std::function<void(const std::string& id, const std::string& label)> register_task;
  std::function<void(const std::string& id)> complete_task;
  std::function<void(const std::string& id)> wait_task;  // blocks until completed
};

WorkflowClient local_client(Gateway& gateway);
WorkflowClient remote_client(const std::string& endpoint);

// Runs steps strictly in order; the first non-ok service response aborts.
WorkflowResult run_workflow(const Workflow& workflow, const WorkflowClient& client,
                            bool auto_complete_human = false);

}  // namespace ftfloor

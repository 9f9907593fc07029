#pragma once

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>

#include "ftfloor/engine.hpp"

namespace ftfloor {

struct HttpResponse {
  int status = 200;
  std::string body;  // serialized JSON unless content_type says otherwise
  std::string content_type = "application/json";
};

enum class TaskOutcome { completed, already_completed, unknown };

// Outcome -> HTTP status code used for every execution response.
int http_status(Outcome outcome);

// Maps HTTP requests onto the execution engine. Transport-agnostic: the
// embedded server and the tests both talk to handle().
class Gateway {
 public:
  Gateway(std::shared_ptr<Engine> engine, FactoryState initial);

  HttpResponse handle(const std::string& method, const std::string& target);

  // Human work steps. Workflows register a task, then block until some
  // client posts /tasks/{id}/complete.
  bool register_task(const std::string& id, const std::string& label);
  TaskOutcome complete_task(const std::string& id);
  void wait_task(const std::string& id);
  bool task_completed(const std::string& id) const;

  Engine& engine() { return *engine_; }

 private:
  HttpResponse invoke(const std::string& target);
  HttpResponse catalog_listing() const;
  HttpResponse kb_conditions(const std::string& target) const;
  HttpResponse rfid_read(const std::string& target) const;
  HttpResponse admin_fault(const std::string& target);
  HttpResponse admin_reset();
  HttpResponse admin_state() const;
  HttpResponse task_route(const std::string& method, const std::string& target);

  std::shared_ptr<Engine> engine_;
  FactoryState initial_;

  struct HumanTask {
    std::string label;
    bool completed = false;
  };
  mutable std::mutex tasks_mu_;
  std::condition_variable tasks_cv_;
  std::map<std::string, HumanTask> tasks_;
};

}  // namespace ftfloor

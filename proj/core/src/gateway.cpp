#include "ftfloor/gateway.hpp"

#include <json.hpp>

#include "ftfloor/util.hpp"

namespace ftfloor {
namespace {

using json = nlohmann::json;

HttpResponse json_response(int status, const json& doc) {
  return {status, doc.dump(), "application/json"};
}

HttpResponse flat(int status, const std::map<std::string, std::string>& doc) {
  json j = json::object();
  for (const auto& [k, v] : doc) j[k] = v;
  return json_response(status, j);
}

HttpResponse error_doc(int status, const std::string& error_type,
                       const std::string& detail = "") {
  std::map<std::string, std::string> doc{{"status", "error"}, {"error_type", error_type}};
  if (!detail.empty()) doc["detail"] = detail;
  return flat(status, doc);
}

}  // namespace

int http_status(Outcome outcome) {
  switch (outcome) {
    case Outcome::ok: return 200;
    case Outcome::precondition_violated: return 422;
    case Outcome::postcondition_violated: return 500;
    case Outcome::unknown_service: return 404;
    case Outcome::machine_error:
    case Outcome::not_applicable:
    case Outcome::resource_full: return 409;
  }
  return 500;
}

Gateway::Gateway(std::shared_ptr<Engine> engine, FactoryState initial)
    : engine_(std::move(engine)), initial_(std::move(initial)) {}

HttpResponse Gateway::handle(const std::string& method, const std::string& target) {
  const std::string path = util::parse_url(target).path;
  if (method == "GET") {
    if (path == "/catalog") return catalog_listing();
    if (path == "/kb/conditions") return kb_conditions(target);
    if (path == "/rfid/read") return rfid_read(target);
    if (path == "/admin/state") return admin_state();
    if (path.starts_with("/tasks/")) return task_route(method, target);
    return invoke(target);
  }
  if (method == "POST") {
    if (path == "/admin/fault") return admin_fault(target);
    if (path == "/admin/reset") return admin_reset();
    if (path.starts_with("/tasks/")) return task_route(method, target);
    return error_doc(404, "not_found", path);
  }
  return error_doc(405, "method_not_allowed", method);
}

HttpResponse Gateway::invoke(const std::string& target) {
  const ServiceDescription* svc = engine_->catalog().lookup(target);
  if (!svc) return error_doc(404, "unknown_service", util::parse_url(target).path);
  if (svc->kind == ServiceKind::sensing) {
    auto rec = engine_->sense(target);
    if (!rec) return error_doc(404, "unknown_service");
    if (rec->outcome != Outcome::ok)
      return flat(http_status(rec->outcome), rec->response);
    return flat(200, rec->response);
  }
  Ticket ticket = engine_->submit(target);
  ExecutionRecord rec = engine_->await(ticket);
  return flat(http_status(rec.outcome), rec.response);
}

HttpResponse Gateway::catalog_listing() const {
  json out = json::array();
  for (const auto& [url, svc] : engine_->catalog().services()) out.push_back(url);
  return json_response(200, out);
}

HttpResponse Gateway::kb_conditions(const std::string& target) const {
  auto parsed = util::parse_url(target);
  const std::string service = util::query_value(parsed, "service").value_or("");
  const std::string role = util::query_value(parsed, "role").value_or("");
  if (service.empty() || (role != "pre" && role != "post"))
    return error_doc(400, "bad_request", "expected service=<url>&role=pre|post");
  const ServiceDescription* svc = engine_->catalog().lookup(service);
  if (!svc) return error_doc(404, "unknown_service", service);
  const auto& bindings = role == "pre" ? svc->preconditions : svc->postconditions;
  json out = json::array();
  for (const auto& b : bindings) {
    out.push_back({{"condition", b.condition.local_name()},
                   {"checker_url", b.checker_url},
                   {"required_key", b.required_key},
                   {"required_value", b.required_value}});
  }
  return json_response(200, out);
}

HttpResponse Gateway::rfid_read(const std::string& target) const {
  auto parsed = util::parse_url(target);
  const std::string station = util::query_value(parsed, "station").value_or("");
  if (station.empty()) return error_doc(400, "bad_request", "expected station=<position>");
  try {
    return flat(200, engine_->read_station_rfid(station));
  } catch (const SensorError& e) {
    return error_doc(404, "unknown_station", e.what());
  }
}

HttpResponse Gateway::admin_fault(const std::string& target) {
  auto parsed = util::parse_url(target);
  const std::string machine = util::query_value(parsed, "machine").value_or("");
  const std::string mode = util::query_value(parsed, "mode").value_or("");
  if (machine.empty() || (mode != "on" && mode != "off"))
    return error_doc(400, "bad_request", "expected machine=<id>&mode=on|off");
  try {
    engine_->set_fault(machine, mode == "on");
  } catch (const std::invalid_argument& e) {
    return error_doc(404, "unknown_machine", e.what());
  }
  return flat(200, {{"status", "ok"}, {"machine", machine}, {"mode", mode}});
}

HttpResponse Gateway::admin_reset() {
  engine_->reset(initial_);
  return flat(200, {{"status", "ok"}});
}

HttpResponse Gateway::admin_state() const {
  return {200, dump_state(engine_->snapshot()), "text/plain"};
}

HttpResponse Gateway::task_route(const std::string& method, const std::string& target) {
  auto parsed = util::parse_url(target);
  // /tasks/{id} or /tasks/{id}/complete or /tasks/{id}/register
  auto parts = util::split(parsed.path, '/');  // "", "tasks", id, [verb]
  if (parts.size() < 3 || parts[2].empty()) return error_doc(400, "bad_request", parsed.path);
  const std::string& id = parts[2];
  const std::string verb = parts.size() > 3 ? parts[3] : "";

  if (method == "GET" && verb.empty()) {
    std::lock_guard lk(tasks_mu_);
    auto it = tasks_.find(id);
    if (it == tasks_.end()) return error_doc(404, "unknown_task", id);
    return flat(200, {{"task", id},
                      {"label", it->second.label},
                      {"completed", it->second.completed ? "true" : "false"}});
  }
  if (method == "POST" && verb == "register") {
    const std::string label = util::query_value(parsed, "label").value_or("");
    register_task(id, label);
    return flat(200, {{"status", "ok"}, {"task", id}});
  }
  if (method == "POST" && verb == "complete") {
    switch (complete_task(id)) {
      case TaskOutcome::completed:
        return flat(200, {{"status", "ok"}, {"task", id}});
      case TaskOutcome::already_completed:
        return error_doc(409, "task_already_completed", id);
      case TaskOutcome::unknown:
        return error_doc(404, "unknown_task", id);
    }
  }
  return error_doc(404, "not_found", parsed.path);
}

bool Gateway::register_task(const std::string& id, const std::string& label) {
  std::lock_guard lk(tasks_mu_);
  auto [it, inserted] = tasks_.try_emplace(id, HumanTask{label, false});
  if (!inserted && !label.empty()) it->second.label = label;
  return inserted;
}

TaskOutcome Gateway::complete_task(const std::string& id) {
  std::lock_guard lk(tasks_mu_);
  auto it = tasks_.find(id);
  if (it == tasks_.end()) return TaskOutcome::unknown;
  if (it->second.completed) return TaskOutcome::already_completed;
  it->second.completed = true;
  tasks_cv_.notify_all();
  return TaskOutcome::completed;
}

void Gateway::wait_task(const std::string& id) {
  std::unique_lock lk(tasks_mu_);
  tasks_cv_.wait(lk, [&] {
    auto it = tasks_.find(id);
    return it != tasks_.end() && it->second.completed;
  });
}

bool Gateway::task_completed(const std::string& id) const {
  std::lock_guard lk(tasks_mu_);
  auto it = tasks_.find(id);
  return it != tasks_.end() && it->second.completed;
}

}  // namespace ftfloor

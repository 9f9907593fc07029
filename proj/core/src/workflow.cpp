#include "ftfloor/workflow.hpp"

#include <chrono>
#include <json.hpp>
#include <thread>

#include "ftfloor/gateway.hpp"
#include "ftfloor/http_server.hpp"
#include "ftfloor/util.hpp"

namespace ftfloor {
namespace {

using json = nlohmann::json;

std::map<std::string, std::string> flat_body(const std::string& body) {
  std::map<std::string, std::string> out;
  json doc = json::parse(body, nullptr, false);
  if (doc.is_object())
    for (auto& [k, v] : doc.items())
      out[k] = v.is_string() ? v.get<std::string>() : v.dump();
  return out;
}

}  // namespace

Workflow parse_workflow(std::string_view text) {
  Workflow wf;
  int line_no = 0;
  for (const std::string& raw : util::split(std::string(text), '\n')) {
    ++line_no;
    std::string line = util::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto space = line.find(' ');
    const std::string head = line.substr(0, space);
    std::string rest = space == std::string::npos ? "" : util::trim(line.substr(space + 1));
    if (head == "service") {
      if (rest.empty() || rest.find(' ') != std::string::npos)
        throw WorkflowParseError(line_no, "expected: service <url>");
      wf.steps.push_back(ServiceStep{rest});
    } else if (head == "human") {
      auto id_end = rest.find(' ');
      if (rest.empty() || id_end == std::string::npos)
        throw WorkflowParseError(line_no, "expected: human <id> \"<label>\"");
      const std::string id = rest.substr(0, id_end);
      std::string label = util::trim(rest.substr(id_end + 1));
      if (label.size() < 2 || label.front() != '"' || label.back() != '"')
        throw WorkflowParseError(line_no, "task label must be quoted");
      wf.steps.push_back(HumanStep{id, label.substr(1, label.size() - 2)});
    } else {
      throw WorkflowParseError(line_no, "unknown step kind '" + head + "'");
    }
  }
  return wf;
}

WorkflowClient local_client(Gateway& gateway) {
  WorkflowClient c;
  c.invoke = [&gateway](const std::string& url) {
    HttpResponse res = gateway.handle("GET", url);
    return std::pair{res.status, flat_body(res.body)};
  };
  c.register_task = [&gateway](const std::string& id, const std::string& label) {
    gateway.register_task(id, label);
  };
  c.complete_task = [&gateway](const std::string& id) { gateway.complete_task(id); };
  c.wait_task = [&gateway](const std::string& id) { gateway.wait_task(id); };
  return c;
}

WorkflowClient remote_client(const std::string& endpoint) {
  WorkflowClient c;
  c.invoke = [endpoint](const std::string& url) {
    auto res = http_request("GET", endpoint, url);
    if (!res)
      return std::pair{0, std::map<std::string, std::string>{
                              {"status", "error"}, {"error_type", "unreachable"}}};
    return std::pair{res->status, flat_body(res->body)};
  };
  c.register_task = [endpoint](const std::string& id, const std::string& label) {
    http_request("POST", endpoint, "/tasks/" + id + "/register?label=" + label);
  };
  c.complete_task = [endpoint](const std::string& id) {
    http_request("POST", endpoint, "/tasks/" + id + "/complete");
  };
  c.wait_task = [endpoint](const std::string& id) {
    for (;;) {
      auto res = http_request("GET", endpoint, "/tasks/" + id);
      if (res && res->status == 200) {
        auto doc = flat_body(res->body);
        auto it = doc.find("completed");
        if (it != doc.end() && it->second == "true") return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  };
  return c;
}

WorkflowResult run_workflow(const Workflow& workflow, const WorkflowClient& client,
                            bool auto_complete_human) {
  WorkflowResult result;
  int index = 0;
  for (const WorkflowStep& step : workflow.steps) {
    ++index;
    StepResult sr;
    sr.index = index;
    json line;
    line["step"] = index;
    if (const auto* svc = std::get_if<ServiceStep>(&step)) {
      sr.kind = "service";
      sr.detail = svc->url;
      auto [status, body] = client.invoke(svc->url);
      sr.status = status;
      sr.response = body;
      if (status >= 200 && status < 300) {
        sr.outcome = "ok";
      } else {
        auto it = body.find("error_type");
        sr.outcome = it != body.end() ? it->second : "error";
      }
      line["kind"] = "service";
      line["url"] = svc->url;
      line["status"] = status;
      line["outcome"] = sr.outcome;
      json resp = json::object();
      for (const auto& [k, v] : body) resp[k] = v;
      line["response"] = resp;
    } else {
      const auto& human = std::get<HumanStep>(step);
      sr.kind = "human";
      sr.detail = human.id;
      client.register_task(human.id, human.label);
      if (auto_complete_human) client.complete_task(human.id);
      client.wait_task(human.id);
      sr.outcome = "completed";
      line["kind"] = "human";
      line["task"] = human.id;
      line["label"] = human.label;
      line["outcome"] = "completed";
    }
    result.steps.push_back(sr);
    result.trace += line.dump();
    result.trace += '\n';
    if (sr.kind == "service" && sr.outcome != "ok") {
      result.completed = false;
      return result;
    }
  }
  result.completed = true;
  return result;
}

}  // namespace ftfloor

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "ftfloor/catalog.hpp"
#include "ftfloor/config.hpp"
#include "ftfloor/engine.hpp"
#include "ftfloor/gateway.hpp"
#include "ftfloor/http_server.hpp"
#include "ftfloor/kb.hpp"
#include "ftfloor/pddl.hpp"
#include "ftfloor/sim.hpp"
#include "ftfloor/util.hpp"
#include "ftfloor/workflow.hpp"

namespace {

using namespace ftfloor;

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop = true; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

FactoryState seeded_state(const Topology& topo, const std::string& scenario_path) {
  if (scenario_path.empty()) return initial_state(topo);
  return initial_state(topo, parse_scenario(read_file(scenario_path)));
}

struct Site {
  Topology topology;
  std::shared_ptr<ServiceCatalog> catalog;
};

Site make_site(const Config& cfg) {
  Site site;
  site.topology = build_topology(cfg);
  site.catalog = std::make_shared<ServiceCatalog>(generate(site.topology, cfg.durations));
  return site;
}

void print_flat_json(const std::map<std::string, std::string>& doc) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : doc) j[k] = v;
  std::cout << j.dump() << "\n";
}

int print_http(const std::optional<HttpResult>& res, const std::string& endpoint) {
  if (!res) {
    std::cerr << "error: cannot reach " << endpoint << "\n";
    return 1;
  }
  std::cout << res->body << "\n";
  return res->status >= 200 && res->status < 300 ? 0 : 1;
}

int run_serve(const Config& cfg, bool config_from_file, const std::string& clock_flag,
              int port_flag, const std::string& scenario_path) {
  ClockMode clock;
  if (clock_flag == "sim") clock = ClockMode::simulated;
  else if (clock_flag == "real") clock = ClockMode::real;
  else clock = config_from_file ? cfg.clock : ClockMode::real;

  Site site = make_site(cfg);
  std::string listen_host = cfg.host;
  int listen_port = 5000;
  if (auto colon = listen_host.rfind(':'); colon != std::string::npos) {
    listen_port = std::stoi(listen_host.substr(colon + 1));
    listen_host = listen_host.substr(0, colon);
  }
  if (port_flag > 0) listen_port = port_flag;

  FactoryState init = seeded_state(site.topology, scenario_path);
  auto engine = std::make_shared<Engine>(site.catalog, init, clock, cfg.real_ms_per_sim_second);
  if (clock == ClockMode::real) engine->start_scheduler();
  auto gateway = std::make_shared<Gateway>(engine, init);
  HttpServer server(gateway);
  if (!server.start(listen_host, listen_port)) {
    std::cerr << "error: cannot listen on " << listen_host << ":" << listen_port << "\n";
    return 1;
  }
  std::cerr << "listening on http://" << listen_host << ":" << server.port() << " ("
            << site.catalog->services().size() << " services, "
            << (clock == ClockMode::real ? "real" : "simulated") << " clock)\n";

  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  std::cerr << "shutting down\n";
  server.stop();
  engine->stop_scheduler();
  return 0;
}

int run_invoke(const Config& cfg, const std::string& url, const std::string& endpoint,
               const std::string& scenario_path) {
  if (!endpoint.empty()) return print_http(http_request("GET", endpoint, url), endpoint);
  Site site = make_site(cfg);
  Engine engine(site.catalog, seeded_state(site.topology, scenario_path));
  const ServiceDescription* svc = site.catalog->lookup(url);
  if (svc && svc->kind == ServiceKind::sensing) {
    auto rec = engine.sense(url);
    print_flat_json(rec->response);
    return rec->outcome == Outcome::ok ? 0 : 1;
  }
  ExecutionRecord rec = engine.await(engine.submit(url));
  print_flat_json(rec.response);
  return rec.outcome == Outcome::ok ? 0 : 1;
}

int run_workflow_cmd(const Config& cfg, const std::string& file, const std::string& endpoint,
                     bool auto_complete, const std::string& scenario_path) {
  Workflow wf = parse_workflow(read_file(file));
  WorkflowResult result;
  if (!endpoint.empty()) {
    result = run_workflow(wf, remote_client(endpoint), auto_complete);
  } else {
    Site site = make_site(cfg);
    FactoryState init = seeded_state(site.topology, scenario_path);
    auto engine = std::make_shared<Engine>(site.catalog, init);
    Gateway gateway(engine, init);
    result = run_workflow(wf, local_client(gateway), auto_complete);
  }
  std::cout << result.trace;
  if (result.completed) {
    std::cerr << "workflow completed (" << result.steps.size() << " steps)\n";
    return 0;
  }
  const StepResult& last = result.steps.back();
  std::cerr << "workflow aborted at step " << last.index << " (" << last.outcome << ")\n";
  return 1;
}

int run_plan(const Config& cfg, const std::string& goal_path, const std::string& scenario_path,
             bool do_replay, std::size_t max_states) {
  Site site = make_site(cfg);
  FactoryState state = seeded_state(site.topology, scenario_path);
  auto goals = pddl::parse_goal_file(read_file(goal_path));
  pddl::PlanResult res = pddl::solve(*site.catalog, state, goals, max_states);
  if (!res.found) {
    std::cerr << "no plan: " << res.reason << "\n";
    return 1;
  }
  std::cerr << "plan found: " << res.plan.steps.size() << " steps, " << res.expanded
            << " states expanded\n";
  for (const auto& s : res.plan.steps) std::cout << s << "\n";
  if (do_replay) {
    pddl::ReplayResult rep = pddl::replay(*site.catalog, state, res.plan);
    if (!rep.ok) {
      std::cerr << "replay failed: " << rep.error << "\n";
      return 1;
    }
    for (const auto& step : rep.steps) std::cout << step.url << "\n";
    std::cerr << "replay ok: " << rep.steps.size() << " service calls\n";
  }
  return 0;
}

int run_validate(const Config& cfg) {
  Site site = make_site(cfg);
  KnowledgeBase kb(as_triples(*site.catalog));
  int problems = 0;
  for (const Violation& v : kb.validate()) {
    std::cout << "violation: " << v.kind << " " << v.subject.local_name() << " " << v.detail
              << "\n";
    ++problems;
  }
  FactoryState init = initial_state(site.topology);
  for (const std::string& msg : check_invariants(init, site.topology)) {
    std::cout << "invariant: " << msg << "\n";
    ++problems;
  }
  for (const std::string& msg : pddl::check_domain(pddl::export_domain(*site.catalog))) {
    std::cout << "domain: " << msg << "\n";
    ++problems;
  }
  for (const std::string& msg :
       pddl::check_problem(pddl::export_problem(*site.catalog, init, {}))) {
    std::cout << "problem: " << msg << "\n";
    ++problems;
  }
  if (problems == 0) {
    std::cout << "validate: ok (" << kb.triples().size() << " triples, "
              << site.catalog->services().size() << " services)\n";
    return 0;
  }
  std::cerr << "validate: " << problems << " problem(s)\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"service layer for a simulated training factory"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "configuration file (also $FTFLOOR_CONFIG)")
      ->envname("FTFLOOR_CONFIG");

  int floors_flag = 0;
  std::string host_flag;
  app.add_option("--floors", floors_flag, "number of factory floors")->check(CLI::Range(1, 2));
  app.add_option("--host", host_flag, "host:port used in catalog URLs");

  // serve
  auto* serve = app.add_subcommand("serve", "run the HTTP gateway");
  int port_flag = 0;
  std::string clock_flag;
  std::string scenario_path;
  serve->add_option("--port", port_flag, "listen port");
  serve->add_option("--clock", clock_flag, "clock mode")
      ->check(CLI::IsMember({"sim", "real"}));
  serve->add_option("--scenario", scenario_path, "initial workpiece placement file");

  // catalog
  auto* catalog_cmd = app.add_subcommand("catalog", "inspect the service catalog");
  catalog_cmd->require_subcommand(1);
  auto* cat_list = catalog_cmd->add_subcommand("list", "print one service URL per line");
  std::string kind_filter;
  cat_list->add_option("--kind", kind_filter, "filter by service kind")
      ->check(CLI::IsMember({"actuation", "sensing"}));
  auto* cat_dump = catalog_cmd->add_subcommand("dump", "dump the knowledge base as triples");
  auto* cat_counts = catalog_cmd->add_subcommand("counts", "per-machine expansion counts");

  // invoke
  auto* invoke_cmd = app.add_subcommand("invoke", "invoke a single service");
  std::string invoke_url, endpoint;
  invoke_cmd->add_option("url", invoke_url, "service URL")->required();
  invoke_cmd->add_option("--endpoint", endpoint, "running gateway (host:port)");
  invoke_cmd->add_option("--scenario", scenario_path, "initial placement for local invocation");

  // workflow
  auto* workflow_cmd = app.add_subcommand("workflow", "run service workflows");
  workflow_cmd->require_subcommand(1);
  auto* wf_run = workflow_cmd->add_subcommand("run", "execute a workflow file");
  std::string workflow_file;
  bool auto_complete = false;
  wf_run->add_option("file", workflow_file, "workflow file")->required();
  wf_run->add_flag("--auto-complete-human", auto_complete, "complete human tasks immediately");
  wf_run->add_option("--endpoint", endpoint, "running gateway (host:port)");
  wf_run->add_option("--scenario", scenario_path, "initial placement for local execution");

  // pddl
  auto* pddl_cmd = app.add_subcommand("pddl", "planning model export and search");
  pddl_cmd->require_subcommand(1);
  std::string out_path, goal_path, problem_name = "floor";
  auto* pddl_domain = pddl_cmd->add_subcommand("export-domain", "write the planning domain");
  pddl_domain->add_option("-o,--output", out_path, "output file (default stdout)");
  auto* pddl_problem = pddl_cmd->add_subcommand("export-problem", "write a planning problem");
  pddl_problem->add_option("-o,--output", out_path, "output file (default stdout)");
  pddl_problem->add_option("--goal", goal_path, "goal file, one ground atom per line")
      ->required();
  pddl_problem->add_option("--scenario", scenario_path, "initial placement file");
  pddl_problem->add_option("--name", problem_name, "problem name");
  auto* pddl_plan = pddl_cmd->add_subcommand("plan", "breadth-first search for a plan");
  bool do_replay = false;
  std::size_t max_states = 1000000;
  pddl_plan->add_option("--goal", goal_path, "goal file, one ground atom per line")->required();
  pddl_plan->add_option("--scenario", scenario_path, "initial placement file");
  pddl_plan->add_flag("--replay", do_replay, "map the plan back to service calls");
  pddl_plan->add_option("--max-states", max_states, "search state cap");

  // fault
  auto* fault_cmd = app.add_subcommand("fault", "toggle a machine fault on a running gateway");
  std::string fault_machine, fault_mode;
  fault_cmd->add_option("machine", fault_machine, "machine id")->required();
  fault_cmd->add_option("mode", fault_mode, "on or off")
      ->required()
      ->check(CLI::IsMember({"on", "off"}));
  fault_cmd->add_option("--endpoint", endpoint, "running gateway (host:port)");

  // kb
  auto* kb_cmd = app.add_subcommand("kb", "query the knowledge base");
  kb_cmd->require_subcommand(1);
  auto* kb_query = kb_cmd->add_subcommand("query", "list condition bindings of a service");
  std::string kb_service, kb_role;
  kb_query->add_option("--service", kb_service, "service URL")->required();
  kb_query->add_option("--role", kb_role, "pre or post")
      ->required()
      ->check(CLI::IsMember({"pre", "post"}));

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check model consistency");

  // tasks
  auto* tasks_cmd = app.add_subcommand("tasks", "human work steps on a running gateway");
  tasks_cmd->require_subcommand(1);
  auto* tasks_complete = tasks_cmd->add_subcommand("complete", "mark a human task as done");
  std::string task_id;
  tasks_complete->add_option("id", task_id, "task id")->required();
  tasks_complete->add_option("--endpoint", endpoint, "running gateway (host:port)");

  // Let --floors / --host appear after a subcommand as well as before it.
  auto enable_fallthrough = [](CLI::App* node, auto&& self) -> void {
    for (CLI::App* sub : node->get_subcommands([](const CLI::App*) { return true; })) {
      sub->fallthrough();
      self(sub, self);
    }
  };
  enable_fallthrough(&app, enable_fallthrough);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Config cfg = resolve_config(config_path.empty() ? std::nullopt
                                                    : std::optional<std::string>(config_path));
    const bool config_from_file = !config_path.empty();
    if (floors_flag > 0) cfg.floors = floors_flag;
    if (!host_flag.empty()) cfg.host = host_flag;
    if (endpoint.empty()) endpoint = "";  // remote commands default below

    if (*serve) return run_serve(cfg, config_from_file, clock_flag, port_flag, scenario_path);

    if (*catalog_cmd) {
      Site site = make_site(cfg);
      if (*cat_list) {
        for (const auto& [url, svc] : site.catalog->services()) {
          if (kind_filter == "actuation" && svc.kind != ServiceKind::actuation) continue;
          if (kind_filter == "sensing" && svc.kind != ServiceKind::sensing) continue;
          std::cout << url << "\n";
        }
        return 0;
      }
      if (*cat_dump) {
        KnowledgeBase kb(as_triples(*site.catalog));
        std::cout << dump_triples(kb);
        return 0;
      }
      if (*cat_counts) {
        std::cout << counts_table(*site.catalog);
        return 0;
      }
    }

    if (*invoke_cmd) return run_invoke(cfg, invoke_url, endpoint, scenario_path);

    if (*workflow_cmd && *wf_run)
      return run_workflow_cmd(cfg, workflow_file, endpoint, auto_complete, scenario_path);

    if (*pddl_cmd) {
      Site site = make_site(cfg);
      if (*pddl_domain) {
        write_output(out_path, pddl::export_domain(*site.catalog));
        return 0;
      }
      if (*pddl_problem) {
        FactoryState state = seeded_state(site.topology, scenario_path);
        auto goals = pddl::parse_goal_file(read_file(goal_path));
        write_output(out_path, pddl::export_problem(*site.catalog, state, goals, problem_name));
        return 0;
      }
      if (*pddl_plan) return run_plan(cfg, goal_path, scenario_path, do_replay, max_states);
    }

    if (*fault_cmd) {
      if (endpoint.empty()) endpoint = cfg.host;
      return print_http(http_request("POST", endpoint,
                                     "/admin/fault?machine=" + fault_machine +
                                         "&mode=" + fault_mode),
                        endpoint);
    }

    if (*kb_cmd && *kb_query) {
      Site site = make_site(cfg);
      const ServiceDescription* svc = site.catalog->lookup(kb_service);
      if (!svc) {
        std::cerr << "error: unknown service " << kb_service << "\n";
        return 1;
      }
      const auto& bindings = kb_role == "pre" ? svc->preconditions : svc->postconditions;
      for (const ConditionBinding& b : bindings) {
        std::cout << b.condition.local_name() << "\t" << b.checker_url << "\t" << b.required_key
                  << "\t" << b.required_value << "\n";
      }
      return 0;
    }

    if (*validate_cmd) return run_validate(cfg);

    if (*tasks_cmd && *tasks_complete) {
      if (endpoint.empty()) endpoint = cfg.host;
      return print_http(http_request("POST", endpoint, "/tasks/" + task_id + "/complete"),
                        endpoint);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

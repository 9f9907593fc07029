#include "ftfloor/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ftfloor/util.hpp"

namespace ftfloor {
namespace {

std::int64_t wall_epoch_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

Outcome outcome_of(ApplyErrorKind kind) {
  switch (kind) {
    case ApplyErrorKind::machine_error: return Outcome::machine_error;
    case ApplyErrorKind::not_applicable: return Outcome::not_applicable;
    case ApplyErrorKind::resource_full: return Outcome::resource_full;
  }
  return Outcome::not_applicable;
}

constexpr double kSensingSeconds = 0.05;

}  // namespace

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::ok: return "ok";
    case Outcome::precondition_violated: return "precondition_violated";
    case Outcome::postcondition_violated: return "postcondition_violated";
    case Outcome::unknown_service: return "unknown_service";
    case Outcome::machine_error: return "machine_error";
    case Outcome::not_applicable: return "not_applicable";
    case Outcome::resource_full: return "resource_full";
  }
  return "?";
}

ConditionCheck evaluate_conditions(const std::vector<ConditionBinding>& bindings,
                                   const Dispatch& dispatch) {
  for (const auto& b : bindings) {
    auto reading = dispatch(b.checker_url);
    if (!reading) return {false, b.condition, "unreachable"};
    auto it = reading->find(b.required_key);
    if (it == reading->end()) return {false, b.condition, "absent"};
    if (!util::iequals(it->second, b.required_value)) return {false, b.condition, it->second};
  }
  return {};
}

Engine::Engine(std::shared_ptr<const ServiceCatalog> catalog, FactoryState initial,
               ClockMode mode, int real_ms_per_sim_second)
    : catalog_(std::move(catalog)),
      state_(std::move(initial)),
      mode_(mode),
      scale_ms_(real_ms_per_sim_second) {
  sim_now_ms_ = state_.clock_ms;
}

Engine::~Engine() { stop_scheduler(); }

std::int64_t Engine::now_locked() const {
  return mode_ == ClockMode::simulated ? sim_now_ms_ : wall_epoch_ms();
}

std::int64_t Engine::now_ms() const {
  std::lock_guard lk(mu_);
  return now_locked();
}

std::int64_t Engine::duration_stamp_ms(double sim_seconds) const {
  double ms = mode_ == ClockMode::simulated ? sim_seconds * 1000.0
                                            : sim_seconds * scale_ms_;
  return std::max<std::int64_t>(1, std::llround(ms));
}

Ticket Engine::submit(const std::string& url) {
  std::lock_guard lk(mu_);
  Ticket t = next_ticket_++;
  PendingRequest req{t, url, {}};
  const ServiceDescription* svc = catalog_->lookup(url);
  if (svc) {
    // Keep query values outside the parameter grid (e.g. speed) as runtime
    // arguments for the simulator.
    std::set<std::string> canonical;
    for (const auto& [k, v] : svc->parameters) canonical.insert(k);
    for (const auto& [k, v] : util::parse_url(url).query)
      if (!canonical.contains(k)) req.runtime_args[k] = v;
    if (svc->kind == ServiceKind::sensing) {
      sensing_q_.push_back(std::move(req));
      cv_.notify_all();
      return t;
    }
  }
  actuation_q_.push_back(std::move(req));
  cv_.notify_all();
  return t;
}

Reading Engine::sense_reading_locked(const ServiceDescription& svc) const {
  auto param = [&](const std::string& key) -> std::string {
    for (const auto& [k, v] : svc.parameters)
      if (k == key) return v;
    return "";
  };
  const std::string& base = svc.base_name;
  const std::string machine = param("machine");
  const Topology& topo = catalog_->topology();
  if (base == "stateOfMachine")
    return read_sensor(state_, topo, machine, SensorRead::state_of_machine);
  if (base == "statusOfLightBarrier")
    return read_sensor(state_, topo, machine, SensorRead::status_of_light_barrier, param("lb"));
  if (base == "capacitiveSensor")
    return read_sensor(state_, topo, machine, SensorRead::capacitive_sensor, param("position"));
  if (base == "checkPosition")
    return read_sensor(state_, topo, machine, SensorRead::check_position, param("position"));
  if (base == "getMotorSpeed")
    return read_sensor(state_, topo, machine, SensorRead::get_motor_speed, param("motor"));
  if (base == "getAmountOfStoredWorkpieces")
    return read_sensor(state_, topo, machine, SensorRead::get_amount_of_stored_workpieces);
  throw SensorError("unknown_sensor: " + base);
}

std::optional<Reading> Engine::dispatch_locked(const std::string& url) const {
  const ServiceDescription* svc = catalog_->lookup(url);
  if (!svc || svc->kind != ServiceKind::sensing) return std::nullopt;
  try {
    return sense_reading_locked(*svc);
  } catch (const SensorError&) {
    return std::nullopt;
  }
}

void Engine::emit_locked(ExecutionRecord record) {
  Ticket t = record.ticket;
  record_order_.push_back(t);
  records_[t] = std::move(record);
  cv_.notify_all();
}

int Engine::drain_sensing_locked() {
  int produced = 0;
  while (!sensing_q_.empty()) {
    PendingRequest req = std::move(sensing_q_.front());
    sensing_q_.pop_front();
    const ServiceDescription* svc = catalog_->lookup(req.url);
    ExecutionRecord rec;
    rec.ticket = req.ticket;
    rec.service_url = req.url;
    rec.start_ms = now_locked();
    if (!svc) {
      rec.outcome = Outcome::unknown_service;
      rec.end_ms = rec.start_ms;
      rec.response = {{"status", "error"}, {"error_type", "unknown_service"}};
    } else {
      try {
        rec.response = sense_reading_locked(*svc);
        rec.outcome = Outcome::ok;
      } catch (const SensorError& e) {
        rec.outcome = Outcome::not_applicable;
        rec.response = {{"status", "error"}, {"error_type", "not_applicable"},
                        {"detail", e.what()}};
      }
      rec.end_ms = rec.start_ms + duration_stamp_ms(kSensingSeconds);
    }
    emit_locked(std::move(rec));
    ++produced;
  }
  return produced;
}

int Engine::scan_locked() {
  int produced = 0;
  std::deque<PendingRequest> still_blocked;
  std::set<std::string> claimed = locked_;
  while (!actuation_q_.empty()) {
    PendingRequest req = std::move(actuation_q_.front());
    actuation_q_.pop_front();
    const std::int64_t now = now_locked();
    auto fail = [&](Outcome outcome, std::optional<Iri> condition = {}) {
      ExecutionRecord rec;
      rec.ticket = req.ticket;
      rec.service_url = req.url;
      rec.outcome = outcome;
      rec.start_ms = now;
      rec.end_ms = now;
      rec.response = {{"status", "error"}, {"error_type", std::string(to_string(outcome))}};
      if (condition) {
        rec.failed_condition = condition;
        rec.response["failed_condition"] = condition->local_name();
      }
      emit_locked(std::move(rec));
      ++produced;
    };

    const ServiceDescription* svc = catalog_->lookup(req.url);
    if (!svc) {
      fail(Outcome::unknown_service);
      continue;
    }
    bool blocked = false;
    for (const auto& r : svc->required_resources)
      if (claimed.contains(r)) blocked = true;
    if (blocked) {
      // FIFO per resource set: reserve so later overlapping requests cannot
      // overtake, then leave the request queued.
      claimed.insert(svc->required_resources.begin(), svc->required_resources.end());
      still_blocked.push_back(std::move(req));
      continue;
    }
    const std::string& provider = svc->provider;
    auto mit = state_.machines.find(provider);
    if (mit == state_.machines.end() || mit->second.state == MachineState::error) {
      // Name the readiness precondition that the fault breaks, if declared.
      std::optional<Iri> ready;
      for (const auto& b : svc->preconditions)
        if (b.required_key == "state" && util::iequals(b.required_value, "ready")) {
          ready = b.condition;
          break;
        }
      fail(Outcome::machine_error, ready);
      continue;
    }
    ConditionCheck pre = evaluate_conditions(
        svc->preconditions, [this](const std::string& u) { return dispatch_locked(u); });
    if (!pre.passed) {
      fail(Outcome::precondition_violated, pre.condition);
      continue;
    }
    state_.clock_ms = mode_ == ClockMode::simulated ? sim_now_ms_ : state_.clock_ms;
    auto dry = apply(state_, catalog_->topology(), *svc, req.runtime_args);
    if (auto* err = std::get_if<ApplyError>(&dry)) {
      fail(outcome_of(err->kind));
      continue;
    }
    locked_.insert(svc->required_resources.begin(), svc->required_resources.end());
    claimed.insert(svc->required_resources.begin(), svc->required_resources.end());
    mit->second.state = MachineState::busy;
    in_flight_.push_back({req.ticket, req.url, svc, now,
                          now + duration_stamp_ms(svc->nominal_duration),
                          std::move(req.runtime_args)});
  }
  actuation_q_ = std::move(still_blocked);
  return produced;
}

void Engine::finish_locked(const InFlight& flight) {
  const ServiceDescription& svc = *flight.svc;
  auto& machine = state_.machines.at(svc.provider);
  if (machine.state == MachineState::busy) machine.state = MachineState::ready;

  auto unlock = [&] {
    for (const auto& r : svc.required_resources) locked_.erase(r);
  };

  ExecutionRecord rec;
  rec.ticket = flight.ticket;
  rec.service_url = flight.url;
  rec.start_ms = flight.start_ms;
  rec.end_ms = flight.end_ms;

  state_.clock_ms = flight.start_ms;
  auto result = apply(state_, catalog_->topology(), svc, flight.runtime_args);
  if (auto* err = std::get_if<ApplyError>(&result)) {
    // E.g. a fault injected mid-flight; the action yields no effect.
    rec.outcome = outcome_of(err->kind);
    rec.response = {{"status", "error"},
                    {"error_type", std::string(to_string(rec.outcome))}};
    unlock();
    emit_locked(std::move(rec));
    return;
  }
  state_ = std::move(std::get<TransitionResult>(result).new_state);
  state_.clock_ms = flight.end_ms;

  ConditionCheck post = evaluate_conditions(
      svc.postconditions, [this](const std::string& u) { return dispatch_locked(u); });
  if (!post.passed) {
    // The effect stays committed; only the verification is reported.
    rec.outcome = Outcome::postcondition_violated;
    rec.failed_condition = post.condition;
    rec.response = {{"status", "error"},
                    {"error_type", "postcondition_violated"},
                    {"failed_condition", post.condition->local_name()}};
  } else {
    rec.outcome = Outcome::ok;
    rec.response = {{"status", "ok"},
                    {"start_time", util::iso_timestamp(rec.start_ms)},
                    {"end_time", util::iso_timestamp(rec.end_ms)}};
  }
  unlock();
  emit_locked(std::move(rec));
}

int Engine::complete_due_locked() {
  if (in_flight_.empty()) return 0;
  std::int64_t horizon;
  if (mode_ == ClockMode::simulated) {
    horizon = in_flight_.front().end_ms;
    for (const auto& f : in_flight_) horizon = std::min(horizon, f.end_ms);
    sim_now_ms_ = horizon;
  } else {
    horizon = wall_epoch_ms();
  }
  std::vector<InFlight> due;
  std::vector<InFlight> later;
  for (auto& f : in_flight_)
    (f.end_ms <= horizon ? due : later).push_back(std::move(f));
  in_flight_ = std::move(later);
  std::sort(due.begin(), due.end(), [](const InFlight& a, const InFlight& b) {
    return a.end_ms != b.end_ms ? a.end_ms < b.end_ms : a.ticket < b.ticket;
  });
  for (const auto& f : due) finish_locked(f);
  return static_cast<int>(due.size());
}

int Engine::run_step_locked() {
  int produced = drain_sensing_locked();
  produced += scan_locked();
  int completed = complete_due_locked();
  produced += completed;
  if (completed > 0) produced += scan_locked();
  return produced;
}

int Engine::run_step() {
  std::lock_guard lk(mu_);
  return run_step_locked();
}

int Engine::run_scan() {
  std::lock_guard lk(mu_);
  return drain_sensing_locked() + scan_locked();
}

bool Engine::idle() const {
  std::lock_guard lk(mu_);
  return actuation_q_.empty() && sensing_q_.empty() && in_flight_.empty();
}

void Engine::run_until_idle() {
  std::unique_lock lk(mu_);
  for (;;) {
    run_step_locked();
    if (actuation_q_.empty() && sensing_q_.empty() && in_flight_.empty()) return;
    if (mode_ == ClockMode::real && !in_flight_.empty()) {
      std::int64_t next = in_flight_.front().end_ms;
      for (const auto& f : in_flight_) next = std::min(next, f.end_ms);
      auto until = std::chrono::system_clock::time_point(std::chrono::milliseconds(next));
      cv_.wait_until(lk, until);
    }
  }
}

ExecutionRecord Engine::await(Ticket ticket) {
  std::unique_lock lk(mu_);
  for (;;) {
    if (auto it = records_.find(ticket); it != records_.end()) return it->second;
    if (ticket == 0 || ticket >= next_ticket_)
      throw UnknownTicketError("unknown ticket " + std::to_string(ticket));
    if (mode_ == ClockMode::simulated) {
      if (actuation_q_.empty() && sensing_q_.empty() && in_flight_.empty())
        throw UnknownTicketError("ticket " + std::to_string(ticket) +
                                 " has no pending work");
      run_step_locked();
    } else {
      cv_.wait_for(lk, std::chrono::milliseconds(10));
    }
  }
}

std::optional<ExecutionRecord> Engine::poll(Ticket ticket) const {
  std::lock_guard lk(mu_);
  if (auto it = records_.find(ticket); it != records_.end()) return it->second;
  if (ticket == 0 || ticket >= next_ticket_)
    throw UnknownTicketError("unknown ticket " + std::to_string(ticket));
  return std::nullopt;
}

std::optional<ExecutionRecord> Engine::sense(const std::string& url) {
  std::lock_guard lk(mu_);
  const ServiceDescription* svc = catalog_->lookup(url);
  if (!svc || svc->kind != ServiceKind::sensing) return std::nullopt;
  ExecutionRecord rec;
  rec.ticket = next_ticket_++;
  rec.service_url = url;
  rec.start_ms = now_locked();
  rec.end_ms = rec.start_ms + duration_stamp_ms(kSensingSeconds);
  try {
    rec.response = sense_reading_locked(*svc);
    rec.outcome = Outcome::ok;
  } catch (const SensorError& e) {
    rec.outcome = Outcome::not_applicable;
    rec.response = {{"status", "error"}, {"error_type", "not_applicable"},
                    {"detail", e.what()}};
  }
  ExecutionRecord copy = rec;
  emit_locked(std::move(rec));
  return copy;
}

Reading Engine::read_station_rfid(const std::string& station) const {
  std::lock_guard lk(mu_);
  return read_sensor(state_, catalog_->topology(), "", SensorRead::read_rfid, station);
}

FactoryState Engine::snapshot() const {
  std::lock_guard lk(mu_);
  return state_;
}

void Engine::set_fault(const std::string& machine, bool on) {
  std::lock_guard lk(mu_);
  state_ = inject_fault(state_, machine, on);
  cv_.notify_all();
}

void Engine::reset(FactoryState state) {
  std::lock_guard lk(mu_);
  state_ = std::move(state);
  sim_now_ms_ = state_.clock_ms;
  actuation_q_.clear();
  sensing_q_.clear();
  in_flight_.clear();
  locked_.clear();
  records_.clear();
  record_order_.clear();
  cv_.notify_all();
}

std::string Engine::trace_log() const {
  std::lock_guard lk(mu_);
  std::string out = "ticket\turl\toutcome\tstart\tend\tfailed_condition\n";
  for (Ticket t : record_order_) {
    const ExecutionRecord& r = records_.at(t);
    out += std::to_string(r.ticket);
    out += '\t';
    out += r.service_url;
    out += '\t';
    out += to_string(r.outcome);
    out += '\t';
    out += util::iso_timestamp(r.start_ms);
    out += '\t';
    out += util::iso_timestamp(r.end_ms);
    out += '\t';
    out += r.failed_condition ? r.failed_condition->local_name() : "-";
    out += '\n';
  }
  return out;
}

std::vector<ExecutionRecord> Engine::records() const {
  std::lock_guard lk(mu_);
  std::vector<ExecutionRecord> out;
  out.reserve(record_order_.size());
  for (Ticket t : record_order_) out.push_back(records_.at(t));
  return out;
}

void Engine::start_scheduler() {
  std::lock_guard lk(mu_);
  if (scheduler_.joinable()) return;
  stop_ = false;
  scheduler_ = std::thread([this] {
    std::unique_lock lk(mu_);
    while (!stop_) {
      run_step_locked();
      if (in_flight_.empty()) {
        cv_.wait(lk, [this] {
          return stop_ || !actuation_q_.empty() || !sensing_q_.empty() ||
                 !in_flight_.empty();
        });
      } else {
        std::int64_t next = in_flight_.front().end_ms;
        for (const auto& f : in_flight_) next = std::min(next, f.end_ms);
        auto until = std::chrono::system_clock::time_point(std::chrono::milliseconds(next));
        cv_.wait_until(lk, until);
      }
    }
  });
}

void Engine::stop_scheduler() {
  {
    std::lock_guard lk(mu_);
    if (!scheduler_.joinable()) return;
    stop_ = true;
    cv_.notify_all();
  }
  scheduler_.join();
}

}  // namespace ftfloor

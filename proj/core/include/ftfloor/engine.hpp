#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "ftfloor/catalog.hpp"
#include "ftfloor/config.hpp"
#include "ftfloor/sim.hpp"

namespace ftfloor {

using Ticket = std::uint64_t;

enum class Outcome {
  ok,
  precondition_violated,
  postcondition_violated,
  unknown_service,
  machine_error,
  not_applicable,
  resource_full,
};
std::string_view to_string(Outcome o);

struct ExecutionRecord {
  Ticket ticket = 0;
  std::string service_url;
  Outcome outcome = Outcome::ok;
  std::int64_t start_ms = 0;  // simulated epoch ms, or wall epoch ms in real mode
  std::int64_t end_ms = 0;
  std::optional<Iri> failed_condition;
  std::map<std::string, std::string> response;
};

struct ConditionCheck {
  bool passed = true;
  std::optional<Iri> condition;
  std::string observed;
};

// Invokes a checker service and returns its flat response, or nullopt when
// the checker is unreachable.
using Dispatch = std::function<std::optional<Reading>(const std::string& url)>;

// Evaluates bindings in order; the required key is compared case-insensitively
// and the first failure short-circuits.
ConditionCheck evaluate_conditions(const std::vector<ConditionBinding>& bindings,
                                   const Dispatch& dispatch);

struct UnknownTicketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Engine {
 public:
  Engine(std::shared_ptr<const ServiceCatalog> catalog, FactoryState initial,
         ClockMode mode = ClockMode::simulated, int real_ms_per_sim_second = 10);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  Ticket submit(const std::string& url);

  // Drains the sensing queue, starts every startable actuation, then advances
  // to (or past, in real mode) the next completion. Returns records produced.
  int run_step();

  // The non-advancing half of run_step: sensing + starts only. Lets tests
  // observe the in-flight window in simulated mode.
  int run_scan();

  void run_until_idle();
  bool idle() const;

  // Blocks until the ticket has a record (drives the queue in simulated mode).
  ExecutionRecord await(Ticket ticket);
  std::optional<ExecutionRecord> poll(Ticket ticket) const;  // nullopt = pending

  // Immediate lock-free sensing path; nullopt when the URL is not a catalog
  // sensing service.
  std::optional<ExecutionRecord> sense(const std::string& url);
  Reading read_station_rfid(const std::string& station) const;

  FactoryState snapshot() const;
  void set_fault(const std::string& machine, bool on);
  void reset(FactoryState state);
  std::int64_t now_ms() const;

  const ServiceCatalog& catalog() const { return *catalog_; }
  ClockMode clock_mode() const { return mode_; }

  // One line per record: ticket, url, outcome, start, end, failed_condition.
  std::string trace_log() const;
  std::vector<ExecutionRecord> records() const;

  // Background scheduler used by the real-time gateway.
  void start_scheduler();
  void stop_scheduler();

 private:
  struct PendingRequest {
    Ticket ticket;
    std::string url;
    std::map<std::string, std::string> runtime_args;
  };
  struct InFlight {
    Ticket ticket;
    std::string url;
    const ServiceDescription* svc;
    std::int64_t start_ms;
    std::int64_t end_ms;
    std::map<std::string, std::string> runtime_args;
  };

  std::int64_t now_locked() const;
  std::int64_t duration_stamp_ms(double sim_seconds) const;
  Reading sense_reading_locked(const ServiceDescription& svc) const;
  std::optional<Reading> dispatch_locked(const std::string& url) const;
  void emit_locked(ExecutionRecord record);
  int drain_sensing_locked();
  int scan_locked();
  int complete_due_locked();
  void finish_locked(const InFlight& flight);
  int run_step_locked();

  std::shared_ptr<const ServiceCatalog> catalog_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  FactoryState state_;
  ClockMode mode_;
  int scale_ms_;
  std::int64_t sim_now_ms_ = 0;

  std::deque<PendingRequest> actuation_q_;
  std::deque<PendingRequest> sensing_q_;
  std::vector<InFlight> in_flight_;
  std::set<std::string> locked_;
  std::map<Ticket, ExecutionRecord> records_;
  std::vector<Ticket> record_order_;
  Ticket next_ticket_ = 1;

  std::thread scheduler_;
  bool stop_ = false;
};

}  // namespace ftfloor
